
import numpy as np
import pytest

from twistorlab.balanced import (
    BalancedConfig,
    balanced_hk,
    balanced_submersion,
    chern_torsion,
    critical_cutoff_xi,
    delta_sign,
    lemma2_search_c,
    michelsohn_forward,
    michelsohn_forward_matrix,
    michelsohn_inverse,
    michelsohn_inverse_matrix,
    nonkahler_witness,
    random_lemma2_instance,
    torsion_identity_residuals,
    trace_formula_residual,
    xi_tilde_coefficients,
    xi_tilde_identity_residual,
)
from twistorlab.errors import ContractError, CriticalPointError, PositivityError, SingularMatrixError
from twistorlab.exterior import form_from_hermitian, hermitian_matrix_11, hermitian_matrix_n1
from twistorlab.hypercomplex import build_flat_torus, build_hopf_chart
from twistorlab.qmodels import build_p1
from twistorlab.twistor import TwistorProduct

from conftest import random_hermitian_pd


def std_coframe(n):
    th = np.zeros((n, 2 * n), dtype=complex)
    for j in range(n):
        th[j, 2 * j], th[j, 2 * j + 1] = 1.0, 1j
    return th


def test_delta_sign():
    assert delta_sign(2) == -1
    assert delta_sign(3) == delta_sign(4) == 1


def test_config_validation():
    with pytest.raises(ContractError):
        BalancedConfig(t=0.0)
    with pytest.raises(ContractError):
        BalancedConfig(gamma=-1.0)
    assert BalancedConfig(gamma=None).gamma is None


def test_michelsohn_anchor():
    th = std_coframe(3)
    psi = michelsohn_forward(form_from_hermitian(np.diag([1.0, 2.0, 3.0]), th), 3)
    assert np.allclose(hermitian_matrix_n1(psi, th), np.diag([6.0, 3.0, 2.0]), atol=1e-12)
    xi = michelsohn_inverse(psi, 3)
    assert np.allclose(hermitian_matrix_11(xi, th), np.diag([1.0, 2.0, 3.0]), atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_michelsohn_round_trip(rng, n):
    th = std_coframe(n)
    for _ in range(10):
        F = random_hermitian_pd(rng, n)
        phi = form_from_hermitian(F, th)
        psi = michelsohn_forward(phi, n)
        assert np.allclose(hermitian_matrix_n1(psi, th), michelsohn_forward_matrix(F), atol=1e-10)
        back = michelsohn_inverse(psi, n)
        assert (back - phi).norm() / phi.norm() < 1e-10


@pytest.mark.parametrize("n", [2, 3])
def test_michelsohn_matrix_inverse(rng, n):
    F = random_hermitian_pd(rng, n)
    assert np.allclose(michelsohn_inverse_matrix(michelsohn_forward_matrix(F)), F, atol=1e-10)


def test_michelsohn_rejects_indefinite_input():
    th = std_coframe(2)
    with pytest.raises(PositivityError) as info:
        michelsohn_forward(form_from_hermitian(np.diag([1.0, -1.0]), th), 2)
    assert info.value.witness is not None
    with pytest.raises(SingularMatrixError):
        michelsohn_inverse(form_from_hermitian(np.diag([1.0, 0.0]), th), 2)


@pytest.mark.parametrize("n,r", [(1, 2), (2, 2), (1, 4)])
def test_xi_tilde_identity(rng, n, r):
    th = std_coframe(n + r)
    for _ in range(5):
        F = random_hermitian_pd(rng, n)
        G = random_hermitian_pd(rng, r)
        phi = form_from_hermitian(np.pad(F, ((0, r), (0, r))), th)
        vt = form_from_hermitian(np.pad(G, ((n, 0), (n, 0))), th)
        A, B = rng.uniform(0.1, 5.0, 2)
        assert xi_tilde_identity_residual(A, B, phi, vt, n, r) < 1e-10


def test_xi_tilde_homogeneity():
    n, r, lam = 2, 3, 7.0
    a, b = xi_tilde_coefficients(1.3, 0.4, n, r)
    a2, b2 = xi_tilde_coefficients(lam * 1.3, lam * 0.4, n, r)
    N = n + r - 1
    assert a2 / a == pytest.approx(lam ** (1 / N))
    assert b2 / b == pytest.approx(lam ** (1 / N))
    with pytest.raises(ContractError):
        xi_tilde_coefficients(0.0, 1.0, n, r)


def test_flat_torsion_is_zero(rng):
    M = build_flat_torus(2)
    d = chern_torsion(M.metric, rng.uniform(-0.5, 0.5, 8), M.chart, M.structures()["I"], metric_partials=M.metric_partials)
    assert d.Psi == 0.0 and d.Phi == 0.0
    assert np.max(np.abs(d.T)) == 0.0


def test_hopf_torsion_matches_conformal_formula(hopf):
    p = np.array([1.0, 0.3, -0.2, 0.5])
    d = chern_torsion(hopf.metric, p, hopf.chart, metric_partials=hopf.metric_partials)
    grad = -p / (p @ p) ** 2
    de = d.frame.T @ grad
    m = de.size
    eye = np.eye(m)
    oracle = de[:, None, None] * eye[None, :, :] - de[None, :, None] * eye[:, None, :]
    assert np.max(np.abs(oracle - d.T_lower)) < 1e-6


def test_hopf_torsion_forms():
    M = build_hopf_chart(1)
    out = torsion_identity_residuals(M.metric, np.array([1.0, 0.3, -0.2, 0.5]), M.chart, metric_partials=M.metric_partials)
    assert out["del_omega"] < 1e-6
    assert out["delbar_omega"] < 1e-6
    assert out["Phi"] == pytest.approx(0.0, abs=1e-6)


def test_hopf_wedge_scalars_dimension_four():
    M = build_hopf_chart(2)
    p = np.array([1.0, 0.3, -0.2, 0.5, 0.1, 0.2, -0.3, 0.4])
    out = torsion_identity_residuals(M.metric, p, M.chart, M.structures()["I"], M.metric_partials)
    assert out["del_omega"] < 1e-6 and out["delbar_omega"] < 1e-6
    assert out["torsion_wedge_residual"] < 1e-5
    assert out["ddbar_wedge_residual"] < 1e-5
    assert out["Psi"] == pytest.approx(-6.0, abs=1e-5)
    assert out["Psi_wedge"] == pytest.approx(12.0, abs=1e-5)
    assert out["Phi"] == pytest.approx(48.0, abs=1e-4)
    assert out["Phi_wedge"] == pytest.approx(-12.0, abs=1e-4)


def test_trace_identity(rng):
    for r in (2, 3):
        th = std_coframe(r)
        g = random_hermitian_pd(rng, r)
        chi = random_hermitian_pd(rng, r) - 2 * np.eye(r)
        assert trace_formula_residual(g, chi, th) < 1e-10


def test_balanced_hk(torus_p1, rng):
    res = balanced_hk(torus_p1, 1.0, torus_p1.sample(rng, 5))
    assert res.positive
    assert res.d_top_residual < 1e-5
    assert res.d_omega_min > 0.05


def test_balanced_hk_preconditions(torus_p1, rng):
    with pytest.raises(ContractError):
        balanced_hk(torus_p1, 0.0, [])
    X = TwistorProduct(build_hopf_chart(1), build_p1())
    with pytest.raises(ContractError, match="flat"):
        balanced_hk(X, 1.0, [])


def test_submersion_reference_coefficients(torus2_p1, rng):
    X = torus2_p1
    pts = X.sample(rng, 2)
    res = balanced_submersion(X, 10.0, pts)
    assert res.identity_residual < 1e-8
    assert res.d_Omega_residual < 1e-4
    assert all(row["S"] == 10.0 and row["B"] == pytest.approx(1.5) for row in res.per_point)
    a, b = 240 ** 0.25, 9 * 240 ** -0.75
    for p in pts:
        assert (res.omega_X(p) - (a * X.omega_M(p) + b * X.omega_Q(p))).norm() < 1e-10


def test_submersion_corrected_convention_matches_direct_assembly(torus_p1, rng):
    p = torus_p1.sample(rng, 1)[0]
    res = balanced_submersion(torus_p1, 10.0, [p], convention="corrected")
    gap = (res.Omega_direct(p) - res.Omega_X(p)).norm() / res.Omega_X(p).norm()
    assert gap < 1e-7
    stated = balanced_submersion(torus_p1, 10.0, [p])
    assert (stated.Omega_direct(p) - stated.Omega_X(p)).norm() / stated.Omega_X(p).norm() > 1e-2


def test_submersion_rejects_critical_point(torus_z2):
    with pytest.raises(CriticalPointError):
        balanced_submersion(torus_z2, 10.0, [np.zeros(6)])


def test_submersion_gamma_search_and_positivity(rng):
    X = TwistorProduct(build_hopf_chart(1), build_p1())
    pts = [np.array([1.0, 0.3, -0.2, 0.5, 0.2, 0.1])]
    auto = balanced_submersion(X, None, pts, check_closed=False)
    assert auto.gamma == 1.0
    assert auto.positivity_scalar_min >= 0.1
    with pytest.raises(PositivityError):
        balanced_submersion(X, -1.0, pts, check_closed=False)
    with pytest.raises(ContractError):
        balanced_submersion(X, 1.0, pts, convention="other")


def test_cutoff_expansion_and_margin(torus_z2):
    m = np.array([0.1, -0.2, 0.3, 0.05])
    p = np.r_[m, 0.0, 0.0]
    margins = {}
    for t in (0.0, 1.0, 2.0, 4.0):
        c = critical_cutoff_xi(torus_z2, t, p)
        assert c.residual < 1e-4
        margins[t] = c.e_margin
    assert margins[0.0] == pytest.approx(0.0, abs=1e-6)
    for t in (1.0, 2.0, 4.0):
        assert margins[t] > 0
        assert margins[t] / t == pytest.approx(margins[1.0], rel=1e-4)


def test_cutoff_requires_critical_slice(torus_z2):
    with pytest.raises(ContractError, match="slice"):
        critical_cutoff_xi(torus_z2, 1.0, np.r_[np.zeros(4), 0.1, 0.0])


def test_lemma2_trivial_instance():
    H = np.diag([1.0, 1.0]).astype(complex)
    Hp = np.diag([0.0, 1.0]).astype(complex)
    res = lemma2_search_c([H], [Hp], 1)
    assert res.c == 1.0


def test_lemma2_coupled_instance():
    H = np.array([[1.0, 2.0], [2.0, 0.0]], dtype=complex)
    Hp = np.diag([0.0, 1.0]).astype(complex)
    res = lemma2_search_c([H], [Hp], 1)
    assert res.c > 4
    assert res.bound == pytest.approx(4.0)
    assert np.all(np.linalg.eigvalsh(H + res.c * Hp) > 0)


def test_lemma2_random_instances(rng):
    for _ in range(20):
        Hs, Hps = random_lemma2_instance(rng, 2, 2)
        res = lemma2_search_c(Hs, Hps, 2)
        assert res.c <= max(1.0, 4 * res.bound)
        for H, Hp in zip(Hs, Hps):
            assert np.linalg.eigvalsh(H + res.c * Hp)[0] > 0


def test_lemma2_preconditions():
    Hp = np.diag([0.0, 1.0]).astype(complex)
    with pytest.raises(PositivityError):
        lemma2_search_c([np.diag([-1.0, 1.0])], [Hp], 1)
    with pytest.raises(ContractError):
        lemma2_search_c([np.eye(2)], [np.ones((2, 2))], 1)
    with pytest.raises(PositivityError):
        lemma2_search_c([np.eye(2)], [np.zeros((2, 2))], 1)


def test_nonkahler_witness_positive(torus_p1, torus2_p1, rng):
    for X in (torus_p1, torus2_p1):
        res = nonkahler_witness(X, None, X.sample(rng, 3))
        assert res.min_coefficient > 0
        assert not res.violations


def test_nonkahler_witness_vanishes_at_critical_point(torus_z2):
    res = nonkahler_witness(torus_z2, None, [np.zeros(6)])
    assert res.min_coefficient >= -1e-10
    assert abs(res.values[0]) < 1e-10


def test_nonkahler_direct_sign(torus_p1, rng):
    pts = torus_p1.sample(rng, 2)
    lemma = nonkahler_witness(torus_p1, None, pts)
    direct = nonkahler_witness(torus_p1, None, pts, method="direct")
    for a, b in zip(lemma.values, direct.values):
        assert b == pytest.approx(-a, rel=1e-4)
