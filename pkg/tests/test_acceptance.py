"""Acceptance criteria, one test per criterion.

Every test prints a single ``ACCEPTANCE <n> PASS|FAIL: ...`` line (collected
again in the terminal summary) and then asserts the same verdict.  The
thresholds are the stated ones; nothing is loosened for criteria that do not
hold numerically.
"""

import math

import numpy as np

from conftest import acceptance_line, random_hermitian_pd
from twistorlab.balanced import (
    balanced_hk,
    balanced_submersion,
    chern_torsion,
    critical_cutoff_xi,
    lemma2_search_c,
    michelsohn_forward,
    michelsohn_inverse,
    nonkahler_witness,
    random_lemma2_instance,
    trace_formula_residual,
    xi_tilde_identity_residual,
)
from twistorlab.covers import adjoint_cover_canonical, hirzebruch_lattice, p1_lattice
from twistorlab.exterior import form_from_hermitian, hermitian_matrix_11, hermitian_matrix_n1
from twistorlab.fields import DiffConfig
from twistorlab.hypercomplex import QUATERNION_I, QUATERNION_J, QUATERNION_K, build_flat_torus, build_hopf_chart
from twistorlab.qmodels import (
    Polynomial,
    build_affine,
    build_hirzebruch,
    build_p1,
    build_p1xp1,
    pullback_fs_matrix,
    twistor_sphere_map,
)
from twistorlab.twistor import TwistorProduct, nijenhuis_residual, verify_lemma_identity

SEED = 2024


def std_coframe(n):
    th = np.zeros((n, 2 * n), dtype=complex)
    for j in range(n):
        th[j, 2 * j], th[j, 2 * j + 1] = 1.0, 1j
    return th


def finish(number, passed, detail):
    acceptance_line(number, passed, detail)
    assert passed, detail


def test_criterion_01_quaternionic_structure():
    rng = np.random.default_rng(SEED)
    rel, frame = 0.0, 0.0
    for M in (build_flat_torus(1), build_flat_torus(2), build_hopf_chart(1), build_hopf_chart(2)):
        for p in M.chart.sample(rng, 200):
            rel = max(rel, M.quaternion_residual(p), M.compatibility_residual(p))
            direct, via_frame = M.fundamental_forms(p), M.frame_forms(p)
            frame = max(frame, *((direct[a] - via_frame[a]).norm() for a in "IJK"))
    finish(1, rel < 1e-12 and frame < 1e-10, f"relations {rel:.2e} (< 1e-12), frame forms {frame:.2e} (< 1e-10)")


def test_criterion_02_twistor_sphere():
    rng = np.random.default_rng(SEED)
    unit, scale = 0.0, 0.0
    for _ in range(1000):
        Z1, Z2 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        lam = rng.uniform(0.1, 10.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        s = twistor_sphere_map(Z1, Z2)
        unit = max(unit, abs(np.linalg.norm(s) - 1.0))
        scale = max(scale, np.linalg.norm(twistor_sphere_map(lam * Z1, lam * Z2) - s))
    X = TwistorProduct(build_flat_torus(1), build_p1())
    anchor = 0.0
    for zeta, A in ((0, QUATERNION_I), (1, QUATERNION_J), (1j, QUATERNION_K)):
        J = X.structure_at(np.r_[np.zeros(4), complex(zeta).real, complex(zeta).imag])
        anchor = max(anchor, float(np.max(np.abs(J.matrix[:4, :4] - A))))
    ok = unit < 1e-12 and scale < 1e-12 and anchor < 1e-12
    finish(2, ok, f"unit norm {unit:.2e}, scale invariance {scale:.2e}, anchors {anchor:.2e} (all < 1e-12)")


def _integrability_scenarios():
    T = build_flat_torus(1)
    return {
        "p1/id": TwistorProduct(T, build_p1()),
        "p1/z2": TwistorProduct(T, build_p1(Polynomial.monomial(1, [2]))),
        "p1xp1/proj": TwistorProduct(T, build_p1xp1()),
        "hirzebruch(1)/proj": TwistorProduct(T, build_hirzebruch(1, 1.0)),
        "affine(2)/z1^2+z2": TwistorProduct(
            T, build_affine(2, Polynomial.monomial(2, [2, 0]) + Polynomial.monomial(2, [0, 1]))
        ),
    }


def test_criterion_03_integrability_dichotomy():
    rng = np.random.default_rng(SEED)
    worst, square, parts = 0.0, 0.0, []
    for name, X in _integrability_scenarios().items():
        pts = X.sample(rng, 50)
        res = nijenhuis_residual(X, pts, seed=SEED)
        worst = max(worst, res)
        square = max(square, max(X.structure_at(p).square_residual() for p in pts))
        parts.append(f"{name} {res:.1e}")
    Xz = TwistorProduct(build_flat_torus(1), build_affine(1, Polynomial.monomial(1, [0], [1])))
    pts = Xz.sample(rng, 50)
    zbar = nijenhuis_residual(Xz, pts, seed=SEED)
    square = max(square, max(Xz.structure_at(p).square_residual() for p in pts))
    ok = worst < 1e-6 and zbar > 0.05 and square < 1e-12
    finish(3, ok, f"holomorphic max {worst:.2e} (< 1e-6) [{', '.join(parts)}]; zbar {zbar:.3f} (> 0.05); square {square:.1e}")


def test_criterion_04_lemma_identities():
    rng = np.random.default_rng(SEED)
    X1 = TwistorProduct(build_flat_torus(1), build_p1())
    X2 = TwistorProduct(build_flat_torus(2), build_p1())
    pts1 = X1.sample(rng, 10)
    central = np.r_[rng.uniform(-0.4, 0.4, 8), 0.3, -0.5]
    types = max(verify_lemma_identity(X, i, pts1 if X is X1 else [central]).max_residual
                for X in (X1, X2) for i in ("0120q", "1002q"))
    r15 = verify_lemma_identity(X1, "1111q", pts1).max_residual
    r16 = verify_lemma_identity(X2, "11n1q", X2.sample(rng, 3))
    r17 = verify_lemma_identity(X2, "fq", [central])
    ratios = {}
    for ident, X, p in (("1111q", X1, central[[0, 1, 2, 3, 8, 9]]), ("11n1q", X2, central), ("fq", X2, central)):
        coarse = verify_lemma_identity(X.with_config(DiffConfig(4, 0.02, 0.04)), ident, [p]).max_residual
        fine = verify_lemma_identity(X.with_config(DiffConfig(4, 0.01, 0.02)), ident, [p]).max_residual
        ratios[ident] = coarse / fine if fine > 0 else math.inf
    ok = (types < 1e-6 and r15 < 1e-5 and r16.max_residual < 1e-4 and r17.max_residual < 1e-4
          and all(v >= 8 for v in ratios.values()))
    finish(4, ok, (
        f"0120q,1002q {types:.1e} (< 1e-6); 1111q {r15:.1e} (< 1e-5); "
        f"11n1q {r16.max_residual:.2e} coefficient {r16.expected_coefficient:g} fitted {r16.fitted_coefficient:.6f}; "
        f"fq {r17.max_residual:.2e} coefficient {r17.expected_coefficient:g} fitted {r17.fitted_coefficient:.6f} (< 1e-4); "
        "halving ratios " + ", ".join(f"{k} {v:.1f}" for k, v in ratios.items()) + " (>= 8)"
    ))


def test_criterion_05_michelsohn_bijection():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for n in (2, 3, 4):
        th = std_coframe(n)
        for _ in range(50):
            phi = form_from_hermitian(random_hermitian_pd(rng, n), th)
            back = michelsohn_inverse(michelsohn_forward(phi, n), n)
            worst = max(worst, (back - phi).norm() / phi.norm())
    th = std_coframe(3)
    psi = michelsohn_forward(form_from_hermitian(np.diag([1.0, 2.0, 3.0]), th), 3)
    anchor = float(np.max(np.abs(hermitian_matrix_n1(psi, th) - np.diag([6.0, 3.0, 2.0]))))
    finish(5, worst < 1e-10 and anchor < 1e-12, f"round trip {worst:.2e} (< 1e-10); anchor {anchor:.1e} (< 1e-12)")


def test_criterion_06_xi_tilde():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for n, r in ((1, 2), (2, 2), (1, 4)):
        th = std_coframe(n + r)
        for _ in range(50):
            phi = form_from_hermitian(np.pad(random_hermitian_pd(rng, n), ((0, r), (0, r))), th)
            vt = form_from_hermitian(np.pad(random_hermitian_pd(rng, r), ((n, 0), (n, 0))), th)
            A, B = rng.uniform(0.1, 5.0, 2)
            worst = max(worst, xi_tilde_identity_residual(A, B, phi, vt, n, r))
    finish(6, worst < 1e-10, f"identity residual {worst:.2e} (< 1e-10)")


def test_criterion_07_balanced_hk():
    rng = np.random.default_rng(SEED)
    d_top, d_min, pos = 0.0, math.inf, True
    for Q in (build_p1(), build_p1xp1()):
        X = TwistorProduct(build_flat_torus(1), Q)
        pts = X.sample(rng, 30)
        for t in (0.5, 1.0, 10.0):
            res = balanced_hk(X, t, pts)
            d_top, d_min, pos = max(d_top, res.d_top_residual), min(d_min, res.d_omega_min), pos and res.positive
    ok = d_top < 1e-5 and d_min > 0.05 and pos
    finish(7, ok, f"d(omega^(N-1)) {d_top:.2e} (< 1e-5); min |d omega| {d_min:.3f} (> 0.05); positive {pos}")


def test_criterion_08_submersion_metric():
    rng = np.random.default_rng(SEED)
    X = TwistorProduct(build_flat_torus(2), build_p1())
    pts = X.sample(rng, 3)
    res = balanced_submersion(X, 10.0, pts)
    trace = 0.0
    Q2 = build_p1xp1()
    for q in Q2.sample(rng, 5):
        g = hermitian_matrix_11(Q2.omega(q), Q2.dz_coframe())
        trace = max(trace, trace_formula_residual(g, pullback_fs_matrix(Q2, q), Q2.dz_coframe()))
    for r in (2, 3, 4):
        trace = max(trace, trace_formula_residual(random_hermitian_pd(rng, r), random_hermitian_pd(rng, r) - np.eye(r), std_coframe(r)))
    M = X.M
    flat = chern_torsion(M.metric, pts[0][:8], M.chart, M.structures()["I"], metric_partials=M.metric_partials)
    H = build_hopf_chart(1)
    p = np.array([1.0, 0.3, -0.2, 0.5])
    conf = 0.0
    for partials in (H.metric_partials, None):
        d = chern_torsion(H.metric, p, H.chart, metric_partials=partials)
        de = d.frame.T @ (-p / (p @ p) ** 2)
        eye = np.eye(de.size)
        oracle = de[:, None, None] * eye[None, :, :] - de[None, :, None] * eye[:, None, :]
        conf = max(conf, float(np.max(np.abs(oracle - d.T_lower))))
    ok = (res.identity_residual < 1e-8 and res.d_Omega_residual < 1e-4 and trace < 1e-10
          and flat.Psi == 0.0 and flat.Phi == 0.0 and conf < 1e-6)
    finish(8, ok, (
        f"power identity {res.identity_residual:.1e} (< 1e-8); d Omega {res.d_Omega_residual:.1e} (< 1e-4); "
        f"trace {trace:.1e} (< 1e-10); flat Psi={flat.Psi} Phi={flat.Phi}; conformal torsion {conf:.1e} (< 1e-6)"
    ))


def test_criterion_09_cutoff():
    rng = np.random.default_rng(SEED)
    X = TwistorProduct(build_flat_torus(1), build_affine(1, Polynomial.monomial(1, [2])))
    worst, spread, lowest = 0.0, 0.0, math.inf
    for _ in range(3):
        p = np.r_[rng.uniform(-0.5, 0.5, 4), 0.0, 0.0]
        margins = {}
        for t in (1.0, 2.0, 4.0):
            c = critical_cutoff_xi(X, t, p)
            worst = max(worst, c.residual)
            margins[t] = c.e_margin
        lowest = min(lowest, min(margins.values()))
        per_t = [margins[t] / t for t in margins]
        spread = max(spread, (max(per_t) - min(per_t)) / max(per_t))
    ok = worst < 1e-4 and lowest > 0 and spread < 1e-3
    finish(9, ok, f"expansion residual {worst:.2e} (< 1e-4); min E-margin {lowest:.3f} (> 0); margin/t spread {spread:.1e}")


def test_criterion_10_lemma2_search():
    rng = np.random.default_rng(SEED)
    pd, worst = True, 0.0
    for _ in range(100):
        Hs, Hps = random_lemma2_instance(rng, 2, 2)
        res = lemma2_search_c(Hs, Hps, 2)
        pd = pd and all(np.linalg.eigvalsh(H + res.c * Hp)[0] > 0 for H, Hp in zip(Hs, Hps))
        worst = max(worst, res.c / res.bound)
    finish(10, pd and worst <= 4.0, f"positive definite at all samples {pd}; max c/bound {worst:.2f} (<= 4)")


def test_criterion_11_nonkahler_witness():
    rng = np.random.default_rng(SEED)
    regular, critical = math.inf, math.inf
    for k in (1, 2):
        X = TwistorProduct(build_flat_torus(k), build_p1())
        regular = min(regular, nonkahler_witness(X, None, X.sample(rng, 5)).min_coefficient)
        Xc = TwistorProduct(build_flat_torus(k), build_affine(1, Polynomial.monomial(1, [2])))
        pts = [np.r_[rng.uniform(-0.5, 0.5, 4 * k), 0.0, 0.0] for _ in range(3)]
        critical = min(critical, nonkahler_witness(Xc, None, pts).min_coefficient)
    ok = regular > 0 and critical >= -1e-10
    finish(11, ok, f"min at regular points {regular:.3e} (> 0); min at critical points {critical:.1e} (>= -1e-10)")


def test_criterion_12_covers():
    trivial = []
    for lat in (hirzebruch_lattice(0), hirzebruch_lattice(1), hirzebruch_lattice(2), p1_lattice()):
        trivial.append(adjoint_cover_canonical(lat.K, -2 * lat.K).trivial)
    s0, p1 = hirzebruch_lattice(0), p1_lattice()
    odd = [adjoint_cover_canonical(s0.K, s0.divisor(d)) for d in ((3, 2), (2, 1), (1, 1))]
    odd.append(adjoint_cover_canonical(p1.K, p1.divisor([3])))
    none = all(r.L is None and r.K_cover is None for r in odd)
    finish(12, all(trivial) and none, f"trivial canonical class on 4 lattices {all(trivial)}; odd branch classes rejected {none}")
