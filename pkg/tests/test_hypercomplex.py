import numpy as np
import pytest

from twistorlab.errors import ChartError, ContractError
from twistorlab.exterior import bidegree_project, is_positive_pp, wedge
from twistorlab.fields import exterior_d
from twistorlab.hypercomplex import (
    QUATERNION_I,
    QUATERNION_J,
    QUATERNION_K,
    HypercomplexModel,
    build_flat_torus,
    build_hopf_chart,
)


def test_quaternion_matrices():
    eye = np.eye(4)
    for A in (QUATERNION_I, QUATERNION_J, QUATERNION_K):
        assert np.array_equal(A @ A, -eye)
    assert np.array_equal(QUATERNION_I @ QUATERNION_J, QUATERNION_K)
    assert np.array_equal(QUATERNION_J @ QUATERNION_K, QUATERNION_I)
    assert np.array_equal(QUATERNION_K @ QUATERNION_I, QUATERNION_J)


@pytest.mark.parametrize("builder,k", [(build_flat_torus, 1), (build_flat_torus, 2), (build_hopf_chart, 1)])
def test_relations_and_compatibility(builder, k, rng):
    M = builder(k)
    for p in M.chart.sample(rng, 20):
        assert M.quaternion_residual(p) < 1e-12
        assert M.compatibility_residual(p) < 1e-12


@pytest.mark.parametrize("builder,k", [(build_flat_torus, 1), (build_flat_torus, 2), (build_hopf_chart, 1)])
def test_frame_expressions_match_metric_forms(builder, k, rng):
    M = builder(k)
    for p in M.chart.sample(rng, 10):
        direct = M.fundamental_forms(p)
        frame = M.frame_forms(p)
        for name in "IJK":
            assert (direct[name] - frame[name]).norm() < 1e-10


def test_flat_fundamental_form_coefficients():
    f = build_flat_torus(1).fundamental_forms(np.zeros(4))
    assert f["I"].coefficients == pytest.approx({(0, 1): 1, (2, 3): 1})
    assert f["J"].coefficients == pytest.approx({(0, 2): 1, (1, 3): -1})
    assert f["K"].coefficients == pytest.approx({(0, 3): 1, (1, 2): 1})


def test_forms_are_antisymmetric_and_match_metric(rng):
    M = build_hopf_chart(1)
    p = M.chart.sample(rng, 1)[0]
    G = M.metric_at(p)
    forms = M.fundamental_forms(p)
    for name, A in M.structures(p).items():
        X, Y = rng.standard_normal(4), rng.standard_normal(4)
        assert forms[name].evaluate(X, Y) == pytest.approx(-forms[name].evaluate(Y, X))
        assert forms[name].evaluate(X, Y) == pytest.approx((A.matrix @ X) @ G @ Y)


def test_omega_i_square_is_positive_top_form():
    wI = build_flat_torus(1).fundamental_forms(np.zeros(4))["I"]
    assert wedge(wI, wI).top_coefficient().real == pytest.approx(2.0)


def test_type_of_fundamental_forms(rng):
    M = build_flat_torus(1)
    p = M.chart.sample(rng, 1)[0]
    f = M.fundamental_forms(p)
    I = M.structures(p)["I"]
    assert is_positive_pp(f["I"], I, strict=True).positive
    sigma = f["J"] + 1j * f["K"]
    assert (bidegree_project(sigma, I, 2, 0) - sigma).norm() < 1e-12


def test_flat_forms_closed_and_hopf_forms_not(rng):
    flat = build_flat_torus(1)
    hopf = build_hopf_chart(1)
    p = flat.chart.sample(rng, 1)[0]
    for name in "IJK":
        assert exterior_d(flat.omega_field(name), p).norm() < 1e-12
        assert exterior_d(hopf.omega_field(name), [1.0, 0, 0, 0]).norm() > 0.1


def test_hopf_chart_excludes_origin():
    hopf = build_hopf_chart(1)
    with pytest.raises(ChartError):
        hopf.metric_at(np.zeros(4))


def test_incompatible_metric_rejected():
    flat = build_flat_torus(1)
    bad = HypercomplexModel(flat.chart, 1, lambda p: np.diag([1.0, 2.0, 1.0, 1.0]), "flat_torus")
    with pytest.raises(ContractError):
        bad.fundamental_forms(np.zeros(4))
