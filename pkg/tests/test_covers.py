import pytest

from twistorlab.covers import (
    PicardLattice,
    adjoint_cover_canonical,
    cy_check,
    hirzebruch_lattice,
    intersect,
    lattice_by_name,
    p1_lattice,
)
from twistorlab.errors import ContractError

LATTICES = ["p1", "sigma0", "sigma1", "sigma2", "sigma3"]


@pytest.mark.parametrize("name", LATTICES)
def test_anticanonical_branch_gives_trivial_class(name):
    lat = lattice_by_name(name)
    D = -2 * lat.K
    res = adjoint_cover_canonical(lat.K, D)
    assert res.exists and res.trivial
    assert res.L == -lat.K
    assert cy_check(lat.K, D)


def test_canonical_classes():
    assert p1_lattice().K.coordinates == (-2,)
    assert hirzebruch_lattice(0).K.coordinates == (-2, -2)
    assert hirzebruch_lattice(2).K.coordinates == (-2, -4)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_canonical_self_intersection(n):
    lat = hirzebruch_lattice(n)
    assert intersect(lat.K, lat.K) == 8


def test_intersection_basis():
    lat = hirzebruch_lattice(2)
    e, f = lat.divisor([1, 0]), lat.divisor([0, 1])
    assert (intersect(e, e), intersect(e, f), intersect(f, f)) == (-2, 1, 0)


def test_intersection_is_bilinear():
    lat = hirzebruch_lattice(1)
    a, b, c = lat.divisor([1, 2]), lat.divisor([-3, 1]), lat.divisor([2, -5])
    assert intersect(a + b, c) == intersect(a, c) + intersect(b, c)
    assert intersect(3 * a, c) == 3 * intersect(a, c)
    assert intersect(a, b) == intersect(b, a)


def test_parity_obstruction():
    lat = lattice_by_name("p1xp1")
    res = adjoint_cover_canonical(lat.K, lat.divisor([3, 2]))
    assert not res.exists and not res.trivial
    assert res.L is None and res.K_cover is None
    assert "odd" in res.obstruction
    res = adjoint_cover_canonical(p1_lattice().K, p1_lattice().divisor([1]))
    assert res.K_cover is None


def test_non_trivial_cover():
    lat = hirzebruch_lattice(1)
    res = adjoint_cover_canonical(lat.K, lat.divisor([2, 2]))
    assert res.exists and not res.trivial
    assert res.K_cover.coordinates == (-1, -2)
    assert not cy_check(lat.K, lat.divisor([2, 2]))


def test_lattice_mismatch():
    with pytest.raises(ContractError, match="mismatch"):
        hirzebruch_lattice(1).K + hirzebruch_lattice(2).K
    with pytest.raises(ContractError):
        intersect(p1_lattice().K, hirzebruch_lattice(0).K)


def test_lattice_validation():
    with pytest.raises(ContractError):
        PicardLattice("bad", ((0, 1), (2, 0)), (0, 0), ("a", "b"))
    with pytest.raises(ContractError):
        hirzebruch_lattice(-1)
    with pytest.raises(ContractError):
        lattice_by_name("p2")
    with pytest.raises(ContractError):
        p1_lattice().divisor([1, 2])


def test_divisor_arithmetic():
    lat = hirzebruch_lattice(0)
    a = lat.divisor([1, -1])
    assert (a - a).is_zero
    assert (a + lat.zero()) == a
    assert str(-a) == "(-1, 1)"
