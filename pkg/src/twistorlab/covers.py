"""Divisor-class arithmetic for branched double covers of ``X = M × Q``.

With M a complex torus (trivial canonical class) the Picard lattice is
modelled by classes pulled back from Q.  A double cover branched along ``D``
exists at the lattice level when ``D = 2L``; its canonical class is the
pullback of ``K_X + L``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError

__all__ = [
    "PicardLattice",
    "DivisorClass",
    "CoverResult",
    "hirzebruch_lattice",
    "p1_lattice",
    "lattice_by_name",
    "intersect",
    "adjoint_cover_canonical",
    "cy_check",
]


@dataclass(frozen=True)
class PicardLattice:
    """Integral lattice with a symmetric intersection form and a canonical class.

    Attributes
    ----------
    name : str
    intersection : tuple of tuple of int
        Symmetric ``rank × rank`` matrix.
    canonical : tuple of int
        Coordinates of ``K``.
    labels : tuple of str
        Basis names.
    """

    name: str
    intersection: tuple
    canonical: tuple
    labels: tuple

    def __post_init__(self):
        M = np.asarray(self.intersection, dtype=np.int64)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ContractError("intersection matrix must be square")
        if not np.array_equal(M, M.T):
            raise ContractError("intersection matrix must be symmetric")
        if len(self.canonical) != M.shape[0] or len(self.labels) != M.shape[0]:
            raise ContractError("canonical class and labels must match the rank")

    @property
    def rank(self) -> int:
        return len(self.labels)

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.intersection, dtype=np.int64)

    def divisor(self, coordinates) -> "DivisorClass":
        return DivisorClass(self, tuple(int(c) for c in coordinates))

    @property
    def K(self) -> "DivisorClass":
        return self.divisor(self.canonical)

    def zero(self) -> "DivisorClass":
        return self.divisor([0] * self.rank)


@dataclass(frozen=True)
class DivisorClass:
    """Integer coordinates of a divisor class in a :class:`PicardLattice` basis."""

    lattice: PicardLattice
    coordinates: tuple

    def __post_init__(self):
        if len(self.coordinates) != self.lattice.rank:
            raise ContractError(
                f"class has {len(self.coordinates)} coordinates but the lattice has rank {self.lattice.rank}"
            )
        for c in self.coordinates:
            if int(c) != c:
                raise ContractError("divisor coordinates must be integers")

    def _check(self, other: "DivisorClass"):
        if other.lattice != self.lattice:
            raise ContractError(f"lattice mismatch: {self.lattice.name} vs {other.lattice.name}")

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        self._check(other)
        return DivisorClass(self.lattice, tuple(a + b for a, b in zip(self.coordinates, other.coordinates)))

    def __sub__(self, other: "DivisorClass") -> "DivisorClass":
        return self + (-other)

    def __neg__(self) -> "DivisorClass":
        return DivisorClass(self.lattice, tuple(-a for a in self.coordinates))

    def __mul__(self, k: int) -> "DivisorClass":
        return DivisorClass(self.lattice, tuple(int(k) * a for a in self.coordinates))

    __rmul__ = __mul__

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coordinates)

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.coordinates) + ")"


def hirzebruch_lattice(n: int) -> PicardLattice:
    """``Σ_n`` with basis ``(e, f)``: ``e² = −n``, ``e·f = 1``, ``f² = 0``, ``K = −2e − (n+2)f``.

    For ``n = 0`` this is ``P¹ × P¹`` with the two rulings.
    """
    if n < 0:
        raise ContractError("Hirzebruch index must be non-negative")
    return PicardLattice(f"sigma{n}", ((-n, 1), (1, 0)), (-2, -(n + 2)), ("e", "f"))


def p1_lattice() -> PicardLattice:
    """``P¹`` with the point class: self-intersection 0 (degree pairing on a curve) and ``K = −2``."""
    return PicardLattice("p1", ((0,),), (-2,), ("pt",))


def lattice_by_name(name: str) -> PicardLattice:
    """``"p1"``, ``"p1xp1"`` or ``"sigmaN"`` for a non-negative integer ``N``."""
    key = name.lower().replace("_", "")
    if key == "p1":
        return p1_lattice()
    if key in ("p1xp1", "sigma0"):
        return hirzebruch_lattice(0)
    if key.startswith("sigma") and key[5:].isdigit():
        return hirzebruch_lattice(int(key[5:]))
    raise ContractError(f"unknown lattice {name!r}")


def intersect(a: DivisorClass, b: DivisorClass) -> int:
    """``aᵀ M b`` in exact integer arithmetic."""
    a._check(b)
    M = a.lattice.intersection
    return int(sum(a.coordinates[i] * M[i][j] * b.coordinates[j] for i in range(len(M)) for j in range(len(M))))


@dataclass(frozen=True)
class CoverResult:
    """Outcome of the adjunction computation.

    ``L`` and ``K_cover`` are ``None`` when ``D`` is not divisible by two;
    ``obstruction`` then names the first odd coordinate.
    """

    L: DivisorClass | None
    K_cover: DivisorClass | None
    obstruction: str | None = None

    @property
    def exists(self) -> bool:
        return self.L is not None

    @property
    def trivial(self) -> bool:
        return self.K_cover is not None and self.K_cover.is_zero


def adjoint_cover_canonical(K_X: DivisorClass, D: DivisorClass) -> CoverResult:
    """Square root ``L = D/2`` and the canonical class ``K_X + L`` of the double cover.

    ``K_cover`` is reported in the coordinates of the base lattice; the cover's
    class is its pullback.
    """
    K_X._check(D)
    for i, c in enumerate(D.coordinates):
        if c % 2:
            label = D.lattice.labels[i]
            return CoverResult(None, None, f"coordinate {i} ({label}) of D is odd ({c})")
    L = DivisorClass(D.lattice, tuple(c // 2 for c in D.coordinates))
    return CoverResult(L, K_X + L)


def cy_check(K_X: DivisorClass, D: DivisorClass) -> bool:
    """True iff ``D = −2K_X``, which makes the cover's canonical class trivial."""
    K_X._check(D)
    return D == -2 * K_X
