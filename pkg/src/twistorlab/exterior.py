r"""Pointwise complex exterior algebra on a real coordinate space :math:`\mathbb{R}^N`.

Forms are stored densely over the lexicographically ordered strictly increasing
index tuples of the real coordinates; complex covectors such as ``dz`` are built
from these, never stored as primitives, because the relevant complex structures
vary from point to point.

Sign conventions
----------------
* ``(dx^{i_1} \wedge \dots \wedge dx^{i_k})(\partial_{j_1}, \dots, \partial_{j_k})``
  is the determinant :math:`\det[\delta^{i_a}_{j_b}]`.
* An endomorphism ``J`` acts on covectors by precomposition,
  ``(J\varphi)(v) = \varphi(Jv)``; a covector is of type (1,0) when
  ``\varphi \circ J = i\varphi``.  This is the convention under which the dual of
  ``e, Ie, Je, Ke`` is ``e, -Ie, -Je, -Ke``.
* "Top coefficients" are always reported relative to the orientation induced by
  the complex structure, i.e. divided by the coefficient of
  :math:`\prod_a (i\theta^a\wedge\bar\theta^a)` for any (1,0) coframe
  :math:`\theta`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ContractError, NotHermitianError, StructureError

DEFAULT_TOL = 1e-9

__all__ = [
    "DEFAULT_TOL",
    "AlternatingForm",
    "PointEndomorphism",
    "HermitianMatrix",
    "HermitianOps",
    "PositivityResult",
    "wedge",
    "wedge_all",
    "act_on_one_form",
    "bidegree_project",
    "bidegree_components",
    "is_positive_pp",
    "hermitian_ops",
    "one_zero_frame",
    "dual_frame",
    "orientation_volume",
    "top_ratio",
    "hermitian_matrix_11",
    "hermitian_matrix_n1",
    "form_from_hermitian",
    "covector",
    "coordinate_covector",
    "dz",
    "dzbar",
    "standard_structure",
    "block_diagonal",
    "embed",
]


# ---------------------------------------------------------------------------
# index bookkeeping (cached per (dimension, degree))


@lru_cache(maxsize=None)
def _basis(dim: int, degree: int) -> tuple[tuple[int, ...], ...]:
    return tuple(combinations(range(dim), degree))


@lru_cache(maxsize=None)
def _index(dim: int, degree: int) -> dict[tuple[int, ...], int]:
    return {idx: n for n, idx in enumerate(_basis(dim, degree))}


@lru_cache(maxsize=None)
def _basis_array(dim: int, degree: int) -> np.ndarray:
    b = _basis(dim, degree)
    return np.array(b, dtype=np.intp).reshape(len(b), degree)


def _sort_sign(idx: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting ``idx``; 0 if an index repeats."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, ()
    sign = 1
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            if idx[i] > idx[j]:
                sign = -sign
    return sign, tuple(sorted(idx))


@lru_cache(maxsize=None)
def _wedge_table(dim: int, p: int, q: int):
    left, right = _basis(dim, p), _basis(dim, q)
    out_index = _index(dim, p + q)
    lmask = [sum(1 << i for i in I) for I in left]
    rmask = [sum(1 << j for j in J) for J in right]
    li, ri, oi, sg = [], [], [], []
    for a, I in enumerate(left):
        mI = lmask[a]
        for b, J in enumerate(right):
            mJ = rmask[b]
            if mI & mJ:
                continue
            # inversions: pairs (i in I, j in J) with i > j
            inv = sum(bin(mJ & ((1 << i) - 1)).count("1") for i in I)
            li.append(a)
            ri.append(b)
            oi.append(out_index[tuple(sorted(I + J))])
            sg.append(-1.0 if inv % 2 else 1.0)
    li = np.array(li, dtype=np.intp)
    ri = np.array(ri, dtype=np.intp)
    n_out = len(out_index)
    scatter = sp.csr_matrix(
        (np.array(sg), (np.array(oi, dtype=np.intp), np.arange(len(li)))),
        shape=(n_out, len(li)),
    )
    return li, ri, scatter


@lru_cache(maxsize=None)
def _derivation_table(dim: int, degree: int):
    """Sparse pattern of the derivation extending a covector endomorphism."""
    index = _index(dim, degree)
    tgt, src, rows, cols, sgn = [], [], [], [], []
    for n, I in enumerate(_basis(dim, degree)):
        for s, a in enumerate(I):
            for b in range(dim):
                if b != a and b in I:
                    continue
                new = I[:s] + (b,) + I[s + 1:]
                sign, key = _sort_sign(new)
                tgt.append(index[key])
                src.append(n)
                rows.append(a)
                cols.append(b)
                sgn.append(float(sign))
    return (
        np.array(tgt, dtype=np.intp),
        np.array(src, dtype=np.intp),
        np.array(rows, dtype=np.intp),
        np.array(cols, dtype=np.intp),
        np.array(sgn),
    )


# ---------------------------------------------------------------------------
# AlternatingForm


class AlternatingForm:
    """Complex-valued alternating tensor of fixed degree on :math:`\\mathbb{R}^N`.

    Parameters
    ----------
    dimension : int
        Real dimension ``N`` of the underlying coordinate space.
    degree : int
        Degree of the form.  Degrees above ``N`` are allowed and denote the
        canonical zero form (there are no index tuples to store).
    coefficients : array_like, optional
        Dense coefficient vector ordered like ``itertools.combinations``.

    Instances are immutable.
    """

    __slots__ = ("dimension", "degree", "_c")

    def __init__(self, dimension: int, degree: int, coefficients=None):
        if degree < 0 or dimension < 0:
            raise StructureError("dimension and degree must be non-negative")
        n = math.comb(dimension, degree) if degree <= dimension else 0
        if coefficients is None:
            c = np.zeros(n, dtype=complex)
        else:
            c = np.array(coefficients, dtype=complex).reshape(-1)
            if c.shape[0] != n:
                raise StructureError(
                    f"expected {n} coefficients for degree {degree} in dimension {dimension}, got {c.shape[0]}"
                )
        c.setflags(write=False)
        self.dimension = dimension
        self.degree = degree
        self._c = c

    # construction helpers -------------------------------------------------
    @classmethod
    def from_dict(cls, dimension: int, degree: int, mapping: Mapping[Sequence[int], complex]):
        """Build from ``{index tuple: coefficient}``; unsorted tuples are sign-corrected."""
        c = np.zeros(math.comb(dimension, degree) if degree <= dimension else 0, dtype=complex)
        index = _index(dimension, degree)
        for idx, value in mapping.items():
            idx = tuple(idx)
            if len(idx) != degree or any(i < 0 or i >= dimension for i in idx):
                raise StructureError(f"index tuple {idx} invalid for degree {degree}, dimension {dimension}")
            sign, key = _sort_sign(idx)
            if sign:
                c[index[key]] += sign * value
        return cls(dimension, degree, c)

    @classmethod
    def scalar(cls, dimension: int, value: complex = 1.0):
        return cls(dimension, 0, [value])

    @classmethod
    def zero(cls, dimension: int, degree: int):
        return cls(dimension, degree)

    # accessors ------------------------------------------------------------
    @property
    def array(self) -> np.ndarray:
        """Read-only dense coefficient vector."""
        return self._c

    @property
    def coefficients(self) -> dict[tuple[int, ...], complex]:
        """Nonzero coefficients keyed by strictly increasing index tuples."""
        basis = _basis(self.dimension, self.degree)
        return {basis[i]: complex(self._c[i]) for i in np.flatnonzero(self._c)}

    def __getitem__(self, idx) -> complex:
        sign, key = _sort_sign(tuple(idx))
        if not sign:
            return 0j
        return sign * complex(self._c[_index(self.dimension, self.degree)[key]])

    def norm(self) -> float:
        return float(np.linalg.norm(self._c))

    def is_zero(self, tol: float = DEFAULT_TOL) -> bool:
        return self._c.size == 0 or float(np.max(np.abs(self._c))) <= tol

    def allclose(self, other: "AlternatingForm", tol: float = DEFAULT_TOL) -> bool:
        self._check_compatible(other)
        return (self - other).is_zero(tol)

    def top_coefficient(self) -> complex:
        if self.degree != self.dimension:
            raise ContractError(f"top coefficient needs degree {self.dimension}, form has degree {self.degree}")
        return complex(self._c[0])

    def conj(self) -> "AlternatingForm":
        return AlternatingForm(self.dimension, self.degree, np.conj(self._c))

    @property
    def real(self) -> "AlternatingForm":
        return AlternatingForm(self.dimension, self.degree, self._c.real)

    @property
    def imag(self) -> "AlternatingForm":
        return AlternatingForm(self.dimension, self.degree, self._c.imag)

    def evaluate(self, *vectors) -> complex:
        """Evaluate on ``degree`` (possibly complex) tangent vectors."""
        if len(vectors) != self.degree:
            raise StructureError(f"need {self.degree} vectors, got {len(vectors)}")
        if self.degree == 0:
            return complex(self._c[0])
        V = np.column_stack([np.asarray(v, dtype=complex) for v in vectors])
        if V.shape[0] != self.dimension:
            raise StructureError("vector dimension mismatch")
        minors = np.linalg.det(V[_basis_array(self.dimension, self.degree)])
        return complex(np.dot(self._c, minors))

    def power(self, k: int) -> "AlternatingForm":
        out = AlternatingForm.scalar(self.dimension, 1.0)
        for _ in range(k):
            out = wedge(out, self)
        return out

    # arithmetic -----------------------------------------------------------
    def _check_compatible(self, other):
        if not isinstance(other, AlternatingForm):
            raise StructureError("operand is not an AlternatingForm")
        if other.dimension != self.dimension or other.degree != self.degree:
            raise StructureError(
                f"incompatible forms: (dim {self.dimension}, deg {self.degree}) vs "
                f"(dim {other.dimension}, deg {other.degree})"
            )

    def __add__(self, other):
        self._check_compatible(other)
        return AlternatingForm(self.dimension, self.degree, self._c + other._c)

    def __sub__(self, other):
        self._check_compatible(other)
        return AlternatingForm(self.dimension, self.degree, self._c - other._c)

    def __neg__(self):
        return AlternatingForm(self.dimension, self.degree, -self._c)

    def __mul__(self, scalar):
        if isinstance(scalar, AlternatingForm):
            return NotImplemented
        return AlternatingForm(self.dimension, self.degree, self._c * complex(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return AlternatingForm(self.dimension, self.degree, self._c / complex(scalar))

    def __xor__(self, other):
        return wedge(self, other)

    def __repr__(self):
        terms = ", ".join(f"{k}: {v:.6g}" for k, v in list(self.coefficients.items())[:8])
        more = "" if len(self.coefficients) <= 8 else ", ..."
        return f"AlternatingForm(dim={self.dimension}, deg={self.degree}, {{{terms}{more}}})"


def wedge(a: AlternatingForm, b: AlternatingForm) -> AlternatingForm:
    """Exterior product; beyond the top degree the result is the canonical zero."""
    if a.dimension != b.dimension:
        raise StructureError(f"wedge of forms on dimensions {a.dimension} and {b.dimension}")
    dim, p, q = a.dimension, a.degree, b.degree
    if p + q > dim:
        return AlternatingForm(dim, p + q)
    if p == 0:
        return AlternatingForm(dim, q, a.array[0] * b.array)
    if q == 0:
        return AlternatingForm(dim, p, b.array[0] * a.array)
    li, ri, scatter = _wedge_table(dim, p, q)
    return AlternatingForm(dim, p + q, scatter @ (a.array[li] * b.array[ri]))


def wedge_all(forms: Iterable[AlternatingForm], dimension: int | None = None) -> AlternatingForm:
    forms = list(forms)
    if not forms:
        if dimension is None:
            raise StructureError("empty wedge needs an explicit dimension")
        return AlternatingForm.scalar(dimension)
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


# ---------------------------------------------------------------------------
# covectors and coordinate helpers


def covector(coefficients) -> AlternatingForm:
    c = np.asarray(coefficients, dtype=complex).reshape(-1)
    return AlternatingForm(c.shape[0], 1, c)


def coordinate_covector(dimension: int, axis: int) -> AlternatingForm:
    c = np.zeros(dimension, dtype=complex)
    c[axis] = 1.0
    return AlternatingForm(dimension, 1, c)


def dz(dimension: int, j: int, offset: int = 0) -> AlternatingForm:
    """``dx + i dy`` for the j-th interleaved coordinate pair starting at ``offset``."""
    c = np.zeros(dimension, dtype=complex)
    c[offset + 2 * j] = 1.0
    c[offset + 2 * j + 1] = 1j
    return AlternatingForm(dimension, 1, c)


def dzbar(dimension: int, j: int, offset: int = 0) -> AlternatingForm:
    return dz(dimension, j, offset).conj()


def embed(form: AlternatingForm, dimension: int, axes: Sequence[int]) -> AlternatingForm:
    """Push a form on a coordinate block into a larger coordinate space."""
    axes = list(axes)
    if len(axes) != form.dimension:
        raise StructureError("embedding axes do not match the form dimension")
    if form.degree == 0:
        return AlternatingForm.scalar(dimension, form.array[0])
    out = np.zeros(math.comb(dimension, form.degree), dtype=complex)
    index = _index(dimension, form.degree)
    amap = np.asarray(axes)
    for n, I in enumerate(_basis(form.dimension, form.degree)):
        if form.array[n] != 0:
            sign, key = _sort_sign(tuple(amap[list(I)]))
            out[index[key]] += sign * form.array[n]
    return AlternatingForm(dimension, form.degree, out)


# ---------------------------------------------------------------------------
# endomorphisms


@dataclass(frozen=True)
class PointEndomorphism:
    """Real endomorphism of :math:`\\mathbb{R}^{2m}` at a point (columns are images of ∂_b)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise StructureError("endomorphism matrix must be square")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def square_residual(self) -> float:
        """``max|J^2 + Id|``; zero for a complex structure."""
        return float(np.max(np.abs(self.matrix @ self.matrix + np.eye(self.dimension))))

    def is_complex_structure(self, tol: float = DEFAULT_TOL) -> bool:
        return self.dimension % 2 == 0 and self.square_residual() <= tol

    def __matmul__(self, other):
        if isinstance(other, PointEndomorphism):
            return PointEndomorphism(self.matrix @ other.matrix)
        return self.matrix @ np.asarray(other)

    def __add__(self, other):
        return PointEndomorphism(self.matrix + other.matrix)

    def __sub__(self, other):
        return PointEndomorphism(self.matrix - other.matrix)

    def __mul__(self, scalar):
        return PointEndomorphism(float(scalar) * self.matrix)

    __rmul__ = __mul__

    def __neg__(self):
        return PointEndomorphism(-self.matrix)


def standard_structure(dimension: int) -> PointEndomorphism:
    """Standard structure on interleaved pairs: ``J ∂x = ∂y``, so ``dz`` is (1,0)."""
    if dimension % 2:
        raise StructureError("complex structures need even dimension")
    J = np.zeros((dimension, dimension))
    for j in range(0, dimension, 2):
        J[j + 1, j] = 1.0
        J[j, j + 1] = -1.0
    return PointEndomorphism(J)


def block_diagonal(*blocks: PointEndomorphism) -> PointEndomorphism:
    from scipy.linalg import block_diag

    return PointEndomorphism(block_diag(*[b.matrix for b in blocks]))


def _require_structure(J: PointEndomorphism, tol: float = DEFAULT_TOL):
    if not isinstance(J, PointEndomorphism):
        J = PointEndomorphism(J)
    if not J.is_complex_structure(max(tol, 1e-9)):
        raise ContractError(f"endomorphism is not a complex structure (|J^2+1| = {J.square_residual():.3e})")
    return J


def act_on_one_form(J: PointEndomorphism, phi: AlternatingForm) -> AlternatingForm:
    """The covector ``v ↦ phi(J v)``."""
    if phi.degree != 1:
        raise ContractError(f"act_on_one_form needs a 1-form, got degree {phi.degree}")
    if J.dimension != phi.dimension:
        raise StructureError("endomorphism and form dimensions differ")
    return AlternatingForm(phi.dimension, 1, phi.array @ J.matrix)


def _derivation(J: PointEndomorphism, degree: int) -> sp.csr_matrix:
    dim = J.dimension
    tgt, src, rows, cols, sgn = _derivation_table(dim, degree)
    n = math.comb(dim, degree)
    return sp.csr_matrix((sgn * J.matrix[rows, cols], (tgt, src)), shape=(n, n))


def _type_range(dim: int, degree: int) -> range:
    m = dim // 2
    return range(max(0, degree - m), min(degree, m) + 1)


def bidegree_project(form: AlternatingForm, J: PointEndomorphism, p: int, q: int) -> AlternatingForm:
    """Component of bidegree ``(p, q)`` relative to ``J``.

    Uses the spectral projector of the derivation extending ``φ ↦ φ∘J``, whose
    eigenvalue on (p,q)-forms is ``i(p - q)``.
    """
    if p + q != form.degree:
        raise ContractError(f"bidegree ({p},{q}) does not match degree {form.degree}")
    J = _require_structure(J)
    if J.dimension != form.dimension:
        raise StructureError("structure and form dimensions differ")
    dim, k = form.dimension, form.degree
    allowed = _type_range(dim, k)
    if p not in allowed:
        return AlternatingForm(dim, k)
    if k == 0 or len(allowed) == 1:
        return form
    D = _derivation(J, k)
    target = 1j * (p - q)
    v = form.array.astype(complex)
    for p2 in allowed:
        if p2 == p:
            continue
        lam = 1j * (2 * p2 - k)
        v = (D @ v - lam * v) / (target - lam)
    return AlternatingForm(dim, k, v)


def bidegree_components(form: AlternatingForm, J: PointEndomorphism) -> dict[tuple[int, int], AlternatingForm]:
    return {(p, form.degree - p): bidegree_project(form, J, p, form.degree - p) for p in _type_range(form.dimension, form.degree)}


# ---------------------------------------------------------------------------
# complex frames, orientation and Hermitian coefficient matrices


def one_zero_frame(J: PointEndomorphism) -> np.ndarray:
    """Orthonormal (in the Euclidean coordinate sense) basis of (1,0)-covectors, shape ``(m, N)``."""
    J = _require_structure(J)
    P = 0.5 * (np.eye(J.dimension) - 1j * J.matrix)  # row a is the (1,0) part of dx^a
    _, _, vh = np.linalg.svd(P)
    return vh[: J.dimension // 2]


def dual_frame(theta: np.ndarray) -> np.ndarray:
    """Vectors ``v_b`` with ``θ^a(v_b) = δ`` and ``θ̄^a(v_b) = 0``; shape ``(N, m)``."""
    theta = np.asarray(theta, dtype=complex)
    m = theta.shape[0]
    full = np.vstack([theta, np.conj(theta)])
    return np.linalg.inv(full)[:, :m]


def _as_theta(frame, dimension: int) -> np.ndarray:
    if isinstance(frame, PointEndomorphism):
        return one_zero_frame(frame)
    if isinstance(frame, (list, tuple)) and frame and isinstance(frame[0], AlternatingForm):
        return np.vstack([f.array for f in frame])
    theta = np.asarray(frame, dtype=complex)
    if theta.ndim != 2 or (dimension is not None and theta.shape[1] != dimension):
        raise StructureError("coframe has the wrong shape")
    return theta


def orientation_volume(frame, dimension: int | None = None) -> complex:
    r"""Top coefficient of :math:`\prod_a i\theta^a\wedge\bar\theta^a` (real, nonzero)."""
    if isinstance(frame, PointEndomorphism):
        dimension = frame.dimension
    theta = _as_theta(frame, dimension)
    dimension = theta.shape[1]
    vol = AlternatingForm.scalar(dimension)
    for row in theta:
        t = covector(row)
        vol = wedge(vol, 1j * wedge(t, t.conj()))
    return vol.top_coefficient()


def top_ratio(top_form: AlternatingForm, frame) -> complex:
    """Top coefficient relative to the complex orientation of ``frame``."""
    return top_form.top_coefficient() / orientation_volume(frame, top_form.dimension)


def hermitian_matrix_11(form: AlternatingForm, frame) -> np.ndarray:
    r"""Matrix :math:`G` with ``form = i Σ G[a,b] θ^a ∧ θ̄^b`` (exact for (1,1)-forms)."""
    if form.degree != 2:
        raise ContractError("hermitian_matrix_11 needs a 2-form")
    theta = _as_theta(frame, form.dimension)
    v = dual_frame(theta)
    m = theta.shape[0]
    G = np.empty((m, m), dtype=complex)
    for a in range(m):
        for b in range(m):
            G[a, b] = -1j * form.evaluate(v[:, a], np.conj(v[:, b]))
    return G


def hermitian_matrix_n1(form: AlternatingForm, frame) -> np.ndarray:
    r"""Matrix ``M[a,b] = (form ∧ iθ^a ∧ θ̄^b) / vol`` of an (m-1,m-1)-form.

    ``M[k, l]`` is the coefficient written :math:`\psi^{\bar l k}` in the usual
    hat-index expansion of an (m-1,m-1)-form.
    """
    if form.degree != form.dimension - 2:
        raise ContractError("hermitian_matrix_n1 needs a form of degree N-2")
    theta = _as_theta(frame, form.dimension)
    vol = orientation_volume(theta, form.dimension)
    m = theta.shape[0]
    cov = [covector(t) for t in theta]
    M = np.empty((m, m), dtype=complex)
    for a in range(m):
        for b in range(m):
            M[a, b] = wedge(form, 1j * wedge(cov[a], cov[b].conj())).top_coefficient() / vol
    return M


def form_from_hermitian(matrix, frame, dimension: int | None = None) -> AlternatingForm:
    """``i Σ G[a,b] θ^a ∧ θ̄^b`` for a coframe ``θ``."""
    G = np.asarray(matrix, dtype=complex)
    if isinstance(frame, PointEndomorphism):
        dimension = frame.dimension
    theta = _as_theta(frame, dimension)
    dim = theta.shape[1]
    out = AlternatingForm(dim, 2)
    cov = [covector(t) for t in theta]
    for a in range(G.shape[0]):
        for b in range(G.shape[1]):
            if G[a, b] != 0:
                out = out + (1j * G[a, b]) * wedge(cov[a], cov[b].conj())
    return out


# ---------------------------------------------------------------------------
# Hermitian matrices


@dataclass(frozen=True)
class HermitianMatrix:
    entries: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        e = np.array(self.entries, dtype=complex)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise StructureError("Hermitian matrix must be square")
        err = float(np.max(np.abs(e - e.conj().T))) if e.size else 0.0
        if err > self.tol * max(1.0, float(np.max(np.abs(e))) if e.size else 1.0):
            raise NotHermitianError(f"matrix is not conjugate-symmetric (max deviation {err:.3e})")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def size(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class HermitianOps:
    det: float
    inverse: HermitianMatrix | None
    is_positive_definite: bool
    leading_minors: tuple[float, ...]
    singular: bool


def hermitian_ops(M, tol: float = DEFAULT_TOL) -> HermitianOps:
    """Determinant, inverse and leading-minor positive definiteness test.

    A singular input yields ``inverse=None`` and ``singular=True``; a
    non-Hermitian input raises :class:`NotHermitianError`.
    """
    if not isinstance(M, HermitianMatrix):
        M = HermitianMatrix(M, tol)
    e = M.entries
    minors = tuple(float(np.linalg.det(e[:k, :k]).real) for k in range(1, M.size + 1))
    det = minors[-1] if minors else 1.0
    scale = max(1.0, float(np.max(np.abs(e)))) ** M.size
    singular = abs(det) <= tol * scale
    inverse = None
    if not singular:
        inv = np.linalg.inv(e)
        inverse = HermitianMatrix(0.5 * (inv + inv.conj().T), tol=max(tol, 1e-8))
    pd = all(m > tol for m in minors)
    return HermitianOps(det, inverse, pd, minors, singular)


# ---------------------------------------------------------------------------
# positivity


@dataclass
class PositivityResult:
    positive: bool
    min_value: float
    witness: dict | None = None
    matrix: np.ndarray | None = field(default=None, repr=False)

    def __bool__(self):
        return self.positive


def is_positive_pp(
    form: AlternatingForm,
    J: PointEndomorphism,
    trials: int = 64,
    strict: bool = False,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    frame=None,
) -> PositivityResult:
    r"""Test positivity of a (p,p)-form relative to ``J``.

    Random trials wedge with ``iγ_1∧γ̄_1 ∧ … ∧ iγ_{m-p}∧γ̄_{m-p}`` for (1,0)
    covectors with standard normal complex coordinates in a unitary (1,0)
    frame and check the oriented top coefficient.  For degrees (1,1) and
    (m-1,m-1) the Hermitian coefficient matrix is also tested; semi-definite
    by eigenvalues, definite by leading principal minors.
    """
    J = _require_structure(J)
    dim = form.dimension
    m = dim // 2
    if form.degree % 2:
        raise ContractError("a (p,p)-form must have even degree")
    p = form.degree // 2
    projected = bidegree_project(form, J, p, p)
    if not (form - projected).is_zero(max(tol, 1e-9) * max(1.0, form.norm())):
        raise ContractError(f"form is not of bidegree ({p},{p}) relative to the given structure")
    theta = one_zero_frame(J) if frame is None else _as_theta(frame, dim)
    vol = orientation_volume(theta, dim)

    min_value = math.inf
    matrix = None
    if p in (1, m - 1) and m >= 1 and 0 < p < m:
        matrix = hermitian_matrix_11(form, theta) if p == 1 else hermitian_matrix_n1(form, theta)
        matrix = 0.5 * (matrix + matrix.conj().T)
        w, vecs = np.linalg.eigh(matrix)
        min_value = float(w[0])
        if strict:
            ok = hermitian_ops(matrix, tol=max(tol, 1e-8)).is_positive_definite and w[0] > tol
        else:
            ok = w[0] >= -tol
        if not ok:
            return PositivityResult(False, min_value, {"kind": "eigen", "value": float(w[0]), "coordinates": vecs[:, 0]}, matrix)

    if p == m:
        value = (form.top_coefficient() / vol).real
        ok = value > tol if strict else value >= -tol
        return PositivityResult(ok, float(value), None if ok else {"kind": "top", "value": float(value)}, matrix)

    rng = np.random.default_rng(seed)
    for _ in range(trials):
        coeffs = rng.standard_normal((m - p, m)) + 1j * rng.standard_normal((m - p, m))
        out = form
        for c in coeffs:
            g = covector(c @ theta)
            out = wedge(out, 1j * wedge(g, g.conj()))
        value = (out.top_coefficient() / vol).real
        min_value = min(min_value, float(value))
        ok = value > tol if strict else value >= -tol
        if not ok:
            return PositivityResult(False, float(value), {"kind": "trial", "value": float(value), "covectors": coeffs @ theta}, matrix)
    return PositivityResult(True, min_value, None, matrix)
