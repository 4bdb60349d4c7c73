r"""The product ``X = M × Q`` with the twisted almost-complex structure.

At a point ``(m, z)`` with ``ζ = h(z)`` and ``(a, b, c)`` the sphere triple of
``ζ``, the M-block of the structure is ``I_M = aI + bJ + cK`` and the Q-block
is the standard structure of the Q chart.  Coordinates on X list the M axes
first, then the Q axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ContractError
from .exterior import (
    AlternatingForm,
    PointEndomorphism,
    act_on_one_form,
    bidegree_project,
    block_diagonal,
    covector,
    embed,
    wedge,
)
from .fields import (
    Chart,
    DiffConfig,
    FormField,
    dolbeault_field,
    dolbeault_M_field,
    dolbeault_Q_field,
    split_d,
)
from .hypercomplex import HypercomplexModel
from .qmodels import QModel, pullback_fs, sigma_coefficients, sphere_point

__all__ = [
    "TwistorProduct",
    "LemmaResult",
    "LEMMA_IDENTITIES",
    "LEMMA_TOLERANCES",
    "verify_lemma_identity",
    "nijenhuis",
    "nijenhuis_residual",
    "structural_vanishing_residual",
]

LEMMA_IDENTITIES = ("0120q", "1002q", "1111q", "11n1q", "fq")
LEMMA_TOLERANCES = {"0120q": 1e-6, "1002q": 1e-6, "1111q": 1e-5, "11n1q": 1e-4, "fq": 1e-4}


@dataclass(frozen=True)
class TwistorProduct:
    """``X = M × Q`` with derived fields ``ω_M``, ``σ_M`` and the structure ``İ``."""

    M: HypercomplexModel
    Q: QModel
    config: DiffConfig = field(default_factory=DiffConfig)

    @property
    def chart(self) -> Chart:
        return Chart.product(self.M.chart, self.Q.chart)

    @property
    def r(self) -> int:
        return self.M.r

    @property
    def n(self) -> int:
        return self.Q.n

    @property
    def real_dimension(self) -> int:
        return self.M.real_dimension + self.Q.real_dimension

    @property
    def m_axes(self) -> list[int]:
        return list(range(self.M.real_dimension))

    @property
    def q_axes(self) -> list[int]:
        return list(range(self.M.real_dimension, self.real_dimension))

    def with_config(self, config: DiffConfig) -> "TwistorProduct":
        return replace(self, config=config)

    def split(self, point) -> tuple[np.ndarray, np.ndarray]:
        p = np.asarray(point, dtype=float)
        d = self.M.real_dimension
        return p[:d], p[d:]

    def sample(self, rng: np.random.Generator, count: int, margin: float = 0.05) -> np.ndarray:
        m = self.M.chart.sample(rng, count, margin=margin)
        q = self.Q.sample(rng, count, margin=margin)
        return np.hstack([m, q])

    # pointwise data ---------------------------------------------------------
    def zeta(self, point) -> complex:
        return self.Q.h._eval(self.split(point)[1])

    def triple(self, point) -> np.ndarray:
        return sphere_point(self.zeta(point))

    def structure_M(self, point) -> PointEndomorphism:
        m, _ = self.split(point)
        return self.M.structure(self.triple(point), m)

    def structure_at(self, point) -> PointEndomorphism:
        """Block-diagonal ``(I_M, I_Q)``."""
        self.chart.require(point)
        _, q = self.split(point)
        return block_diagonal(self.structure_M(point), self.Q.structure(q))

    def flipped_structure_at(self, point) -> PointEndomorphism:
        """``(I_M, −I_Q)``; separates the M-bidegree from the Q-bidegree."""
        _, q = self.split(point)
        return block_diagonal(self.structure_M(point), -self.Q.structure(q))

    def _embed_M(self, form: AlternatingForm) -> AlternatingForm:
        return embed(form, self.real_dimension, self.m_axes)

    def _embed_Q(self, form: AlternatingForm) -> AlternatingForm:
        return embed(form, self.real_dimension, self.q_axes)

    def omega_M(self, point) -> AlternatingForm:
        r"""``ω_M = g(I_M ·, ·) = a ω_I + b ω_J + c ω_K``."""
        m, _ = self.split(point)
        ff = self.M.fundamental_forms(m)
        a, b, c = self.triple(point)
        return self._embed_M(a * ff["I"] + b * ff["J"] + c * ff["K"])

    def sigma_M(self, point) -> AlternatingForm:
        m, _ = self.split(point)
        ff = self.M.fundamental_forms(m)
        s = sigma_coefficients(self.zeta(point))
        return self._embed_M(s[0] * ff["I"] + s[1] * ff["J"] + s[2] * ff["K"])

    def omega_Q(self, point) -> AlternatingForm:
        return self._embed_Q(self.Q.omega(self.split(point)[1]))

    def pullback_fs(self, point) -> AlternatingForm:
        return self._embed_Q(pullback_fs(self.Q, self.split(point)[1]))

    def dzeta_bar(self, point) -> AlternatingForm:
        """``∂̄_Q ζ̄ = Σ conj(∂ζ/∂z_j) dz̄_j`` embedded in X."""
        _, q = self.split(point)
        _, dz, _ = self.Q.zeta_derivatives(q)
        row = np.zeros(self.Q.real_dimension, dtype=complex)
        for j, v in enumerate(np.conj(dz)):
            row[2 * j] += v
            row[2 * j + 1] += -1j * v
        return self._embed_Q(covector(row))

    # fields -------------------------------------------------------------------
    def _field(self, degree, fn) -> FormField:
        return FormField(self.chart, degree, lambda p: fn(p), self.config)

    def omega_M_field(self) -> FormField:
        return self._field(2, self.omega_M)

    def sigma_M_field(self) -> FormField:
        return self._field(2, self.sigma_M)

    def omega_Q_field(self) -> FormField:
        return self._field(2, self.omega_Q)

    def omega_M_power_field(self, k: int) -> FormField:
        return self._field(2 * k, lambda p: self.omega_M(p).power(k))

    def J_M_field(self):
        return lambda p: self.structure_M(p)

    def J_field(self):
        return lambda p: self.structure_at(p)

    # (1,0) coframe ------------------------------------------------------------
    def one_zero_coframe(self, point, tol: float = 1e-9) -> list[AlternatingForm]:
        """``φ^i − ζ Kφ^i`` for the (1,0) coordinate coframe of ``I`` on M, then ``dz^j``."""
        m, q = self.split(point)
        zeta = self.zeta(point)
        K = self.M.structures(m)["K"]
        dm = self.M.real_dimension
        out = []
        for j in range(dm // 2):
            c = np.zeros(dm, dtype=complex)
            c[2 * j] = 1.0
            c[2 * j + 1] = 1j
            phi = covector(c)
            out.append(self._embed_M(phi - zeta * act_on_one_form(K, phi)))
        for j in range(self.n):
            c = np.zeros(self.Q.real_dimension, dtype=complex)
            c[2 * j] = 1.0
            c[2 * j + 1] = 1j
            out.append(self._embed_Q(covector(c)))
        rows = np.vstack([f.array for f in out])
        full = np.vstack([rows, rows.conj()])
        if np.linalg.matrix_rank(full, tol=tol) < self.real_dimension:
            raise ContractError("coframe is degenerate at this point")
        return out


# ---------------------------------------------------------------------------
# Nijenhuis tensor


def _structure_derivatives(X: TwistorProduct, point, config: DiffConfig) -> np.ndarray:
    from .fields import _fd

    p = X.chart.require(point)
    return np.stack([_fd(lambda q: X.structure_at(q).matrix, X.chart, p, a, config) for a in range(p.size)])


def nijenhuis(X: TwistorProduct, point, V, W, dJ: np.ndarray | None = None) -> np.ndarray:
    """``N(V, W) = [JV, JW] − J[JV, W] − J[V, JW] − [V, W]`` for constant fields ``V``, ``W``.

    With constant coefficients the brackets reduce to
    ``(∂_{JV}J)W − (∂_{JW}J)V + J(∂_W J)V − J(∂_V J)W``.
    """
    V = np.asarray(V, dtype=float)
    W = np.asarray(W, dtype=float)
    J = X.structure_at(point).matrix
    if dJ is None:
        dJ = _structure_derivatives(X, point, X.config)

    def along(u):
        return np.tensordot(u, dJ, axes=(0, 0))

    JV, JW = J @ V, J @ W
    return along(JV) @ W - along(JW) @ V + J @ (along(W) @ V) - J @ (along(V) @ W)


def nijenhuis_residual(X: TwistorProduct, points, pairs_per_point: int = 1, seed: int = 0) -> float:
    """Largest ``‖N(V, W)‖`` over random unit vector pairs at the given points."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for p in points:
        dJ = _structure_derivatives(X, p, X.config)
        for _ in range(pairs_per_point):
            V = rng.standard_normal(X.real_dimension)
            W = rng.standard_normal(X.real_dimension)
            V /= np.linalg.norm(V)
            W /= np.linalg.norm(W)
            worst = max(worst, float(np.linalg.norm(nijenhuis(X, p, V, W, dJ))))
    return worst


# ---------------------------------------------------------------------------
# Lemma identities


@dataclass
class LemmaResult:
    """Outcome of one identity sweep.

    ``fitted_coefficient`` is the least-squares coefficient of
    ``h*ω_{P¹} ∧ ω_M^{r-1}`` (or ``∧ ω_M`` for ``1111q``) in the computed
    left-hand side, reported next to the coefficient the identity asserts.
    """

    identity: str
    max_residual: float
    residuals: list
    tolerance: float
    expected_coefficient: float | None = None
    fitted_coefficients: list = field(default_factory=list)
    fit_residuals: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance

    @property
    def fitted_coefficient(self) -> float | None:
        vals = [c for c in self.fitted_coefficients if c is not None]
        return float(np.median(vals)) if vals else None


def _fit(lhs: AlternatingForm, basis: AlternatingForm):
    bb = float(np.vdot(basis.array, basis.array).real)
    if bb < 1e-24:
        return None
    return complex(np.vdot(basis.array, lhs.array) / bb).real


def _type_residual(form: AlternatingForm, X: TwistorProduct, point, total, flipped) -> float:
    a = form - bidegree_project(form, X.structure_at(point), *total)
    b = form - bidegree_project(form, X.flipped_structure_at(point), *flipped)
    return max(a.norm(), b.norm())


def verify_lemma_identity(
    X: TwistorProduct,
    identity: str,
    points,
    tolerance: float | None = None,
    coefficient: float | None = None,
) -> LemmaResult:
    """Maximum residual norm of one identity of the basic lemma over ``points``.

    * ``0120q``: ``∂̄_Q ω_M`` lies in ``Λ^{0,1}Q ⊗ Λ^{2,0}M``, tested as vanishing
      of the complementary bidegree components for ``(I_M, I_Q)`` and for
      ``(I_M, −I_Q)``.
    * ``1002q``: the conjugate statement for ``∂_Q ω_M``.
    * ``1111q``: ``i ∂_Q ∂̄_Q ω_M = −2 h*ω_{P¹} ∧ ω_M``.
    * ``11n1q``: ``i ∂_Q ω_M ∧ ∂̄_Q ω_M ∧ ω_M^{r−3} = (4/(r−2)) h*ω_{P¹} ∧ ω_M^{r−1}``.
    * ``fq``: ``i ∂∂̄ ω_M^{r−1} = i ∂_M ∂̄_M ω_M^{r−1} + 2(r−1) h*ω_{P¹} ∧ ω_M^{r−1}``
      with ``∂, ∂̄`` of X taken relative to the full structure.

    ``coefficient`` replaces the asserted scalar in the last three
    identities; the default is the coefficient as stated above.
    """
    if identity not in LEMMA_IDENTITIES:
        raise ContractError(f"unknown identity {identity!r}; choose from {LEMMA_IDENTITIES}")
    r = X.r
    if identity in ("11n1q", "fq") and r <= 2:
        raise ContractError(f"identity {identity} holds for r > 2 only (here r = {r}); use k >= 2")
    tol = LEMMA_TOLERANCES[identity] if tolerance is None else tolerance
    wM = X.omega_M_field()
    residuals, fits, fit_res = [], [], []
    expected = None

    def record(lhs, basis):
        residuals.append((lhs - expected * basis).norm())
        c = _fit(lhs, basis)
        fits.append(c)
        fit_res.append(None if c is None else (lhs - c * basis).norm())

    if identity in ("0120q", "1002q"):
        key = "dQ_01" if identity == "0120q" else "dQ_10"
        total = (2, 1) if identity == "0120q" else (1, 2)
        flipped = (3, 0) if identity == "0120q" else (0, 3)
        for p in points:
            form = split_d(wM, p)[key]
            residuals.append(_type_residual(form, X, p, total, flipped))
    elif identity == "1111q":
        expected = -2.0 if coefficient is None else float(coefficient)
        inner = dolbeault_Q_field(wM, "delbar")
        outer = dolbeault_Q_field(inner, "del")
        for p in points:
            lhs = 1j * outer(p)
            basis = wedge(X.pullback_fs(p), X.omega_M(p))
            record(lhs, basis)
    elif identity == "11n1q":
        expected = 4.0 / (r - 2) if coefficient is None else float(coefficient)
        d10 = dolbeault_Q_field(wM, "del")
        d01 = dolbeault_Q_field(wM, "delbar")
        for p in points:
            w = X.omega_M(p)
            lhs = 1j * wedge(wedge(d10(p), d01(p)), w.power(r - 3))
            basis = wedge(X.pullback_fs(p), w.power(r - 1))
            record(lhs, basis)
    else:  # fq
        expected = 2.0 * (r - 1) if coefficient is None else float(coefficient)
        power = X.omega_M_power_field(r - 1)
        J = X.J_field()
        ddbar = dolbeault_field(dolbeault_field(power, J, r - 1, r - 1, "delbar"), J, r - 1, r, "del")
        ddbar_M = dolbeault_M_field(dolbeault_M_field(power, X.J_M_field(), "delbar"), X.J_M_field(), "del")
        for p in points:
            lhs = 1j * ddbar(p) - 1j * ddbar_M(p)
            basis = wedge(X.pullback_fs(p), X.omega_M(p).power(r - 1))
            record(lhs, basis)
    return LemmaResult(identity, float(max(residuals)) if residuals else 0.0, residuals, tol, expected, fits, fit_res)


def structural_vanishing_residual(X: TwistorProduct, points, seed: int = 0) -> float:
    """Norm of ``β ∧ ω_M^{r−2}`` for random ``β ∈ Λ^{0,1}Q ⊗ Λ^{3,0}M``.

    The M-part of the product would have bidegree ``(r+1, r−2)``, which
    exceeds the complex dimension, so the result must vanish.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    r = X.r
    if r < 3:
        # Λ^{3,0}M is already zero; the statement is vacuous
        return 0.0
    for p in points:
        frame = X.one_zero_coframe(p)
        m_frame, q_frame = frame[:r], frame[r:]
        beta = AlternatingForm(X.real_dimension, 4)
        for _ in range(3):
            idx = rng.choice(r, size=3, replace=False)
            c = complex(rng.standard_normal(), rng.standard_normal())
            term = wedge(wedge(m_frame[idx[0]], m_frame[idx[1]]), m_frame[idx[2]])
            beta = beta + c * wedge(q_frame[0].conj(), term)
        worst = max(worst, wedge(beta, X.omega_M(p).power(r - 2)).norm())
    return worst
