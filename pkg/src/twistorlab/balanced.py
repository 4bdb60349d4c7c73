r"""Positivity toolkit and balanced-metric constructions on ``X = M × Q``.

Hermitian matrices of (1,1)-forms are written in a (1,0) coframe ``θ`` as
``φ = i Σ F[a, b] θ^a ∧ θ̄^b``; matrices of (m−1, m−1)-forms use
``M[a, b] = (ψ ∧ iθ^a ∧ θ̄^b) / vol``, so that
``φ^{m−1}/(m−1)!`` has matrix ``det(F) F^{−T}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    ContractError,
    CriticalPointError,
    PositivityError,
    SingularMatrixError,
    StructureError,
)
from .exterior import (
    AlternatingForm,
    PointEndomorphism,
    covector,
    dual_frame,
    form_from_hermitian,
    hermitian_matrix_11,
    hermitian_matrix_n1,
    is_positive_pp,
    one_zero_frame,
    orientation_volume,
    standard_structure,
    wedge,
)
from .fields import DiffConfig, FormField, _fd, dolbeault, dolbeault_field, exterior_d
from .qmodels import pullback_fs_matrix
from .twistor import TwistorProduct

__all__ = [
    "BalancedConfig",
    "michelsohn_forward",
    "michelsohn_inverse",
    "michelsohn_forward_matrix",
    "michelsohn_inverse_matrix",
    "xi_tilde_coefficients",
    "combine_xi_tilde",
    "xi_tilde_identity_residual",
    "ChernTorsionData",
    "chern_torsion",
    "torsion_forms",
    "torsion_identity_residuals",
    "trace_formula_residual",
    "balanced_hk",
    "BalancedHKResult",
    "balanced_submersion",
    "SubmersionResult",
    "critical_cutoff_xi",
    "CutoffResult",
    "restricted_hermitian",
    "lemma2_search_c",
    "Lemma2Result",
    "random_lemma2_instance",
    "nonkahler_witness",
    "NonKahlerResult",
    "delta_sign",
]


def delta_sign(r: int) -> int:
    """``(−1)^{δ_{2,r}}``: −1 when ``r = 2`` and +1 otherwise."""
    return -1 if r == 2 else 1


@dataclass(frozen=True)
class BalancedConfig:
    """Scale parameters of the balanced constructions.

    Attributes
    ----------
    t : float
        Weight of ``ω_Q`` in ``ω_M + t ω_Q``.
    gamma : float or None
        Constant of the submersion construction; ``None`` means start at 1
        and double until the positivity scalar clears ``gamma_margin``.
    t_prime : float
        Weight of the global correction term in the critical-point case.
    cutoff_t : float
        Exponent of ``(1 + |z¹|²)^t`` in the local cutoff form.
    """

    t: float = 1.0
    gamma: float | None = 10.0
    t_prime: float = 1.0
    cutoff_t: float = 1.0
    gamma_margin: float = 0.1
    tolerance: float = 1e-9

    def __post_init__(self):
        for name in ("t", "t_prime", "cutoff_t"):
            if not getattr(self, name) > 0:
                raise ContractError(f"{name} must be positive")
        if self.gamma is not None and not self.gamma > 0:
            raise ContractError("gamma must be positive")


# ---------------------------------------------------------------------------
# Michelsohn bijection


def _coframe(n: int, coframe=None) -> np.ndarray:
    if coframe is not None:
        return np.asarray(coframe, dtype=complex)
    rows = np.zeros((n, 2 * n), dtype=complex)
    for j in range(n):
        rows[j, 2 * j] = 1.0
        rows[j, 2 * j + 1] = 1j
    return rows


def _positive_matrix(H: np.ndarray, what: str):
    H = 0.5 * (H + H.conj().T)
    w, v = np.linalg.eigh(H)
    if w[0] <= 0:
        raise PositivityError(f"{what} is not positive definite (smallest eigenvalue {w[0]:.3e})", value=float(w[0]), witness=v[:, 0])
    return H


def michelsohn_forward_matrix(F: np.ndarray) -> np.ndarray:
    """``det(F) F^{−T}``, the matrix of ``φ^{n−1}/(n−1)!``."""
    F = np.asarray(F, dtype=complex)
    return np.linalg.det(F) * np.linalg.inv(F).T


def michelsohn_inverse_matrix(M: np.ndarray) -> np.ndarray:
    """``(det M)^{1/(n−1)} M^{−T}``."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    if n < 2:
        raise StructureError("the bijection needs complex dimension at least 2")
    det = np.linalg.det(M).real
    if abs(det) < 1e-14:
        raise SingularMatrixError("coefficient matrix of the (n-1,n-1)-form is singular")
    return det ** (1.0 / (n - 1)) * np.linalg.inv(M).T


def michelsohn_forward(phi: AlternatingForm, n: int, coframe=None) -> AlternatingForm:
    """``φ^{n−1}/(n−1)!`` for a positive definite (1,1)-form ``φ``.

    The input is checked against the structure of ``coframe`` (the standard
    ``dz`` coframe by default); a non-positive input raises
    :class:`PositivityError` carrying an eigenvector witness.
    """
    if phi.degree != 2 or phi.dimension != 2 * n:
        raise StructureError("input must be a 2-form on a space of real dimension 2n")
    theta = _coframe(n, coframe)
    _positive_matrix(hermitian_matrix_11(phi, theta), "input (1,1)-form")
    return phi.power(n - 1) / math.factorial(n - 1)


def michelsohn_inverse(psi: AlternatingForm, n: int, coframe=None) -> AlternatingForm:
    """The unique positive (1,1)-form ``ξ`` with ``ξ^{n−1}/(n−1)! = ψ``.

    ``ξ = i (det Ψ)^{1/(n−1)} Σ (Ψ^{−T})[k, l] θ^k ∧ θ̄^l`` where ``Ψ`` is the
    coefficient matrix of ``ψ``.
    """
    if psi.degree != 2 * n - 2 or psi.dimension != 2 * n:
        raise StructureError("input must be an (n-1,n-1)-form on a space of real dimension 2n")
    theta = _coframe(n, coframe)
    if n == 1:
        raise StructureError("the bijection needs complex dimension at least 2")
    M = hermitian_matrix_n1(psi, theta)
    if abs(np.linalg.det(M)) < 1e-14:
        raise SingularMatrixError("coefficient matrix of the (n-1,n-1)-form is singular")
    M = _positive_matrix(M, "input (n-1,n-1)-form")
    return form_from_hermitian(michelsohn_inverse_matrix(M), theta)


# ---------------------------------------------------------------------------
# ξ̃ combiner


def xi_tilde_coefficients(A: float, B: float, n: int, r: int) -> tuple[float, float]:
    """Coefficients ``(a, b)`` with ``(aφ + bϑ)^{N}/N! = Aφ^{n−1}∧ϑ^r + Bφ^n∧ϑ^{r−1}``, ``N = n + r − 1``."""
    if not (A > 0 and B > 0):
        raise ContractError("A and B must be positive")
    N = n + r - 1
    alpha = math.factorial(n - 1) * math.factorial(r) * A
    beta = math.factorial(r - 1) * math.factorial(n) * B
    a = alpha ** (-(r - 1) / N) * beta ** (r / N)
    b = alpha ** (n / N) * beta ** (-(n - 1) / N)
    return a, b


def combine_xi_tilde(A: float, B: float, phi: AlternatingForm, vartheta: AlternatingForm, n: int, r: int) -> AlternatingForm:
    """``ξ̃ = a φ + b ϑ`` for ``φ`` on the n-dimensional factor and ``ϑ`` on the r-dimensional one."""
    a, b = xi_tilde_coefficients(A, B, n, r)
    return a * phi + b * vartheta


def xi_tilde_identity_residual(A, B, phi, vartheta, n, r) -> float:
    xi = combine_xi_tilde(A, B, phi, vartheta, n, r)
    N = n + r - 1
    lhs = xi.power(N) / math.factorial(N)
    rhs = A * wedge(phi.power(n - 1), vartheta.power(r)) + B * wedge(phi.power(n), vartheta.power(r - 1))
    scale = max(1.0, rhs.norm())
    return (lhs - rhs).norm() / scale


# ---------------------------------------------------------------------------
# Chern connection torsion


@dataclass
class ChernTorsionData:
    """Chern connection data at a point in a holomorphic linear frame.

    ``g[i, j] = g_{i j̄}``, ``ginv[j, i] = g^{j̄ i}``,
    ``Gamma[i, j, k] = Γ_{ij}^k``, ``T[i, j, k] = T_{ij}^k`` and
    ``T_lower[i, j, l] = T_{i j l̄}``.

    ``Psi`` and ``Phi`` are the literal contractions
    ``|T|² − |tr T|²`` and ``g^{l̄i}g^{k̄j}(∂_k̄T_{ijl̄} − ∂_l̄T_{ijk̄}) − (i ↔ j)``.
    ``Psi_wedge = |tr T|² − |T|²/2`` and ``Phi_wedge = −Phi/4`` are the scalars
    for which ``r(r−1)(r−2) i∂ω∧∂̄ω∧ω^{r−3} = Psi_wedge ω^r`` and
    ``r(r−1) i∂∂̄ω∧ω^{r−2} = Phi_wedge ω^r`` hold.
    """

    point: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    Gamma: np.ndarray
    T: np.ndarray
    T_lower: np.ndarray
    Psi: float
    Phi: float
    Psi_wedge: float = 0.0
    Phi_wedge: float = 0.0
    frame: np.ndarray = field(repr=False, default=None)
    dT_lower_bar: np.ndarray = field(repr=False, default=None)


def _holomorphic_frame(dim: int, structure: PointEndomorphism | None, frame) -> np.ndarray:
    if frame is not None:
        return np.asarray(frame, dtype=complex)
    if structure is None:
        theta = _coframe(dim // 2)
    else:
        theta = one_zero_frame(structure)
    return dual_frame(theta)


def chern_torsion(
    metric: Callable[[np.ndarray], np.ndarray],
    point,
    chart=None,
    structure: PointEndomorphism | None = None,
    frame=None,
    metric_partials: Callable | None = None,
    config: DiffConfig | None = None,
) -> ChernTorsionData:
    r"""Christoffel symbols, torsion and the scalars ``Ψ`` and ``Φ``.

    Parameters
    ----------
    metric : callable
        Real Riemannian metric ``point -> (N, N)`` compatible with ``structure``.
    structure : PointEndomorphism, optional
        Constant complex structure; linear holomorphic coordinates ``w`` are
        taken from its (1,0) coframe.  Defaults to the standard structure with
        ``w_j = x_{2j} + i x_{2j+1}``.
    frame : array, optional
        Explicit ``(N, m)`` matrix whose columns are ``∂/∂w^i``.
    metric_partials : callable, optional
        Analytic ``(point, axis) -> ∂_axis metric``.
    """
    config = config or DiffConfig()
    p = np.asarray(point, dtype=float)
    dim = p.size
    V = _holomorphic_frame(dim, structure, frame)
    Vb = V.conj()
    if chart is None:
        from .fields import Chart

        chart = Chart.box(p - 1.0, p + 1.0)

    def gmat(x):
        return V.T @ np.asarray(metric(x), dtype=float) @ Vb

    def dg_real(x):
        if metric_partials is not None:
            return np.stack([V.T @ np.asarray(metric_partials(x, a), dtype=float) @ Vb for a in range(dim)])
        return np.stack([_fd(gmat, chart, x, a, config) for a in range(dim)])

    def torsion_lower(x):
        dg = np.tensordot(V, dg_real(x), axes=(0, 0))  # dg[i] = ∂_{w_i} g
        return dg, dg - np.transpose(dg, (1, 0, 2))  # Tl[i, j, l] = ∂_i g_{j l̄} − ∂_j g_{i l̄}

    g = gmat(p)
    lam = np.linalg.eigvalsh(0.5 * (g + g.conj().T))
    if lam[0] <= 0:
        raise SingularMatrixError(f"metric is not positive definite at {p.tolist()}")
    ginv = np.linalg.inv(g)
    dg, Tl = torsion_lower(p)
    Gamma = dg @ ginv
    T = Tl @ ginv
    tr = np.einsum("ipp->i", T)
    T2 = np.einsum("ji,qp,lk,ipl,jqk->", ginv, ginv, ginv, Tl, Tl.conj()).real
    t2 = np.einsum("ji,i,j->", ginv, tr, tr.conj()).real
    Psi = T2 - t2

    outer = config if metric_partials is not None else config.outer()
    dTl_real = np.stack([_fd(lambda x: torsion_lower(x)[1], chart, p, a, outer) for a in range(dim)])
    dTl_bar = np.tensordot(Vb, dTl_real, axes=(0, 0))  # dTl_bar[k, i, j, l] = ∂_k̄ T_{i j l̄}
    S = dTl_bar.transpose(1, 2, 0, 3) - dTl_bar.transpose(1, 2, 3, 0)  # S[i,j,k,l]
    Phi = np.einsum("li,kj,ijkl->", ginv, ginv, S) - np.einsum("lj,ki,ijkl->", ginv, ginv, S)
    Phi = float(Phi.real)
    return ChernTorsionData(p, g, ginv, Gamma, T, Tl, float(Psi), Phi, float(t2 - 0.5 * T2), -0.25 * Phi, V, dTl_bar)


def _coframe_from_frame(V: np.ndarray) -> np.ndarray:
    m = V.shape[1]
    return np.linalg.inv(np.hstack([V, V.conj()]))[:m]


def torsion_forms(data: ChernTorsionData) -> dict[str, AlternatingForm]:
    r"""``(i/2) T_{i j l̄} dw^i∧dw^j∧dw̄^l`` and ``(i/2) conj(T_{l j ī}) dw^i∧dw̄^j∧dw̄^l``."""
    theta = _coframe_from_frame(data.frame)
    m = theta.shape[0]
    dw = [covector(t) for t in theta]
    dwb = [w.conj() for w in dw]
    dim = theta.shape[1]
    dl = AlternatingForm(dim, 3)
    dbl = AlternatingForm(dim, 3)
    Tl = data.T_lower
    for i in range(m):
        for j in range(m):
            for l in range(m):
                if Tl[i, j, l] != 0:
                    dl = dl + (0.5j * Tl[i, j, l]) * wedge(wedge(dw[i], dw[j]), dwb[l])
                c = np.conj(Tl[l, j, i])
                if c != 0:
                    dbl = dbl + (0.5j * c) * wedge(wedge(dw[i], dwb[j]), dwb[l])
    return {"del": dl, "delbar": dbl}


def torsion_identity_residuals(
    metric: Callable[[np.ndarray], np.ndarray],
    point,
    chart,
    structure: PointEndomorphism | None = None,
    metric_partials: Callable | None = None,
    config: DiffConfig | None = None,
) -> dict[str, float]:
    """Compare ``∂ω``, ``∂̄ω`` and two scalar wedge identities with torsion data.

    ``ω = g(J·, ·)`` for a constant structure ``J`` (the standard one by
    default).  Returned entries: ``del_omega`` and ``delbar_omega`` are norms
    of the differences with the torsion expressions; ``torsion_ratio`` is
    ``r(r−1)(r−2) (i∂ω∧∂̄ω∧ω^{r−3}) / ω^r`` (only for ``r > 2``) and
    ``ddbar_ratio`` is ``r(r−1) (i∂∂̄ω∧ω^{r−2}) / ω^r``, to be compared with
    ``Psi`` and ``Phi``.
    """
    from .hypercomplex import two_form_from_matrix

    config = config or DiffConfig()
    p = np.asarray(point, dtype=float)
    dim = p.size
    J = structure if structure is not None else standard_structure(dim)
    J_field = lambda x: J  # noqa: E731
    w = FormField(chart, 2, lambda x: two_form_from_matrix(J.matrix.T @ np.asarray(metric(x), dtype=float)), config)
    data = chern_torsion(metric, p, chart, structure, None, metric_partials, config)
    forms = torsion_forms(data)
    r = dim // 2
    del_w = dolbeault(w, J_field, p, 1, 1, "del")
    delbar_w = dolbeault(w, J_field, p, 1, 1, "delbar")
    omega = w(p)
    vol = omega.power(r).top_coefficient()
    out = {
        "del_omega": (del_w - forms["del"]).norm(),
        "delbar_omega": (delbar_w - forms["delbar"]).norm(),
        "Phi": data.Phi,
        "Psi": data.Psi,
        "Phi_wedge": data.Phi_wedge,
        "Psi_wedge": data.Psi_wedge,
    }
    ddbar = dolbeault_field(dolbeault_field(w, J_field, 1, 1, "delbar"), J_field, 1, 2, "del")
    lhs = (1j * ddbar(p)) ^ omega.power(r - 2)
    out["ddbar_ratio"] = (lhs.top_coefficient() / vol).real * r * (r - 1)
    out["ddbar_residual"] = abs(out["ddbar_ratio"] - data.Phi)
    out["ddbar_wedge_residual"] = abs(out["ddbar_ratio"] - data.Phi_wedge)
    if r > 2:
        lhs3 = 1j * wedge(wedge(del_w, delbar_w), omega.power(r - 3))
        out["torsion_ratio"] = (lhs3.top_coefficient() / vol).real * r * (r - 1) * (r - 2)
        out["torsion_residual"] = abs(out["torsion_ratio"] - data.Psi)
        out["torsion_wedge_residual"] = abs(out["torsion_ratio"] - data.Psi_wedge)
    return out


def trace_formula_residual(g: np.ndarray, chi: np.ndarray, coframe) -> float:
    """``‖(tr_ω χ) ω^r − r χ ∧ ω^{r−1}‖`` relative to ``‖r χ ∧ ω^{r−1}‖`` (at least 1)."""
    g = np.asarray(g, dtype=complex)
    chi = np.asarray(chi, dtype=complex)
    r = g.shape[0]
    omega = form_from_hermitian(g, coframe)
    chif = form_from_hermitian(chi, coframe)
    tr = np.trace(chi @ np.linalg.inv(g))
    lhs = tr * omega.power(r)
    rhs = r * wedge(chif, omega.power(r - 1))
    return (lhs - rhs).norm() / max(1.0, rhs.norm())


# ---------------------------------------------------------------------------
# hyper-Kähler case


@dataclass
class BalancedHKResult:
    omega: FormField
    d_top_residual: float
    d_omega_min: float
    positive: bool
    min_eigenvalue: float
    per_point: list = field(default_factory=list)


def _require_flat(X: TwistorProduct):
    if X.M.kind != "flat_torus":
        raise ContractError("this construction needs the flat hyper-Kähler model for M")


def _require_closed_omega_Q(X: TwistorProduct, points, tol: float = 1e-6):
    wq = X.omega_Q_field()
    for p in points:
        res = exterior_d(wq, p).norm()
        if res > tol:
            raise ContractError(f"ω_Q is not closed at {np.asarray(p).tolist()} (|dω_Q| = {res:.3e})")


def balanced_hk(X: TwistorProduct, t: float, points) -> BalancedHKResult:
    """``ω = ω_M + t ω_Q`` on a flat hyper-Kähler M with a Kähler Q.

    Checks strict positivity relative to the structure of X, the residual of
    ``d(ω^{n+r−1})`` and the size of ``dω``.
    """
    if not t > 0:
        raise ContractError("t must be positive")
    _require_flat(X)
    _require_closed_omega_Q(X, points)
    omega = FormField(X.chart, 2, lambda p: X.omega_M(p) + t * X.omega_Q(p), X.config)
    N = X.n + X.r - 1
    top = omega.power(N)
    d_top, d_min, min_eig, pos = 0.0, math.inf, math.inf, True
    rows = []
    for p in points:
        res = is_positive_pp(omega(p), X.structure_at(p), strict=True)
        pos = pos and res.positive
        min_eig = min(min_eig, res.min_value)
        dt = exterior_d(top, p).norm()
        dw = exterior_d(omega, p).norm()
        d_top = max(d_top, dt)
        d_min = min(d_min, dw)
        rows.append({"point": np.asarray(p).tolist(), "d_top": dt, "d_omega": dw, "min_eigenvalue": res.min_value})
    return BalancedHKResult(omega, d_top, d_min, pos, min_eig, rows)


# ---------------------------------------------------------------------------
# submersion case


@dataclass
class SubmersionResult:
    Omega_X: FormField
    omega_X: FormField
    Omega_direct: FormField
    gamma: float
    convention: str
    identity_residual: float
    d_Omega_residual: float
    positivity_scalar_min: float
    per_point: list = field(default_factory=list)


def _m_torsion_scalars(X: TwistorProduct, point, convention: str = "stated") -> tuple[float, float]:
    m, _ = X.split(point)
    J_M = X.structure_M(point)
    data = chern_torsion(X.M.metric, m, X.M.chart, J_M, None, X.M.metric_partials, X.config)
    if convention == "stated":
        return data.Psi, data.Phi
    return data.Psi_wedge, data.Phi_wedge


def _correction(r: int, Psi: float, Phi: float, convention: str) -> float:
    if convention == "stated":
        return (Phi + 0.5 * (1 + delta_sign(r)) * Psi) / r
    return (Phi + (Psi if r > 2 else 0.0)) / r


def balanced_submersion(
    X: TwistorProduct,
    gamma: float | None,
    points,
    critical_tol: float = 1e-8,
    gamma_margin: float = 0.1,
    check_closed: bool = True,
    convention: str = "stated",
) -> SubmersionResult:
    r"""Explicit balanced metric when ``h`` is a submersion.

    ``Ω_X = S ω_M^r ∧ ω_Q^{n−1} + B ω_M^{r−1} ∧ ω_Q^n`` with
    ``S = γ + (Φ + ((1 + (−1)^{δ_{2,r}})/2) Ψ)/r`` and
    ``B = 2(r−1) tr_{ω_Q}(h*ω_{P¹}) / r``, and ``ω_X`` the ξ̃ combination of
    ``ω_Q`` and ``ω_M`` with ``ω_X^{n+r−1}/(n+r−1)! = Ω_X``.  The direct
    assembly ``γ ω_M^r ∧ ω_Q^{n−1} + (−1)^{δ_{2,r}} i∂∂̄ω_M^{r−1} ∧ ω_Q^{n−1}``
    is also returned as a field for comparison.

    ``gamma=None`` starts at 1 and doubles until ``S`` clears ``gamma_margin``
    at every sample; an explicit ``gamma`` with ``S ≤ 0`` somewhere raises
    :class:`PositivityError`.

    ``convention="corrected"`` uses ``S = γ + (Φ_w + Ψ_w)/r`` with the
    wedge-consistent torsion scalars, ``B = 2 tr_{ω_Q}(h*ω_{P¹})/n`` and no
    ``(−1)^{δ_{2,r}}`` factor in the direct assembly; with these values the
    closed form agrees with the direct assembly on the flat model.
    """
    if convention not in ("stated", "corrected"):
        raise ContractError("convention must be 'stated' or 'corrected'")
    r, n = X.r, X.n
    N = n + r - 1
    pts = [np.asarray(p, dtype=float) for p in points]
    for p in pts:
        _, q = X.split(p)
        _, dz, _ = X.Q.zeta_derivatives(q)
        if float(np.linalg.norm(dz)) <= critical_tol:
            raise CriticalPointError(
                f"dh vanishes at {p.tolist()}; use the critical-point cutoff construction", point=p
            )
    if check_closed:
        _require_closed_omega_Q(X, pts)
    torsion = [_m_torsion_scalars(X, p, convention) for p in pts]
    corr = [_correction(r, Psi, Phi, convention) for Psi, Phi in torsion]
    if gamma is None:
        gamma = 1.0
        while min(gamma + c for c in corr) < gamma_margin:
            gamma *= 2.0
    else:
        worst = min(gamma + c for c in corr) if corr else gamma
        if worst <= 0:
            raise PositivityError(f"gamma={gamma} leaves the positivity scalar at {worst:.3e}", value=worst)

    def coeffs(p):
        Psi, Phi = _m_torsion_scalars(X, p, convention)
        _, q = X.split(p)
        tr = X.Q.trace(pullback_fs_matrix(X.Q, q), q).real
        B = 2.0 * (r - 1) * tr / r if convention == "stated" else 2.0 * tr / n
        return gamma + _correction(r, Psi, Phi, convention), B

    def Omega(p):
        S, B = coeffs(p)
        wM, wQ = X.omega_M(p), X.omega_Q(p)
        return S * wedge(wM.power(r), wQ.power(n - 1)) + B * wedge(wM.power(r - 1), wQ.power(n))

    def omega_X(p):
        S, B = coeffs(p)
        return combine_xi_tilde(S, B, X.omega_Q(p), X.omega_M(p), n, r)

    Omega_f = FormField(X.chart, 2 * N, Omega, X.config)
    omega_f = FormField(X.chart, 2, omega_X, X.config)
    power = X.omega_M_power_field(r - 1)
    J = X.J_field()
    ddbar = dolbeault_field(dolbeault_field(power, J, r - 1, r - 1, "delbar"), J, r - 1, r, "del")

    def Omega_direct(p):
        wM, wQ = X.omega_M(p), X.omega_Q(p)
        sign = delta_sign(r) if convention == "stated" else 1
        return gamma * wedge(wM.power(r), wQ.power(n - 1)) + sign * wedge(1j * ddbar(p), wQ.power(n - 1))

    direct_f = FormField(X.chart, 2 * N, Omega_direct, X.config)

    ident, d_res, s_min = 0.0, 0.0, math.inf
    rows = []
    for p in pts:
        S, B = coeffs(p)
        s_min = min(s_min, S)
        Om = Omega_f(p)
        lhs = omega_f(p).power(N) / math.factorial(N)
        idr = (lhs - Om).norm() / max(1.0, Om.norm())
        dres = exterior_d(Omega_f, p).norm()
        ident = max(ident, idr)
        d_res = max(d_res, dres)
        rows.append({"point": p.tolist(), "S": S, "B": B, "identity": idr, "d_Omega": dres})
    return SubmersionResult(Omega_f, omega_f, direct_f, gamma, convention, ident, d_res, s_min, rows)


# ---------------------------------------------------------------------------
# critical-point cutoff


def restricted_hermitian(form: AlternatingForm, X: TwistorProduct, point, block: str) -> np.ndarray:
    """Hermitian form of an (N−1, N−1)-form of X on ``E`` or ``F``.

    ``Λ^{N−1}T^{1,0}X = E ⊕ F`` with ``E = Λ^{r−1}M ⊗ Λ^n Q`` (one M-direction
    omitted) and ``F = Λ^r M ⊗ Λ^{n−1} Q`` (one Q-direction omitted).  In the
    (1,0) coframe of X the form is represented by its (N−1, N−1) coefficient
    matrix; restriction to ``E`` or ``F`` is the corresponding principal block.
    """
    theta = np.vstack([c.array for c in X.one_zero_coframe(point)])
    M = hermitian_matrix_n1(form, theta)
    M = 0.5 * (M + M.conj().T)
    r = X.r
    if block == "E":
        return M[:r, :r]
    if block == "F":
        return M[r:, r:]
    raise ContractError("block must be 'E' or 'F'")


@dataclass
class CutoffResult:
    xi: AlternatingForm
    expansion: AlternatingForm
    residual: float
    e_block: np.ndarray
    e_margin: float
    t: float


def critical_cutoff_xi(X: TwistorProduct, t: float, point, slice_tol: float = 1e-12) -> CutoffResult:
    r"""``ξ = i∂∂̄((1 + |z¹|²)^t ω_M^{r−1})`` on the inner region where the cutoff is 1.

    The point must lie on ``{z¹ = 0}``.  Returns the direct nested evaluation,
    the expansion ``i t ω_M^{r−1}∧dz¹∧dz̄¹ + (−1)^{δ_{2,r}} 2(r−1) ω_M^{r−1}∧h*ω_{P¹}
    + i∂_M∂̄_M ω_M^{r−1}``, their distance, and the smallest eigenvalue of
    ``ξ ∧ ω_Q^{n−1}`` restricted to ``E``.
    """
    if t < 0:
        raise ContractError("cutoff exponent must be non-negative")
    p = X.chart.require(point)
    _, q = X.split(p)
    if abs(complex(q[0], q[1])) > slice_tol:
        raise ContractError(f"point is not on the critical slice z1 = 0 (|z1| = {abs(complex(q[0], q[1])):.3e})")
    r, n = X.r, X.n
    z0 = X.M.real_dimension
    weight = lambda x: (1.0 + x[z0] ** 2 + x[z0 + 1] ** 2) ** t  # noqa: E731
    pot = FormField(X.chart, 2 * (r - 1), lambda x: weight(x) * X.omega_M(x).power(r - 1), X.config)
    J = X.J_field()
    xi_field = dolbeault_field(dolbeault_field(pot, J, r - 1, r - 1, "delbar"), J, r - 1, r, "del")
    xi = 1j * xi_field(p)

    from .fields import dolbeault_M_field

    power = X.omega_M_power_field(r - 1)
    ddbar_M = dolbeault_M_field(dolbeault_M_field(power, X.J_M_field(), "delbar"), X.J_M_field(), "del")
    dz = np.zeros(X.real_dimension, dtype=complex)
    dz[z0], dz[z0 + 1] = 1.0, 1j
    dz1 = covector(dz)
    wM = X.omega_M(p).power(r - 1)
    expansion = (
        1j * t * wedge(wM, wedge(dz1, dz1.conj()))
        + (delta_sign(r) * 2.0 * (r - 1)) * wedge(wM, X.pullback_fs(p))
        + 1j * ddbar_M(p)
    )
    residual = (xi - expansion).norm()
    E = restricted_hermitian(wedge(xi, X.omega_Q(p).power(n - 1)), X, p, "E")
    margin = float(np.linalg.eigvalsh(E)[0])
    return CutoffResult(xi, expansion, residual, E, margin, t)


# ---------------------------------------------------------------------------
# positivity constant search


@dataclass
class Lemma2Result:
    c: float
    bound: float
    thresholds: list
    bounds: list
    iterations: int

    @property
    def threshold(self) -> float:
        return max(self.thresholds) if self.thresholds else 0.0


def _pd(H: np.ndarray, tol: float) -> bool:
    try:
        np.linalg.cholesky(0.5 * (H + H.conj().T) - tol * np.eye(H.shape[0]))
        return True
    except np.linalg.LinAlgError:
        return False


def lemma2_search_c(H_samples, Hp_samples, e_dim: int, tol: float = 1e-12, max_doublings: int = 200) -> Lemma2Result:
    r"""Smallest power of two ``c ≥ 1`` with ``H + cH'`` positive definite at all samples.

    ``E`` is spanned by the first ``e_dim`` basis vectors and ``F`` by the rest.
    Preconditions per sample: ``H|_E`` strictly positive, ``H'|_F`` strictly
    positive, and ``H'`` vanishes on ``E`` (``E ⊆ Ker H'``).

    For each sample the analytic bound is computed after normalising
    ``H|_E = Id`` and ``H'|_F = Id`` by Cholesky factors:
    ``Σ|H̃_{iα}|² + max(0, −λ_min(H̃_F))``, which reduces to the plain
    ``Σ|H_{iα}|²`` of the original argument when ``H_F ⪰ 0``.  The exact
    threshold ``λ_max(H̃_{FE} H̃_{EF} − H̃_F)`` is reported as well.
    """
    H_samples = [np.asarray(H, dtype=complex) for H in H_samples]
    Hp_samples = [np.asarray(H, dtype=complex) for H in Hp_samples]
    if len(H_samples) != len(Hp_samples):
        raise StructureError("H and H' sample lists differ in length")
    thresholds, bounds = [], []
    for s, (H, Hp) in enumerate(zip(H_samples, Hp_samples)):
        if H.shape != Hp.shape or H.shape[0] != H.shape[1] or not 0 < e_dim < H.shape[0]:
            raise StructureError(f"sample {s}: incompatible shapes or block split")
        scale = max(1.0, float(np.max(np.abs(H))), float(np.max(np.abs(Hp))))
        if np.max(np.abs(H - H.conj().T)) > 1e-9 * scale or np.max(np.abs(Hp - Hp.conj().T)) > 1e-9 * scale:
            raise ContractError(f"sample {s}: inputs must be Hermitian")
        HE, HEF, HF = H[:e_dim, :e_dim], H[:e_dim, e_dim:], H[e_dim:, e_dim:]
        if not _pd(HE, tol):
            raise PositivityError(f"sample {s}: H is not strictly positive on E", witness=s)
        if np.max(np.abs(Hp[:e_dim, :])) > 1e-9 * scale:
            raise ContractError(f"sample {s}: E is not contained in the kernel of H'")
        HpF = Hp[e_dim:, e_dim:]
        if not _pd(HpF, tol):
            raise PositivityError(f"sample {s}: H' is not strictly positive on F", witness=s)
        LE = np.linalg.cholesky(HE)
        LF = np.linalg.cholesky(HpF)
        LEi, LFi = np.linalg.inv(LE), np.linalg.inv(LF)
        X = LEi @ HEF @ LFi.conj().T
        HFn = LFi @ HF @ LFi.conj().T
        thresholds.append(float(np.linalg.eigvalsh(X.conj().T @ X - HFn)[-1]))
        bounds.append(float(np.sum(np.abs(X) ** 2) + max(0.0, -np.linalg.eigvalsh(HFn)[0])))
    c, it = 1.0, 0
    while not all(_pd(H + c * Hp, tol) for H, Hp in zip(H_samples, Hp_samples)):
        c *= 2.0
        it += 1
        if it > max_doublings:
            raise ContractError("no admissible c found")  # pragma: no cover
    return Lemma2Result(c, max(bounds) if bounds else 0.0, thresholds, bounds, it)


def random_lemma2_instance(rng: np.random.Generator, e_dim: int, f_dim: int, samples: int = 4):
    """Random admissible ``(H, H')`` sample lists with Gaussian entries."""
    n = e_dim + f_dim
    Hs, Hps = [], []
    for _ in range(samples):
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        H = 0.5 * (A + A.conj().T)
        B = rng.standard_normal((e_dim, e_dim)) + 1j * rng.standard_normal((e_dim, e_dim))
        H[:e_dim, :e_dim] = B @ B.conj().T + 0.1 * np.eye(e_dim)
        C = rng.standard_normal((f_dim, f_dim)) + 1j * rng.standard_normal((f_dim, f_dim))
        Hp = np.zeros((n, n), dtype=complex)
        Hp[e_dim:, e_dim:] = C @ C.conj().T + 0.1 * np.eye(f_dim)
        Hs.append(H)
        Hps.append(Hp)
    return Hs, Hps


# ---------------------------------------------------------------------------
# non-Kähler witness


@dataclass
class NonKahlerResult:
    min_coefficient: float
    values: list
    violations: list
    method: str


def nonkahler_witness(X: TwistorProduct, omega_X: FormField | None, points, method: str = "lemma",
                      tol: float = 1e-10) -> NonKahlerResult:
    r"""Oriented top coefficient of ``−(i∂∂̄ω_M) ∧ ω_X^{n+r−2}``.

    ``method="lemma"`` substitutes ``i∂∂̄ω_M = −2 h*ω_{P¹} ∧ ω_M``, valid for
    the flat model of M.  ``method="direct"`` evaluates ``i∂∂̄ω_M`` of X by
    nested differentiation relative to the structure of X.  Coefficients are
    divided by the orientation volume of the structure of X.  The default
    ``ω_X`` is ``ω_M + ω_Q``.
    """
    if omega_X is None:
        omega_X = FormField(X.chart, 2, lambda p: X.omega_M(p) + X.omega_Q(p), X.config)
    N = X.n + X.r
    if method == "lemma":
        _require_flat(X)
        ddbar = lambda p: -2.0 * wedge(X.pullback_fs(p), X.omega_M(p))  # noqa: E731
    elif method == "direct":
        J = X.J_field()
        field_ = dolbeault_field(dolbeault_field(X.omega_M_field(), J, 1, 1, "delbar"), J, 1, 2, "del")
        ddbar = lambda p: 1j * field_(p)  # noqa: E731
    else:
        raise ContractError("method must be 'lemma' or 'direct'")
    values, violations = [], []
    for p in points:
        J = X.structure_at(p)
        top = wedge(-ddbar(p), omega_X(p).power(N - 2))
        val = (top.top_coefficient() / orientation_volume(J)).real
        values.append(val)
        if val < -tol:
            violations.append({"point": np.asarray(p).tolist(), "value": val})
    return NonKahlerResult(min(values) if values else math.inf, values, violations, method)
