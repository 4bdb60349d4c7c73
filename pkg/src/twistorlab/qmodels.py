"""Target manifolds Q with Kähler metrics and maps ``h: Q → P¹``, plus the twistor sphere map.

A point of a Q chart is the real vector ``(x_0, y_0, x_1, y_1, ...)`` with
``z_j = x_j + i y_j``; Hermitian metric matrices are written in the
``dz`` coframe, ``ω_Q = i Σ g[j, k] dz_j ∧ dz̄_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ContractError, PositivityError, StructureError
from .exterior import (
    AlternatingForm,
    PointEndomorphism,
    covector,
    form_from_hermitian,
    standard_structure,
    wedge,
)
from .fields import Chart, DiffConfig, FormField, ScalarField, _fd

__all__ = [
    "twistor_sphere_map",
    "sphere_point",
    "sigma_coefficients",
    "Polynomial",
    "QModel",
    "build_p1",
    "build_p1xp1",
    "build_hirzebruch",
    "build_affine",
    "pullback_fs",
    "pullback_fs_matrix",
    "check_holomorphic",
    "complex_coordinates",
]


def twistor_sphere_map(Z1: complex, Z2: complex) -> np.ndarray:
    """The map ``[Z1, Z2] ↦ (a, b, c)`` whose orientation is opposite to the usual one.

    ``a = (|Z2|² − |Z1|²)/N``, ``b = (Z1 Z̄2 + Z̄1 Z2)/N``,
    ``c = i(Z̄1 Z2 − Z1 Z̄2)/N`` with ``N = |Z1|² + |Z2|²``.

    The standard map differs by the coordinate permutation
    ``(b, c, −a)``; it is not used by any computation.
    """
    Z1, Z2 = complex(Z1), complex(Z2)
    N = abs(Z1) ** 2 + abs(Z2) ** 2
    if N == 0.0:
        raise ContractError("[0, 0] is not a point of P1")
    a = (abs(Z2) ** 2 - abs(Z1) ** 2) / N
    b = (Z1 * Z2.conjugate() + Z1.conjugate() * Z2).real / N
    c = (1j * (Z1.conjugate() * Z2 - Z1 * Z2.conjugate())).real / N
    return np.array([a, b, c])


def sphere_point(zeta: complex) -> np.ndarray:
    """``twistor_sphere_map(ζ, 1)`` for the affine coordinate ``ζ = Z1/Z2``."""
    return twistor_sphere_map(zeta, 1.0)


def sigma_coefficients(zeta: complex) -> np.ndarray:
    """``∂_ζ̄`` of the sphere triple: ``(−2ζ, 1 − ζ², i(1 + ζ²)) / (1 + |ζ|²)²``."""
    zeta = complex(zeta)
    d = (1.0 + abs(zeta) ** 2) ** 2
    return np.array([-2.0 * zeta, 1.0 - zeta**2, 1j * (1.0 + zeta**2)]) / d


def complex_coordinates(point) -> np.ndarray:
    p = np.asarray(point, dtype=float)
    return p[0::2] + 1j * p[1::2]


# ---------------------------------------------------------------------------
# polynomial maps


@dataclass(frozen=True)
class Polynomial:
    """Polynomial in ``z`` and ``z̄`` with exact partial derivatives.

    ``terms`` is a tuple of ``(coefficient, z_exponents, zbar_exponents)``.
    """

    n: int
    terms: tuple

    def __post_init__(self):
        clean = []
        for c, ez, ezb in self.terms:
            ez, ezb = tuple(int(e) for e in ez), tuple(int(e) for e in ezb)
            if len(ez) != self.n or len(ezb) != self.n or min(ez + ezb, default=0) < 0:
                raise StructureError("exponent vectors must be non-negative with one entry per variable")
            clean.append((complex(c), ez, ezb))
        object.__setattr__(self, "terms", tuple(clean))

    @classmethod
    def coordinate(cls, n: int, j: int = 0) -> "Polynomial":
        e = [0] * n
        e[j] = 1
        return cls(n, ((1.0, tuple(e), (0,) * n),))

    @classmethod
    def monomial(cls, n: int, z_exp, zbar_exp=None, coefficient: complex = 1.0) -> "Polynomial":
        return cls(n, ((coefficient, tuple(z_exp), tuple(zbar_exp or (0,) * n)),))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if other.n != self.n:
            raise StructureError("polynomials in different numbers of variables")
        return Polynomial(self.n, self.terms + other.terms)

    @property
    def is_holomorphic(self) -> bool:
        return all(not any(ezb) for c, _, ezb in self.terms if c != 0)

    @property
    def is_constant(self) -> bool:
        return all(not any(ez) and not any(ezb) for c, ez, ezb in self.terms if c != 0)

    def __call__(self, z) -> complex:
        z = np.asarray(z, dtype=complex)
        zb = np.conj(z)
        return complex(sum(c * np.prod(z**np.array(ez)) * np.prod(zb**np.array(ezb)) for c, ez, ezb in self.terms))

    def _derivative(self, j: int, bar: bool) -> "Polynomial":
        out = []
        for c, ez, ezb in self.terms:
            e = list(ezb if bar else ez)
            if e[j] == 0:
                continue
            coef = c * e[j]
            e[j] -= 1
            out.append((coef, ez, tuple(e)) if bar else (coef, tuple(e), ezb))
        return Polynomial(self.n, tuple(out))

    def dz(self, j: int) -> "Polynomial":
        return self._derivative(j, False)

    def dzbar(self, j: int) -> "Polynomial":
        return self._derivative(j, True)

    def scalar_field(self, chart: Chart, config: DiffConfig | None = None) -> ScalarField:
        """As a field of the real chart coordinates with analytic partials."""
        dz = [self.dz(j) for j in range(self.n)]
        dzb = [self.dzbar(j) for j in range(self.n)]

        def partials(p, axis):
            z = complex_coordinates(p)
            j, is_y = divmod(axis, 2)
            a, b = dz[j](z), dzb[j](z)
            return 1j * (a - b) if is_y else a + b

        return ScalarField(chart, lambda p: self(complex_coordinates(p)), partials, config)

    def describe(self) -> str:
        parts = []
        for c, ez, ezb in self.terms:
            mono = "".join(f"z{j+1}^{e}" for j, e in enumerate(ez) if e) + "".join(
                f"zbar{j+1}^{e}" for j, e in enumerate(ezb) if e
            )
            parts.append(f"({c:g}){mono or '1'}")
        return " + ".join(parts) or "0"


# ---------------------------------------------------------------------------
# QModel


@dataclass(frozen=True)
class QModel:
    """Chart on Q with a Kähler metric and a map ``ζ = h(z)``.

    Attributes
    ----------
    chart : Chart
        Real chart of dimension ``2n``.
    n : int
        Complex dimension.
    metric : callable
        ``point -> (n, n)`` Hermitian matrix in the ``dz`` coframe.
    h : ScalarField
        The affine coordinate ``ζ`` of ``h``.
    kind : str
    holomorphic : bool
        False only for models deliberately tagged non-holomorphic.
    sample_lower, sample_upper : tuple
        Sub-box used for random sampling.
    potential : callable, optional
        Kähler potential, used as an independent oracle in tests.
    """

    chart: Chart
    n: int
    metric: Callable[[np.ndarray], np.ndarray]
    h: ScalarField
    kind: str
    holomorphic: bool = True
    sample_lower: tuple = ()
    sample_upper: tuple = ()
    potential: Callable | None = None
    h_polynomial: Polynomial | None = None
    config: DiffConfig = field(default_factory=DiffConfig)

    @property
    def real_dimension(self) -> int:
        return 2 * self.n

    def structure(self, point=None) -> PointEndomorphism:
        return standard_structure(2 * self.n)

    def dz_coframe(self) -> np.ndarray:
        rows = np.zeros((self.n, 2 * self.n), dtype=complex)
        for j in range(self.n):
            rows[j, 2 * j] = 1.0
            rows[j, 2 * j + 1] = 1j
        return rows

    def metric_at(self, point) -> np.ndarray:
        return np.asarray(self.metric(self.chart.require(point)), dtype=complex)

    def omega(self, point) -> AlternatingForm:
        return form_from_hermitian(self.metric_at(point), self.dz_coframe())

    def omega_field(self) -> FormField:
        return FormField(self.chart, 2, self.omega, self.config)

    def zeta(self, point) -> complex:
        return self.h(point)

    def zeta_derivatives(self, point) -> tuple[complex, np.ndarray, np.ndarray]:
        """``ζ``, ``∂ζ/∂z_j`` and ``∂ζ/∂z̄_j`` at a point."""
        g = self.h.gradient(point)
        gx, gy = g[0::2], g[1::2]
        return self.h(point), 0.5 * (gx - 1j * gy), 0.5 * (gx + 1j * gy)

    def sample(self, rng: np.random.Generator, count: int, margin: float = 0.05) -> np.ndarray:
        return self.chart.sample(rng, count, self.sample_lower or None, self.sample_upper or None, margin)

    def trace(self, chi: np.ndarray, point) -> complex:
        """``tr_{ω_Q} χ = Σ g^{k̄ j} χ[j, k]`` for a matrix in the ``dz`` coframe."""
        return complex(np.sum(np.linalg.inv(self.metric_at(point)).T * chi))


def _single_chart(n: int, half_width: float, labels=None) -> Chart:
    labels = labels or tuple(f"{c}{j+1}" for j in range(n) for c in ("x", "y"))
    return Chart.box([-half_width] * (2 * n), [half_width] * (2 * n), labels)


def _fs_factor(z: complex) -> float:
    return 1.0 / (1.0 + abs(z) ** 2) ** 2


def _h_field(h, n: int, chart: Chart, config) -> tuple[ScalarField, Polynomial | None, bool]:
    if isinstance(h, Polynomial):
        if h.n != n:
            raise StructureError("polynomial h has the wrong number of variables")
        return h.scalar_field(chart, config), h, h.is_holomorphic
    if isinstance(h, ScalarField):
        return h, None, True
    raise StructureError("h must be a Polynomial or ScalarField")


def build_p1(h: Polynomial | None = None, holomorphic: bool | None = None, config: DiffConfig | None = None,
             sample_half_width: float = 1.0) -> QModel:
    """Affine chart of P¹ with the Fubini–Study form ``i dζ∧dζ̄/(1+|ζ|²)²``; default ``h = id``."""
    config = config or DiffConfig()
    chart = _single_chart(1, 10.0, ("x", "y"))
    hf, poly, hol = _h_field(h if h is not None else Polynomial.coordinate(1), 1, chart, config)

    def metric(p):
        return np.array([[_fs_factor(complex(p[0], p[1]))]], dtype=complex)

    return QModel(
        chart, 1, metric, hf, "p1",
        hol if holomorphic is None else holomorphic,
        (-sample_half_width,) * 2, (sample_half_width,) * 2,
        potential=lambda p: math.log(1.0 + p[0] ** 2 + p[1] ** 2),
        h_polynomial=poly, config=config,
    )


def build_p1xp1(config: DiffConfig | None = None, sample_half_width: float = 1.0) -> QModel:
    """Product of two affine P¹ charts with product Fubini–Study; ``h`` is the first projection."""
    config = config or DiffConfig()
    chart = _single_chart(2, 10.0)
    poly = Polynomial.coordinate(2, 0)
    hf = poly.scalar_field(chart, config)

    def metric(p):
        return np.diag([_fs_factor(complex(p[0], p[1])), _fs_factor(complex(p[2], p[3]))]).astype(complex)

    return QModel(
        chart, 2, metric, hf, "p1xp1", True,
        (-sample_half_width,) * 4, (sample_half_width,) * 4,
        potential=lambda p: math.log(1.0 + p[0] ** 2 + p[1] ** 2) + math.log(1.0 + p[2] ** 2 + p[3] ** 2),
        h_polynomial=poly, config=config,
    )


def hirzebruch_metric(n: int, s: float, z: complex, w: complex) -> np.ndarray:
    """``∂∂̄`` of ``s log u + log(1 + uⁿ|w|²)`` with ``u = 1 + |z|²``, in the ``(dz, dw)`` coframe."""
    u = 1.0 + abs(z) ** 2
    W = abs(w) ** 2
    R = 1.0 + u**n * W
    g_ww = u**n / R**2
    g_zz = s / u**2
    if n:
        g_zz += n * W * u ** (n - 2) * (u + (n - 1) * abs(z) ** 2) / R - n**2 * u ** (2 * n - 2) * abs(z) ** 2 * W**2 / R**2
    g_zw = n * u ** (n - 1) * z.conjugate() * w / R**2 if n else 0.0
    return np.array([[g_zz, g_zw], [np.conj(g_zw), g_ww]], dtype=complex)


def build_hirzebruch(n: int = 1, s: float = 1.0, config: DiffConfig | None = None,
                     sample_half_width: float = 1.0, check_points: int = 64, seed: int = 0) -> QModel:
    """Chart ``(z, w)`` of the Hirzebruch surface Σ_n with a Calabi-type potential.

    ``h(z, w) = z``.  Strict positivity of the metric is verified on
    ``check_points`` random points of the sample box; a failure raises
    :class:`PositivityError` naming the point.
    """
    if n < 0:
        raise StructureError("Hirzebruch index must be non-negative")
    if not s > 0:
        raise ContractError("Kähler parameter s must be positive")
    config = config or DiffConfig()
    chart = Chart.box([-10.0] * 4, [10.0] * 4, ("x_z", "y_z", "x_w", "y_w"))
    poly = Polynomial.coordinate(2, 0)
    hf = poly.scalar_field(chart, config)

    def metric(p):
        return hirzebruch_metric(n, s, complex(p[0], p[1]), complex(p[2], p[3]))

    def potential(p):
        u = 1.0 + p[0] ** 2 + p[1] ** 2
        return s * math.log(u) + math.log(1.0 + u**n * (p[2] ** 2 + p[3] ** 2))

    model = QModel(
        chart, 2, metric, hf, f"hirzebruch({n},{s:g})", True,
        (-sample_half_width,) * 4, (sample_half_width,) * 4,
        potential=potential, h_polynomial=poly, config=config,
    )
    rng = np.random.default_rng(seed)
    for p in np.vstack([np.zeros((1, 4)), model.sample(rng, check_points)]):
        lam = float(np.linalg.eigvalsh(metric(p))[0])
        if lam <= 0:
            raise PositivityError(
                f"Hirzebruch metric with s={s} is not positive at {p.tolist()} (eigenvalue {lam:.3e})",
                value=lam, witness=p,
            )
    return model


def build_affine(n: int, h: Polynomial, holomorphic: bool | None = None, config: DiffConfig | None = None,
                 sample_half_width: float = 1.0) -> QModel:
    """``Cⁿ`` with the flat metric ``g = Id`` (``ω_Q = i Σ dz_j ∧ dz̄_j``) and polynomial ``h``."""
    if h.is_constant:
        raise ContractError("h must be nonconstant")
    config = config or DiffConfig()
    chart = _single_chart(n, 10.0)
    hf, poly, hol = _h_field(h, n, chart, config)
    eye = np.eye(n, dtype=complex)
    return QModel(
        chart, n, lambda p: eye, hf, f"affine({n})",
        hol if holomorphic is None else holomorphic,
        (-sample_half_width,) * (2 * n), (sample_half_width,) * (2 * n),
        potential=lambda p: float(p @ p),
        h_polynomial=poly, config=config,
    )


# ---------------------------------------------------------------------------
# pullback of Fubini–Study and holomorphy


def pullback_fs_matrix(model: QModel, point) -> np.ndarray:
    """Matrix of ``h*ω_{P¹}`` in the ``dz`` coframe (holomorphic ``h``)."""
    zeta, dz, _ = model.zeta_derivatives(point)
    return np.outer(dz, np.conj(dz)) * _fs_factor(zeta)


def pullback_fs(model: QModel, point) -> AlternatingForm:
    """``h*ω_{P¹} = i dζ ∧ dζ̄ / (1 + |ζ|²)²`` by the chain rule on real partials."""
    grad = model.h.gradient(point)
    dzeta = covector(grad)
    return (1j * _fs_factor(model.h(point))) * wedge(dzeta, dzeta.conj())


def _as_structure_fn(J):
    if J is None:
        return None
    if callable(J) and not isinstance(J, PointEndomorphism):
        return J
    Jc = J if isinstance(J, PointEndomorphism) else PointEndomorphism(J)
    return lambda p: Jc


def check_holomorphic(F, J_src, J_dst, points, chart: Chart | None = None, config: DiffConfig | None = None) -> float:
    """``max_p ‖dF ∘ J_src − J_dst ∘ dF‖`` with ``dF`` by central differences.

    Parameters
    ----------
    F : callable
        Real map between chart coordinate vectors.
    J_src, J_dst : PointEndomorphism or callable
        Structures on source and target; callables receive the source point
        and the image point respectively.
    chart : Chart, optional
        Source chart used to validate stencil points.
    """
    config = config or DiffConfig()
    js, jd = _as_structure_fn(J_src), _as_structure_fn(J_dst)
    worst = 0.0
    for p in points:
        p = np.asarray(p, dtype=float)
        if chart is None:
            ch = Chart.box(p - 1.0, p + 1.0)
        else:
            ch = chart
            ch.require(p)
        cols = [np.asarray(_fd(lambda q: np.asarray(F(q), dtype=float), ch, p, a, config), dtype=float) for a in range(p.size)]
        dF = np.column_stack(cols)
        A, B = js(p).matrix, jd(np.asarray(F(p), dtype=float)).matrix
        if A.shape[0] != dF.shape[1] or B.shape[0] != dF.shape[0]:
            raise ContractError("structure dimensions do not match the map")
        worst = max(worst, float(np.linalg.norm(dF @ A - B @ dF, 2)))
    return worst
