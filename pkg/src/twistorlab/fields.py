"""Scalar and form fields on coordinate boxes with a differentiation contract.

Partial derivatives are analytic when the constructor supplies them and
otherwise use central finite differences written as
``sum_k w_k (f(x + k h) - f(x - k h)) / h`` so that constant fields differentiate
to exactly zero.  Operators that return fields (:func:`d_field`,
:func:`dolbeault_field`, ...) switch to the configured ``outer_step`` so that
second derivatives are nested first derivatives with a coarser outer step.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import ChartError, ContractError, DifferentiationError, StructureError
from .exterior import (
    AlternatingForm,
    PointEndomorphism,
    bidegree_project,
    block_diagonal,
    coordinate_covector,
    standard_structure,
    wedge,
)

__all__ = [
    "Chart",
    "DiffConfig",
    "ScalarField",
    "FormField",
    "partial",
    "exterior_d",
    "d_field",
    "split_d",
    "dolbeault_split_M",
    "dolbeault",
    "dolbeault_field",
    "dolbeault_M_field",
    "dolbeault_Q_field",
    "field_wedge",
    "constant_field",
]

_STENCILS = {
    2: ((1, 0.5),),
    4: ((1, 2.0 / 3.0), (2, -1.0 / 12.0)),
    6: ((1, 0.75), (2, -3.0 / 20.0), (3, 1.0 / 60.0)),
}


@dataclass(frozen=True)
class DiffConfig:
    """Finite-difference settings.

    Parameters
    ----------
    order : int
        Stencil order, one of 2, 4, 6.
    step : float
        Step for first derivatives.
    outer_step : float
        Step used by fields that are themselves derivatives (nested second
        derivatives).
    """

    order: int = 4
    step: float = 1e-3
    outer_step: float = 1e-2

    def __post_init__(self):
        if self.order not in _STENCILS:
            raise ContractError(f"stencil order must be one of {sorted(_STENCILS)}")
        if not (self.step > 0 and self.outer_step > 0):
            raise ContractError("finite-difference steps must be positive")

    @property
    def reach(self) -> int:
        return _STENCILS[self.order][-1][0]

    def outer(self) -> "DiffConfig":
        return replace(self, step=self.outer_step)


@dataclass(frozen=True)
class Chart:
    """Open coordinate box, optionally split into an M-block and a Q-block.

    Complex coordinates on a block are formed from interleaved pairs,
    ``z_j = x_{2j} + i x_{2j+1}``.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    labels: tuple[str, ...] = ()
    m_axes: tuple[int, ...] | None = None
    q_axes: tuple[int, ...] | None = None

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != len(hi):
            raise StructureError("lower and upper bounds differ in length")
        if any(a >= b for a, b in zip(lo, hi)):
            raise StructureError("chart box must have lower < upper on every axis")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        labels = tuple(self.labels) or tuple(f"x{i}" for i in range(len(lo)))
        if len(labels) != len(lo):
            raise StructureError("one label per coordinate is required")
        object.__setattr__(self, "labels", labels)
        if (self.m_axes is None) != (self.q_axes is None):
            raise StructureError("product tag needs both an M-block and a Q-block")
        if self.m_axes is not None:
            m, q = tuple(self.m_axes), tuple(self.q_axes)
            if sorted(m + q) != list(range(len(lo))):
                raise StructureError("M and Q blocks must be disjoint and cover all coordinates")
            if len(q) % 2:
                raise StructureError("the Q-block must have even dimension")
            object.__setattr__(self, "m_axes", m)
            object.__setattr__(self, "q_axes", q)

    @classmethod
    def box(cls, lower, upper, labels=()):
        return cls(tuple(lower), tuple(upper), tuple(labels))

    @classmethod
    def product(cls, m_chart: "Chart", q_chart: "Chart") -> "Chart":
        dm = m_chart.real_dimension
        return cls(
            m_chart.lower + q_chart.lower,
            m_chart.upper + q_chart.upper,
            m_chart.labels + q_chart.labels,
            tuple(range(dm)),
            tuple(range(dm, dm + q_chart.real_dimension)),
        )

    @property
    def real_dimension(self) -> int:
        return len(self.lower)

    @property
    def is_product(self) -> bool:
        return self.m_axes is not None

    def contains(self, point) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(p > self.lower) and np.all(p < self.upper))

    def require(self, point) -> np.ndarray:
        p = np.asarray(point, dtype=float).reshape(-1)
        if p.shape[0] != self.real_dimension:
            raise StructureError(f"point has {p.shape[0]} coordinates, chart has {self.real_dimension}")
        if not self.contains(p):
            raise ChartError(f"point {p.tolist()} lies outside the chart box", point=p)
        return p

    def sample(self, rng: np.random.Generator, count: int, lower=None, upper=None, margin: float = 0.05) -> np.ndarray:
        """Uniform samples from a sub-box, kept ``margin`` away from the chart boundary."""
        lo = np.array(self.lower if lower is None else lower, dtype=float)
        hi = np.array(self.upper if upper is None else upper, dtype=float)
        lo = np.maximum(lo, np.array(self.lower) + margin)
        hi = np.minimum(hi, np.array(self.upper) - margin)
        if np.any(lo >= hi):
            raise ChartError("sample box is empty after applying the chart margin")
        return rng.uniform(lo, hi, size=(count, self.real_dimension))


def _fd(func: Callable[[np.ndarray], np.ndarray], chart: Chart, point: np.ndarray, axis: int, cfg: DiffConfig):
    h = cfg.step
    total = None
    for k, w in _STENCILS[cfg.order]:
        vals = []
        for s in (k, -k):
            q = point.copy()
            q[axis] += s * h
            if not chart.contains(q):
                raise DifferentiationError(f"stencil point {q.tolist()} lies outside the chart", point=q)
            try:
                vals.append(np.asarray(func(q)))
            except ChartError as exc:  # pragma: no cover - defensive
                raise DifferentiationError(str(exc), point=q) from exc
        term = w * (vals[0] - vals[1])
        total = term if total is None else total + term
    return total / h


class ScalarField:
    """Complex-valued function on a chart.

    Parameters
    ----------
    chart : Chart
    evaluator : callable
        ``point -> complex``.
    partials : callable, optional
        ``(point, axis) -> complex`` analytic partial derivatives.
    config : DiffConfig, optional
    """

    def __init__(self, chart: Chart, evaluator, partials=None, config: DiffConfig | None = None):
        self.chart = chart
        self._eval = evaluator
        self._partials = partials
        self.config = config or DiffConfig()

    @property
    def has_analytic_partials(self) -> bool:
        return self._partials is not None

    def __call__(self, point) -> complex:
        return complex(self._eval(self.chart.require(point)))

    def partial(self, axis: int, point, analytic: bool = True) -> complex:
        p = self.chart.require(point)
        if not 0 <= axis < self.chart.real_dimension:
            raise StructureError(f"axis {axis} out of range")
        if analytic and self._partials is not None:
            return complex(self._partials(p, axis))
        return complex(_fd(lambda q: complex(self._eval(q)), self.chart, p, axis, self.config))

    def gradient(self, point, analytic: bool = True) -> np.ndarray:
        return np.array([self.partial(a, point, analytic) for a in range(self.chart.real_dimension)])

    def check_partials(self, points) -> float:
        """Largest gap between analytic partials and finite differences over ``points``."""
        if self._partials is None:
            return 0.0
        worst = 0.0
        for p in points:
            for a in range(self.chart.real_dimension):
                worst = max(worst, abs(self.partial(a, p, True) - self.partial(a, p, False)))
        return worst

    def with_config(self, config: DiffConfig) -> "ScalarField":
        return ScalarField(self.chart, self._eval, self._partials, config)

    def as_form(self) -> "FormField":
        n = self.chart.real_dimension
        partials = None
        if self._partials is not None:
            partials = lambda p, a: AlternatingForm.scalar(n, self._partials(p, a))  # noqa: E731
        return FormField(self.chart, 0, lambda p: AlternatingForm.scalar(n, self._eval(p)), self.config, partials)


class FormField:
    """Form-valued function on a chart with constant degree and dimension."""

    def __init__(self, chart: Chart, degree: int, evaluator, config: DiffConfig | None = None, partials=None):
        self.chart = chart
        self.degree = degree
        self._eval = evaluator
        self._partials = partials
        self.config = config or DiffConfig()

    def _raw(self, p: np.ndarray) -> AlternatingForm:
        out = self._eval(p)
        if out.degree != self.degree or out.dimension != self.chart.real_dimension:
            raise StructureError(
                f"field produced a form of degree {out.degree} in dimension {out.dimension}, "
                f"expected degree {self.degree} in dimension {self.chart.real_dimension}"
            )
        return out

    def __call__(self, point) -> AlternatingForm:
        return self._raw(self.chart.require(point))

    def partial(self, axis: int, point) -> AlternatingForm:
        p = self.chart.require(point)
        if self._partials is not None:
            return self._partials(p, axis)
        arr = _fd(lambda q: self._raw(q).array, self.chart, p, axis, self.config)
        return AlternatingForm(self.chart.real_dimension, self.degree, arr)

    def with_config(self, config: DiffConfig) -> "FormField":
        return FormField(self.chart, self.degree, self._eval, config, self._partials)

    # algebra --------------------------------------------------------------
    def __add__(self, other: "FormField") -> "FormField":
        if other.degree != self.degree:
            raise StructureError("cannot add fields of different degree")
        return FormField(self.chart, self.degree, lambda p: self._raw(p) + other._raw(p), self.config)

    def __sub__(self, other: "FormField") -> "FormField":
        return self + other.scale(-1.0)

    def scale(self, factor) -> "FormField":
        """Multiply by a number or by a :class:`ScalarField`."""
        if isinstance(factor, ScalarField):
            return FormField(self.chart, self.degree, lambda p: complex(factor._eval(p)) * self._raw(p), self.config)
        c = complex(factor)
        return FormField(self.chart, self.degree, lambda p: c * self._raw(p), self.config)

    def power(self, k: int) -> "FormField":
        n = self.chart.real_dimension
        return FormField(self.chart, self.degree * k, lambda p: self._raw(p).power(k) if k else AlternatingForm.scalar(n), self.config)

    def map(self, func, degree: int) -> "FormField":
        """Pointwise transform ``(point, form) -> form``."""
        return FormField(self.chart, degree, lambda p: func(p, self._raw(p)), self.config)


def constant_field(chart: Chart, form: AlternatingForm, config: DiffConfig | None = None) -> FormField:
    zero = AlternatingForm(form.dimension, form.degree)
    return FormField(chart, form.degree, lambda p: form, config, partials=lambda p, a: zero)


def field_wedge(a: FormField, b: FormField) -> FormField:
    if a.chart.real_dimension != b.chart.real_dimension:
        raise StructureError("fields live on different charts")
    return FormField(a.chart, a.degree + b.degree, lambda p: wedge(a._raw(p), b._raw(p)), a.config)


def partial(field_: ScalarField | FormField, axis: int, point):
    """Partial derivative along a real coordinate axis."""
    return field_.partial(axis, point)


# ---------------------------------------------------------------------------
# exterior derivative and its splits


def _as_form_field(f) -> FormField:
    return f.as_form() if isinstance(f, ScalarField) else f


def _directional_d(f: FormField, point, axes, covectors) -> AlternatingForm:
    n = f.chart.real_dimension
    out = AlternatingForm(n, f.degree + 1)
    for a, cov in zip(axes, covectors):
        out = out + wedge(cov, f.partial(a, point))
    return out


def exterior_d(f: ScalarField | FormField, point) -> AlternatingForm:
    r"""``dω = Σ_a dx^a ∧ ∂_a ω``."""
    f = _as_form_field(f)
    n = f.chart.real_dimension
    if f.degree >= n:
        return AlternatingForm(n, f.degree + 1)
    axes = range(n)
    return _directional_d(f, point, axes, [coordinate_covector(n, a) for a in axes])


def d_field(f: ScalarField | FormField) -> FormField:
    """``d f`` as a field, differentiated later with the outer step."""
    f = _as_form_field(f)
    return FormField(f.chart, f.degree + 1, lambda p: exterior_d(f, p), f.config.outer())


def _require_product(chart: Chart):
    if not chart.is_product:
        raise ContractError("operation needs a product chart (M-block and Q-block)")


def _q_complex_covectors(chart: Chart):
    """``(dz_j, dz̄_j, x-axis, y-axis)`` for the interleaved Q-block pairs."""
    n = chart.real_dimension
    out = []
    q = chart.q_axes
    for j in range(0, len(q), 2):
        c = np.zeros(n, dtype=complex)
        c[q[j]] = 1.0
        c[q[j + 1]] = 1j
        dzj = AlternatingForm(n, 1, c)
        out.append((dzj, dzj.conj(), q[j], q[j + 1]))
    return out


def _q_parts(f: FormField, point):
    n = f.chart.real_dimension
    d10 = AlternatingForm(n, f.degree + 1)
    d01 = AlternatingForm(n, f.degree + 1)
    for dzj, dzbj, ax, ay in _q_complex_covectors(f.chart):
        fx, fy = f.partial(ax, point), f.partial(ay, point)
        d10 = d10 + wedge(dzj, 0.5 * (fx - 1j * fy))
        d01 = d01 + wedge(dzbj, 0.5 * (fx + 1j * fy))
    return d10, d01


def split_d(f: ScalarField | FormField, point) -> dict[str, AlternatingForm]:
    """Split ``d`` into the M-part and the (1,0)/(0,1) parts along Q.

    The Q-block carries the standard structure on interleaved pairs, so
    ``dQ_10 = Σ dz_j ∧ ∂_{z_j}`` and ``dQ_01 = Σ dz̄_j ∧ ∂_{z̄_j}``.
    """
    f = _as_form_field(f)
    _require_product(f.chart)
    n = f.chart.real_dimension
    m_axes = f.chart.m_axes
    d_m = _directional_d(f, point, m_axes, [coordinate_covector(n, a) for a in m_axes])
    d10, d01 = _q_parts(f, point)
    return {"d_M": d_m, "dQ_10": d10, "dQ_01": d01}


def _m_one_zero_parts(chart: Chart, J_M: PointEndomorphism):
    """(1,0) parts of ``dx^a`` for M-axes relative to ``J_M``, embedded in the chart."""
    n = chart.real_dimension
    dm = len(chart.m_axes)
    if J_M.dimension != dm:
        raise StructureError(f"M-structure has dimension {J_M.dimension}, M-block has {dm}")
    P = 0.5 * (np.eye(dm) - 1j * J_M.matrix)  # row a: (1,0) part of dx^a
    out = []
    for a in range(dm):
        c = np.zeros(n, dtype=complex)
        c[list(chart.m_axes)] = P[a]
        out.append(AlternatingForm(n, 1, c))
    return out


def dolbeault_split_M(f: ScalarField | FormField, J_M_field, point) -> dict[str, AlternatingForm]:
    r"""``∂_M`` and ``∂̄_M`` relative to the point-dependent M-structure.

    ``∂_M ω = Σ_a (dx^a)^{1,0} ∧ ∂_a ω`` over M-axes, i.e. the bidegree
    projection of the M-part of ``d`` applied factorwise.  This equals the
    intrinsic operator whenever the M-structure does not vary along M, which
    holds for every model here.
    """
    f = _as_form_field(f)
    _require_product(f.chart)
    J = J_M_field(f.chart.require(point))
    if not isinstance(J, PointEndomorphism):
        J = PointEndomorphism(J)
    if not J.is_complex_structure(1e-9):
        raise ContractError("M-structure does not square to -1")
    ones = _m_one_zero_parts(f.chart, J)
    zeros = [c.conj() for c in ones]
    m_axes = f.chart.m_axes
    del_m = _directional_d(f, point, m_axes, ones)
    delbar_m = _directional_d(f, point, m_axes, zeros)
    return {"del_M": del_m, "delbar_M": delbar_m}


def dolbeault_M_field(f: FormField, J_M_field, kind: str) -> FormField:
    key = {"del": "del_M", "delbar": "delbar_M"}[kind]
    return FormField(f.chart, f.degree + 1, lambda p: dolbeault_split_M(f, J_M_field, p)[key], f.config.outer())


def dolbeault_Q_field(f: FormField, kind: str) -> FormField:
    idx = {"del": 0, "delbar": 1}[kind]
    _require_product(f.chart)
    return FormField(f.chart, f.degree + 1, lambda p: _q_parts(f, p)[idx], f.config.outer())


def dolbeault(f: ScalarField | FormField, J_field, point, p: int, q: int, kind: str) -> AlternatingForm:
    r"""``∂`` or ``∂̄`` of a field of pure bidegree ``(p, q)`` relative to ``J_field``.

    Defined as the ``(p+1, q)`` (resp. ``(p, q+1)``) component of ``d``; for
    an integrable structure this is the Dolbeault operator.
    """
    f = _as_form_field(f)
    if p + q != f.degree:
        raise ContractError("bidegree does not match field degree")
    J = J_field(f.chart.require(point))
    dw = exterior_d(f, point)
    if kind == "del":
        return bidegree_project(dw, J, p + 1, q)
    if kind == "delbar":
        return bidegree_project(dw, J, p, q + 1)
    raise ContractError(f"unknown Dolbeault kind {kind!r}")


def dolbeault_field(f: FormField, J_field, p: int, q: int, kind: str) -> FormField:
    return FormField(f.chart, f.degree + 1, lambda pt: dolbeault(f, J_field, pt, p, q, kind), f.config.outer())


def product_structure(J_M: PointEndomorphism, q_dim: int) -> PointEndomorphism:
    """Block structure ``(J_M, standard)`` on a product chart."""
    return block_diagonal(J_M, standard_structure(q_dim))
