"""Hypercomplex model manifolds M with their quaternionic triples and fundamental forms.

Coordinates on ``H^k`` are ``(x_{4i}, x_{4i+1}, x_{4i+2}, x_{4i+3})`` per
quaternionic line, and the constant structures act on coordinate vectors by

* ``I``: ∂0 → ∂1, ∂1 → −∂0, ∂2 → ∂3, ∂3 → −∂2
* ``J``: ∂0 → ∂2, ∂1 → −∂3, ∂2 → −∂0, ∂3 → ∂1
* ``K``: ∂0 → ∂3, ∂1 → ∂2, ∂2 → −∂1, ∂3 → −∂0

so that ``IJ = K``.  With ``e = ∂0`` the frame ``(e, Ie, Je, Ke)`` is the
coordinate frame and its dual is ``(e^, −Ie^, −Je^, −Ke^)`` where
``(Ae^)(v) = e^(Av)``.  The complex coordinates for ``I`` are
``w = (x0 + i x1, x2 + i x3)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import block_diag

from .errors import ContractError, StructureError
from .exterior import (
    AlternatingForm,
    PointEndomorphism,
    act_on_one_form,
    covector,
    wedge,
)
from .fields import Chart, DiffConfig, FormField

__all__ = [
    "QUATERNION_I",
    "QUATERNION_J",
    "QUATERNION_K",
    "HypercomplexModel",
    "build_flat_torus",
    "build_hopf_chart",
    "two_form_from_matrix",
]

QUATERNION_I = np.array(
    [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=float
)
QUATERNION_J = np.array(
    [[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]], dtype=float
)
QUATERNION_K = QUATERNION_I @ QUATERNION_J


def two_form_from_matrix(B: np.ndarray) -> AlternatingForm:
    """The 2-form with ``ω(∂_a, ∂_b) = B[a, b]`` for antisymmetric ``B``."""
    B = np.asarray(B)
    n = B.shape[0]
    iu = np.triu_indices(n, 1)
    return AlternatingForm(n, 2, B[iu])


@dataclass(frozen=True)
class HypercomplexModel:
    """Chart, quaternionic triple and compatible metric on ``R^{4k}``.

    Attributes
    ----------
    chart : Chart
    k : int
        Quaternionic dimension; the complex dimension is ``r = 2k``.
    metric : callable
        ``point -> (4k, 4k)`` real symmetric matrix.
    kind : str
        ``"flat_torus"`` or ``"hopf_chart"``.
    metric_partials : callable, optional
        ``(point, axis) -> (4k, 4k)`` analytic derivative of the metric.
    compact_quotient : str
        Description of the compact quotient, recorded as metadata only.
    """

    chart: Chart
    k: int
    metric: Callable[[np.ndarray], np.ndarray]
    kind: str
    metric_partials: Callable | None = None
    compact_quotient: str = ""
    config: DiffConfig = field(default_factory=DiffConfig)

    @property
    def r(self) -> int:
        return 2 * self.k

    @property
    def real_dimension(self) -> int:
        return 4 * self.k

    # the triple is constant on both models; the point argument keeps the
    # field interface uniform
    def structures(self, point=None) -> dict[str, PointEndomorphism]:
        eye = np.eye(self.k)
        return {
            "I": PointEndomorphism(np.kron(eye, QUATERNION_I)),
            "J": PointEndomorphism(np.kron(eye, QUATERNION_J)),
            "K": PointEndomorphism(np.kron(eye, QUATERNION_K)),
        }

    def structure(self, coefficients, point=None) -> PointEndomorphism:
        """``aI + bJ + cK`` for a real triple ``(a, b, c)``."""
        a, b, c = (float(np.real(v)) for v in coefficients)
        s = self.structures(point)
        return PointEndomorphism(a * s["I"].matrix + b * s["J"].matrix + c * s["K"].matrix)

    def metric_at(self, point) -> np.ndarray:
        return np.asarray(self.metric(self.chart.require(point)), dtype=float)

    def quaternion_residual(self, point) -> float:
        s = self.structures(point)
        I, J, K = (s[x].matrix for x in "IJK")
        eye = np.eye(self.real_dimension)
        checks = [I @ I + eye, J @ J + eye, K @ K + eye, I @ J - K, J @ K - I, K @ I - J]
        return float(max(np.max(np.abs(c)) for c in checks))

    def compatibility_residual(self, point) -> float:
        G = self.metric_at(point)
        s = self.structures(point)
        return float(max(np.max(np.abs(A.matrix.T @ G @ A.matrix - G)) for A in s.values()))

    def fundamental_forms(self, point) -> dict[str, AlternatingForm]:
        """``ω_A(X, Y) = g(AX, Y)`` for ``A ∈ {I, J, K}``."""
        if self.compatibility_residual(point) > 1e-9:
            raise ContractError("metric is not compatible with the quaternionic triple")
        G = self.metric_at(point)
        return {name: two_form_from_matrix(A.matrix.T @ G) for name, A in self.structures(point).items()}

    def quaternionic_frame(self, point) -> np.ndarray:
        """Orthonormal frame ``e_i, Ie_i, Je_i, Ke_i`` (columns, grouped per line)."""
        G = self.metric_at(point)
        s = self.structures(point)
        cols: list[np.ndarray] = []
        for i in range(self.k):
            v = np.zeros(self.real_dimension)
            v[4 * i] = 1.0
            for u in cols:
                v = v - (u @ G @ v) * u
            v = v / np.sqrt(v @ G @ v)
            cols.extend([v, s["I"].matrix @ v, s["J"].matrix @ v, s["K"].matrix @ v])
        return np.column_stack(cols)

    def frame_covectors(self, point) -> dict[str, list[AlternatingForm]]:
        """The covectors ``α^i = e^i − i Ie^i`` and ``η^i = −Je^i − i Ke^i``."""
        G = self.metric_at(point)
        s = self.structures(point)
        E = self.quaternionic_frame(point)
        alphas, etas = [], []
        for i in range(self.k):
            e = covector(E[:, 4 * i] @ G)
            Ie, Je, Ke = (act_on_one_form(s[x], e) for x in "IJK")
            alphas.append(e - 1j * Ie)
            etas.append(-Je - 1j * Ke)
        return {"alpha": alphas, "eta": etas}

    def frame_forms(self, point) -> dict[str, AlternatingForm]:
        """The three fundamental forms assembled from ``α`` and ``η``."""
        fc = self.frame_covectors(point)
        n = self.real_dimension
        wI = AlternatingForm(n, 2)
        wJ = AlternatingForm(n, 2)
        wK = AlternatingForm(n, 2)
        for a, e in zip(fc["alpha"], fc["eta"]):
            ab, eb = a.conj(), e.conj()
            wI = wI + 0.5j * (wedge(a, ab) + wedge(e, eb))
            wJ = wJ + 0.5 * (wedge(a, e) + wedge(ab, eb))
            wK = wK + 0.5j * (-wedge(a, e) + wedge(ab, eb))
        return {"I": wI, "J": wJ, "K": wK}

    def omega_field(self, name: str) -> FormField:
        return FormField(self.chart, 2, lambda p: self.fundamental_forms(p)[name], self.config)


def build_flat_torus(k: int = 1, half_width: float = 1.0, config: DiffConfig | None = None) -> HypercomplexModel:
    """Flat hyper-Kähler model ``H^k`` with ``g = Id`` on the box ``(-w, w)^{4k}``."""
    if k < 1:
        raise StructureError("k must be at least 1")
    n = 4 * k
    labels = tuple(f"q{i}_{c}" for i in range(k) for c in "0123")
    chart = Chart.box([-half_width] * n, [half_width] * n, labels)
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return HypercomplexModel(
        chart,
        k,
        lambda p: eye,
        "flat_torus",
        metric_partials=lambda p, a: zero,
        compact_quotient=f"R^{n} / Z^{n}",
        config=config or DiffConfig(),
    )


def build_hopf_chart(k: int = 1, config: DiffConfig | None = None) -> HypercomplexModel:
    """Conformally flat hyperhermitian chart ``g = |q|^{-2} Id`` away from the origin.

    The box is ``x0 ∈ (0.25, 2.5)`` and ``(-1, 1)`` on the other axes, so the
    origin is excluded.  ``k = 1`` is the Hopf surface chart; larger ``k`` gives
    the analogous conformally flat structure on ``H^k \\ {0}``.
    """
    if k < 1:
        raise StructureError("k must be at least 1")
    n = 4 * k
    lower = [-1.0] * n
    upper = [1.0] * n
    lower[0], upper[0] = 0.25, 2.5
    labels = tuple(f"q{i}_{c}" for i in range(k) for c in "0123")
    chart = Chart.box(lower, upper, labels)
    eye = np.eye(n)

    def metric(p):
        return eye / float(p @ p)

    def metric_partials(p, a):
        r2 = float(p @ p)
        return (-2.0 * p[a] / r2**2) * eye

    return HypercomplexModel(
        chart,
        k,
        metric,
        "hopf_chart",
        metric_partials=metric_partials,
        compact_quotient=f"(H^{k} \\ 0) / <q -> 2q>",
        config=config or DiffConfig(),
    )


def metric_block_diag(*blocks) -> np.ndarray:
    return block_diag(*blocks)
