"""Declarative scenarios: schema, model construction and suite execution.

A scenario names a model for M, a model for Q with its map ``h``, the
sampling and finite-difference settings, and a list of verification suites.
Running it produces a report with one entry per executed suite.
"""

from __future__ import annotations

import json
import math
import time
from pathlib import Path
from typing import Any, Literal, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .balanced import (
    balanced_hk,
    balanced_submersion,
    critical_cutoff_xi,
    lemma2_search_c,
    nonkahler_witness,
    random_lemma2_instance,
    xi_tilde_coefficients,
)
from .covers import adjoint_cover_canonical, cy_check, lattice_by_name
from .errors import ContractError
from .fields import DiffConfig
from .hypercomplex import build_flat_torus, build_hopf_chart
from .qmodels import Polynomial, build_affine, build_hirzebruch, build_p1, build_p1xp1
from .twistor import (
    LEMMA_IDENTITIES,
    TwistorProduct,
    nijenhuis_residual,
    verify_lemma_identity,
)

__all__ = [
    "Scenario",
    "SuiteSpec",
    "ScenarioError",
    "load_scenario",
    "build_product",
    "run_scenario",
    "SUITE_NAMES",
    "H_PRESETS",
]

SUITE_NAMES = (
    "integrability",
    "lemma",
    "balanced-hk",
    "balanced-submersion",
    "cutoff",
    "nonkahler",
    "lemma2",
    "covers",
)

H_PRESETS = ("id", "z2", "zbar", "proj", "z1sq_plus_z2")


class ScenarioError(ValueError):
    """The scenario document does not match the schema."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(message)
        self.path = path


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class Term(_Strict):
    """One monomial ``coef · z^a · z̄^b``; ``coef`` is real or ``[re, im]``."""

    coef: Union[float, tuple[float, float]] = 1.0
    z: list[int]
    zbar: list[int] = Field(default_factory=list)


class HSpec(_Strict):
    preset: Literal["id", "z2", "zbar", "proj", "z1sq_plus_z2"] | None = None
    terms: list[Term] | None = None
    holomorphic: bool | None = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.preset is None) == (self.terms is None):
            raise ValueError("give exactly one of 'preset' or 'terms'")
        return self


class MSpec(_Strict):
    kind: Literal["flat_torus", "hopf_chart"] = "flat_torus"
    k: int = Field(1, ge=1, le=3)


class QSpec(_Strict):
    kind: Literal["p1", "p1xp1", "hirzebruch", "affine"] = "p1"
    n: int = Field(1, ge=1, le=3, description="complex dimension for the affine model")
    hirzebruch_n: int = Field(1, ge=0)
    s: float = 1.0
    h: HSpec | None = None


class SampleSpec(_Strict):
    count: int = Field(10, ge=1)
    seed: int = 0
    margin: float = Field(0.05, ge=0.0, lt=0.5)


class NumericSpec(_Strict):
    fd_step: float = Field(1e-3, gt=0)
    outer_step: float = Field(1e-2, gt=0)
    order: Literal[2, 4, 6] = 4


class BalancedSpec(_Strict):
    t: float = Field(1.0, gt=0)
    gamma: float | None = Field(10.0, gt=0)
    t_prime: float = Field(1.0, gt=0)
    cutoff_t: float = Field(1.0, ge=0)
    convention: Literal["stated", "corrected"] = "stated"


class Lemma2Spec(_Strict):
    instances: int = Field(20, ge=1)
    e_dim: int = Field(2, ge=1)
    f_dim: int = Field(2, ge=1)
    samples: int = Field(4, ge=1)


class CoversSpec(_Strict):
    lattice: str = "p1xp1"
    K: list[int] | None = None
    D: list[int] | None = None


class SuiteSpec(_Strict):
    name: Literal[
        "integrability", "lemma", "balanced-hk", "balanced-submersion", "cutoff", "nonkahler", "lemma2", "covers"
    ]
    identities: list[str] | None = None
    expect: Literal["pass", "fail"] = "pass"
    tolerance: float | None = Field(None, gt=0)
    coefficient: float | None = None

    @field_validator("identities")
    @classmethod
    def _known(cls, v):
        if v is not None:
            bad = [i for i in v if i not in LEMMA_IDENTITIES]
            if bad:
                raise ValueError(f"unknown identities {bad}; choose from {list(LEMMA_IDENTITIES)}")
        return v


class Scenario(_Strict):
    """Root document."""

    name: str = "scenario"
    M: MSpec = Field(default_factory=MSpec)
    Q: QSpec = Field(default_factory=QSpec)
    suites: list[SuiteSpec]
    samples: SampleSpec = Field(default_factory=SampleSpec)
    numeric: NumericSpec = Field(default_factory=NumericSpec)
    balanced: BalancedSpec = Field(default_factory=BalancedSpec)
    lemma2: Lemma2Spec = Field(default_factory=Lemma2Spec)
    covers: CoversSpec = Field(default_factory=CoversSpec)

    @field_validator("suites", mode="before")
    @classmethod
    def _names(cls, v):
        if isinstance(v, list):
            return [{"name": s} if isinstance(s, str) else s for s in v]
        return v

    @property
    def diff_config(self) -> DiffConfig:
        return DiffConfig(self.numeric.order, self.numeric.fd_step, self.numeric.outer_step)


def validate_scenario(data: Any) -> Scenario:
    """Validate a parsed document; schema errors become :class:`ScenarioError` with the field path."""
    from pydantic import ValidationError

    try:
        return Scenario.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        path = ".".join(str(p) for p in err["loc"])
        raise ScenarioError(err["msg"], path) from None


def load_scenario(path: str | Path) -> Scenario:
    """Read a YAML or JSON scenario file (JSON is a subset of YAML).

    A report written by :func:`dump_report` is accepted as well; its echoed
    scenario is returned, so a saved report can be replayed.
    """
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ScenarioError("scenario document must be a mapping")
    if isinstance(data.get("scenario"), dict) and "passed" in data:
        data = data["scenario"]
    return validate_scenario(data)


# ---------------------------------------------------------------------------
# model construction


def _polynomial(spec: HSpec | None, n: int, default: str) -> tuple[Polynomial, bool | None]:
    if spec is None:
        spec = HSpec(preset=default)
    if spec.terms is not None:
        poly = None
        for t in spec.terms:
            coef = complex(*t.coef) if isinstance(t.coef, tuple) else complex(t.coef)
            zbar = t.zbar or [0] * n
            if len(t.z) != n or len(zbar) != n:
                raise ContractError(f"monomial exponents must have length {n}")
            m = Polynomial.monomial(n, t.z, zbar, coef)
            poly = m if poly is None else poly + m
        return poly, spec.holomorphic
    e = lambda j, p=1: [p if i == j else 0 for i in range(n)]  # noqa: E731
    preset = spec.preset
    if preset in ("id", "proj"):
        poly = Polynomial.coordinate(n, 0)
    elif preset == "z2":
        poly = Polynomial.monomial(n, e(0, 2))
    elif preset == "zbar":
        poly = Polynomial.monomial(n, [0] * n, e(0))
    else:
        if n < 2:
            raise ContractError("preset z1sq_plus_z2 needs n >= 2")
        poly = Polynomial.monomial(n, e(0, 2)) + Polynomial.monomial(n, e(1))
    return poly, spec.holomorphic


def build_product(sc: Scenario) -> TwistorProduct:
    cfg = sc.diff_config
    M = (build_flat_torus if sc.M.kind == "flat_torus" else build_hopf_chart)(sc.M.k, config=cfg)
    q = sc.Q
    if q.kind == "p1":
        poly, hol = _polynomial(q.h, 1, "id")
        Q = build_p1(poly, hol, config=cfg)
    elif q.kind == "p1xp1":
        if q.h is not None and q.h.preset not in (None, "proj"):
            raise ContractError("the P1 x P1 model uses the projection h = z1")
        Q = build_p1xp1(config=cfg)
    elif q.kind == "hirzebruch":
        if q.h is not None and q.h.preset not in (None, "proj"):
            raise ContractError("the Hirzebruch model uses the bundle projection h = z")
        Q = build_hirzebruch(q.hirzebruch_n, q.s, config=cfg, seed=sc.samples.seed)
    else:
        poly, hol = _polynomial(q.h, q.n, "id")
        Q = build_affine(q.n, poly, hol, config=cfg)
    return TwistorProduct(M, Q, cfg)


def check_prerequisites(sc: Scenario, X: TwistorProduct | None = None):
    """Raise :class:`ContractError` for suites whose preconditions fail."""
    for s in sc.suites:
        if s.name == "lemma":
            for ident in s.identities or ["0120q", "1002q", "1111q"]:
                if ident in ("11n1q", "fq") and sc.M.k < 2:
                    raise ContractError(f"identity {ident} requires r > 2, i.e. k >= 2 (scenario has k = {sc.M.k})")
            if sc.M.kind != "flat_torus" and set(s.identities or []) - {"0120q", "1002q"}:
                raise ContractError("the lemma identities beyond the type statements need the flat model for M")
        if s.name in ("balanced-hk", "nonkahler") and sc.M.kind != "flat_torus":
            raise ContractError(f"suite {s.name} needs the flat hyper-Kähler model for M")
        if s.name == "cutoff" and sc.Q.kind != "affine":
            raise ContractError("suite cutoff needs an affine Q with a critical point at the origin")
        if s.name == "lemma2" and sc.lemma2.e_dim < 1:
            raise ContractError("lemma2 needs a non-empty E block")


# ---------------------------------------------------------------------------
# suites


def _entry(suite, identity, count, residual, tolerance, passed, runtime, expect="pass", **details):
    return {
        "suite": suite,
        "identity": identity,
        "samples": int(count),
        "max_residual": float(residual),
        "tolerance": float(tolerance),
        "expect": expect,
        "passed": bool(passed),
        "runtime": float(runtime),
        "details": details,
    }


def _outcome(ok: bool, expect: str) -> bool:
    return ok if expect == "pass" else not ok


def _points(X: TwistorProduct, sc: Scenario, count=None, seed_offset=0):
    rng = np.random.default_rng(sc.samples.seed + seed_offset)
    return X.sample(rng, count or sc.samples.count, sc.samples.margin)


def _run_integrability(sc, spec, X):
    t0 = time.perf_counter()
    pts = _points(X, sc)
    tol = spec.tolerance or (1e-6 if spec.expect == "pass" else 0.05)
    res = nijenhuis_residual(X, pts, seed=sc.samples.seed)
    sq = max(X.structure_at(p).square_residual() for p in pts)
    ok = res <= tol if spec.expect == "pass" else res > tol
    out = [_entry("integrability", "nijenhuis", len(pts), res, tol, ok, time.perf_counter() - t0, spec.expect,
                  holomorphic_tag=X.Q.holomorphic)]
    out.append(_entry("integrability", "square", len(pts), sq, 1e-12, sq <= 1e-12, 0.0))
    return out


def _run_lemma(sc, spec, X):
    out = []
    pts = _points(X, sc)
    for ident in spec.identities or ["0120q", "1002q", "1111q"]:
        t0 = time.perf_counter()
        sub = pts if ident != "fq" else pts[: min(len(pts), 3)]
        r = verify_lemma_identity(X, ident, sub, spec.tolerance, spec.coefficient)
        out.append(_entry("lemma", ident, len(sub), r.max_residual, r.tolerance,
                          _outcome(r.passed, spec.expect), time.perf_counter() - t0, spec.expect,
                          expected_coefficient=r.expected_coefficient, fitted_coefficient=r.fitted_coefficient))
    return out


def _run_balanced_hk(sc, spec, X):
    t0 = time.perf_counter()
    pts = _points(X, sc)
    tol = spec.tolerance or 1e-5
    r = balanced_hk(X, sc.balanced.t, pts)
    ok = r.d_top_residual <= tol and r.d_omega_min > 0.05 and r.positive
    return [_entry("balanced-hk", f"t={sc.balanced.t:g}", len(pts), r.d_top_residual, tol,
                   _outcome(ok, spec.expect), time.perf_counter() - t0, spec.expect,
                   d_omega_min=r.d_omega_min, positive=r.positive, min_eigenvalue=r.min_eigenvalue)]


def _run_submersion(sc, spec, X):
    t0 = time.perf_counter()
    pts = _points(X, sc, min(sc.samples.count, 5))
    r = balanced_submersion(X, sc.balanced.gamma, pts, convention=sc.balanced.convention)
    n, rr = X.n, X.r
    first = r.per_point[0]
    a, b = xi_tilde_coefficients(first["S"], first["B"], n, rr)
    dt = time.perf_counter() - t0
    tol_d = spec.tolerance or 1e-4
    return [
        _entry("balanced-submersion", "identity", len(pts), r.identity_residual, 1e-8,
               _outcome(r.identity_residual <= 1e-8, spec.expect), dt, spec.expect,
               gamma=r.gamma, convention=r.convention, omega_Q_coefficient=a, omega_M_coefficient=b,
               S=first["S"], B=first["B"]),
        _entry("balanced-submersion", "d_Omega", len(pts), r.d_Omega_residual, tol_d,
               _outcome(r.d_Omega_residual <= tol_d, spec.expect), 0.0, spec.expect),
    ]


def _run_cutoff(sc, spec, X):
    t0 = time.perf_counter()
    rng = np.random.default_rng(sc.samples.seed)
    count = min(sc.samples.count, 3)
    m_pts = X.M.chart.sample(rng, count, margin=max(sc.samples.margin, 0.25))
    pts = np.hstack([m_pts, np.zeros((count, X.Q.real_dimension))])
    tol = spec.tolerance or 1e-4
    res, margins = 0.0, []
    for p in pts:
        c = critical_cutoff_xi(X, sc.balanced.cutoff_t, p)
        res = max(res, c.residual)
        margins.append(c.e_margin)
    ok = res <= tol and (min(margins) > 0 or sc.balanced.cutoff_t == 0)
    return [_entry("cutoff", f"t={sc.balanced.cutoff_t:g}", len(pts), res, tol, _outcome(ok, spec.expect),
                   time.perf_counter() - t0, spec.expect, e_margin_min=min(margins))]


def _run_nonkahler(sc, spec, X):
    t0 = time.perf_counter()
    pts = _points(X, sc)
    tol = spec.tolerance or 1e-10
    r = nonkahler_witness(X, None, pts, tol=tol)
    # the residual reported is the size of any violation
    viol = max(0.0, -r.min_coefficient)
    ok = r.min_coefficient > 0
    return [_entry("nonkahler", "witness", len(pts), viol, tol, _outcome(ok, spec.expect),
                   time.perf_counter() - t0, spec.expect, min_coefficient=r.min_coefficient)]


def _run_lemma2(sc, spec, X):
    t0 = time.perf_counter()
    rng = np.random.default_rng(sc.samples.seed)
    worst_ratio, worst_eig = 0.0, math.inf
    for _ in range(sc.lemma2.instances):
        Hs, Hps = random_lemma2_instance(rng, sc.lemma2.e_dim, sc.lemma2.f_dim, sc.lemma2.samples)
        res = lemma2_search_c(Hs, Hps, sc.lemma2.e_dim)
        worst_ratio = max(worst_ratio, res.c / max(res.bound, 1e-300))
        worst_eig = min(worst_eig, min(float(np.linalg.eigvalsh(H + res.c * Hp)[0]) for H, Hp in zip(Hs, Hps)))
    ok = worst_eig > 0 and worst_ratio <= 4.0
    return [_entry("lemma2", "search_c", sc.lemma2.instances, worst_ratio, 4.0, _outcome(ok, spec.expect),
                   time.perf_counter() - t0, spec.expect, min_eigenvalue=worst_eig)]


def _run_covers(sc, spec, X):
    t0 = time.perf_counter()
    lat = lattice_by_name(sc.covers.lattice)
    K = lat.divisor(sc.covers.K) if sc.covers.K is not None else lat.K
    D = lat.divisor(sc.covers.D) if sc.covers.D is not None else -2 * K
    res = adjoint_cover_canonical(K, D)
    cy = cy_check(K, D)
    ok = res.exists
    return [_entry("covers", lat.name, 1, 0.0 if ok else 1.0, 0.0, _outcome(ok, spec.expect),
                   time.perf_counter() - t0, spec.expect,
                   L=None if res.L is None else list(res.L.coordinates),
                   K_cover=None if res.K_cover is None else list(res.K_cover.coordinates),
                   calabi_yau=cy, obstruction=res.obstruction)]


_RUNNERS = {
    "integrability": _run_integrability,
    "lemma": _run_lemma,
    "balanced-hk": _run_balanced_hk,
    "balanced-submersion": _run_submersion,
    "cutoff": _run_cutoff,
    "nonkahler": _run_nonkahler,
    "lemma2": _run_lemma2,
    "covers": _run_covers,
}


def run_scenario(sc: Scenario) -> dict:
    """Execute every suite in order and return the report document.

    Precondition failures raise :class:`ContractError` before any suite runs.
    """
    needs_X = any(s.name not in ("lemma2", "covers") for s in sc.suites)
    X = build_product(sc) if needs_X else None
    check_prerequisites(sc, X)
    suites = []
    for spec in sc.suites:
        t0 = time.perf_counter()
        entries = _RUNNERS[spec.name](sc, spec, X)
        suites.append({
            "suite": spec.name,
            "passed": all(e["passed"] for e in entries),
            "runtime": time.perf_counter() - t0,
            "entries": entries,
        })
    return {
        "scenario": sc.model_dump(mode="json"),
        "suites": suites,
        "passed": all(s["passed"] for s in suites),
    }


def dump_report(report: dict, path: str | Path):
    """Write JSON, or YAML when the suffix is ``.yaml``/``.yml``; floats keep full precision."""
    path = Path(path)
    if path.suffix in (".yaml", ".yml"):
        path.write_text(yaml.safe_dump(report, sort_keys=False))
    else:
        path.write_text(json.dumps(report, indent=2))
