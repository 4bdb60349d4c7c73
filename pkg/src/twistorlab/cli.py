"""Command-line entry point.

Exit codes: 0 when every suite passes, 1 on a numeric failure, 2 on a
schema error and 3 when a suite precondition does not hold.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ChartError, ContractError, GeometryError
from .scenario import (
    H_PRESETS,
    Scenario,
    ScenarioError,
    dump_report,
    load_scenario,
    run_scenario,
    validate_scenario,
)

EXIT_OK, EXIT_FAIL, EXIT_SCHEMA, EXIT_PRECONDITION = 0, 1, 2, 3


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, help="random seed for sample points")
    p.add_argument("--points", type=int, help="number of sample points")
    p.add_argument("--fd-step", type=float, help="finite-difference step for first derivatives")
    p.add_argument("--report", help="write the report to this path (.json, .yaml)")
    p.add_argument("--quiet", action="store_true", help="suppress the human-readable summary")


def _model_flags(p: argparse.ArgumentParser, q_default: str = "p1"):
    p.add_argument("--m", dest="m_kind", choices=["flat_torus", "hopf_chart"], default="flat_torus")
    p.add_argument("--k", type=int, default=1, help="quaternionic dimension of M")
    p.add_argument("--q", dest="q_kind", choices=["p1", "p1xp1", "hirzebruch", "affine"], default=q_default)
    p.add_argument("--n", type=int, default=1, help="complex dimension of the affine model")
    p.add_argument("--hirzebruch-n", type=int, default=1)
    p.add_argument("--h", dest="h", choices=H_PRESETS, help="preset for the map h")
    p.add_argument("--non-holomorphic", action="store_true", help="tag h as non-holomorphic (negative test)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twistorlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario file")
    p.add_argument("scenario")
    _common(p)

    p = sub.add_parser("verify-lemma", help="basic lemma identities")
    _model_flags(p)
    p.add_argument("--identity", action="append", dest="identities", help="identity id, repeatable")
    p.add_argument("--coefficient", type=float, help="replace the asserted coefficient")
    _common(p)

    p = sub.add_parser("verify-integrability", help="Nijenhuis tensor of the twisted structure")
    _model_flags(p)
    p.add_argument("--expect", choices=["pass", "fail"], default="pass")
    _common(p)

    p = sub.add_parser("build-balanced", help="assemble the submersion-case balanced metric")
    _model_flags(p)
    p.add_argument("--gamma", type=float, help="constant; omitted means automatic doubling")
    p.add_argument("--convention", choices=["stated", "corrected"], default="stated")
    _common(p)

    p = sub.add_parser("check-balanced", help="closedness of ω^{N-1} for ω_M + t ω_Q")
    _model_flags(p)
    p.add_argument("--t", type=float, default=1.0)
    _common(p)

    p = sub.add_parser("check-nonkahler", help="sign of the non-Kähler witness")
    _model_flags(p)
    _common(p)

    p = sub.add_parser("search-c", help="smallest c with H + cH' positive definite on random instances")
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--e-dim", type=int, default=2)
    p.add_argument("--f-dim", type=int, default=2)
    _common(p)

    p = sub.add_parser("cover-canonical", help="canonical class of a branched double cover")
    p.add_argument("--lattice", default="p1xp1", help="p1, p1xp1 or sigmaN")
    p.add_argument("--K", type=int, nargs="+", help="canonical class (default: the lattice's)")
    p.add_argument("--D", type=int, nargs="+", help="branch divisor (default: -2K)")
    _common(p)

    sub.add_parser("schema", help="print the JSON schema of scenario documents")
    return parser


def _scenario_from_flags(args, suite: dict) -> dict:
    doc: dict = {"name": args.command, "suites": [suite]}
    if hasattr(args, "m_kind"):
        doc["M"] = {"kind": args.m_kind, "k": args.k}
        q: dict = {"kind": args.q_kind, "n": args.n, "hirzebruch_n": args.hirzebruch_n}
        if args.h or args.non_holomorphic:
            q["h"] = {"preset": args.h or "id"}
            if args.non_holomorphic:
                q["h"]["holomorphic"] = False
        doc["Q"] = q
    return doc


def _apply_overrides(doc: dict, args) -> dict:
    samples = doc.setdefault("samples", {})
    if args.seed is not None:
        samples["seed"] = args.seed
    if args.points is not None:
        samples["count"] = args.points
    if args.fd_step is not None:
        doc.setdefault("numeric", {})["fd_step"] = args.fd_step
    return doc


def _document(args) -> dict:
    cmd = args.command
    if cmd == "run":
        sc = load_scenario(args.scenario)
        return sc.model_dump(mode="json", exclude_unset=False)
    if cmd == "verify-lemma":
        return _scenario_from_flags(args, {"name": "lemma", "identities": args.identities, "coefficient": args.coefficient})
    if cmd == "verify-integrability":
        return _scenario_from_flags(args, {"name": "integrability", "expect": args.expect})
    if cmd == "build-balanced":
        doc = _scenario_from_flags(args, {"name": "balanced-submersion"})
        doc["balanced"] = {"gamma": args.gamma, "convention": args.convention}
        return doc
    if cmd == "check-balanced":
        doc = _scenario_from_flags(args, {"name": "balanced-hk"})
        doc["balanced"] = {"t": args.t}
        return doc
    if cmd == "check-nonkahler":
        return _scenario_from_flags(args, {"name": "nonkahler"})
    if cmd == "search-c":
        doc = _scenario_from_flags(args, {"name": "lemma2"})
        doc["lemma2"] = {"instances": args.instances, "e_dim": args.e_dim, "f_dim": args.f_dim}
        return doc
    if cmd == "cover-canonical":
        doc = _scenario_from_flags(args, {"name": "covers"})
        doc["covers"] = {"lattice": args.lattice, "K": args.K, "D": args.D}
        return doc
    raise AssertionError(cmd)  # pragma: no cover


def _summary(report: dict) -> str:
    lines = []
    for s in report["suites"]:
        for e in s["entries"]:
            status = "PASS" if e["passed"] else "FAIL"
            neg = " (expected fail)" if e["expect"] == "fail" else ""
            lines.append(
                f"{status} {e['suite']:<20} {e['identity']:<12} residual={e['max_residual']:.3e} "
                f"tol={e['tolerance']:.1e} n={e['samples']}{neg}"
            )
    lines.append("ALL PASS" if report["passed"] else "SOME SUITES FAILED")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "schema":
        print(json.dumps(Scenario.model_json_schema(), indent=2))
        return EXIT_OK
    try:
        doc = _apply_overrides(_document(args), args)
        sc = validate_scenario(doc)
    except ScenarioError as exc:
        print(f"schema error at {exc.path or '<root>'}: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (ContractError, ChartError) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    try:
        report = run_scenario(sc)
    except (ContractError, ChartError) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except GeometryError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.report:
        dump_report(report, args.report)
    if not args.quiet:
        print(_summary(report))
    return EXIT_OK if report["passed"] else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
