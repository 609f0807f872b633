#!/usr/bin/env python3
"""
Unified CLI tool for abstract convexity instances.

Reads a JSON instance document, runs one library operation on it and prints
the result as JSON on stdout. Exit codes: 0 computed / predicate true,
1 predicate false or infeasible (witness printed), 2 invalid input,
3 resource limit, 4 internal error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import const
from algebra import Verdict, check_mutually_distributive, check_reflexive
from convexity import hull_trace, omega_boundary, omega_interior
from errors import InternalError, OmegaError, SchemaError, TheoremViolation
from functions import (
    check_compatible,
    check_nondecreasing,
    check_range_automorphisms,
    check_range_distributive,
    check_range_reflexive,
    is_affine_map,
    is_concave_map,
    is_convex_map,
)
from instance_io import InstanceDocument, load_instance, parse_index_list, parse_vector_arg
from order import Norm, bipolar_member, controllability_functional, dual_cone, is_salient_cone, is_sharp
from support import (
    SupportInstance,
    delta_support,
    mt2_compile,
    ri_certificate,
    sublinear_support,
    subadditive_support,
    support_at_point,
    support_extend,
    validate_instance,
    verify_delta_certificate,
)

_LOGGER = logging.getLogger("omega_tool")

Result = Tuple[Dict[str, Any], int]


def _verdicts(results: Dict[str, Any]) -> Dict[str, Any]:
    return {name: verdict.to_dict() for name, verdict in results.items()}


def cmd_check(doc: InstanceDocument, args) -> Result:
    """Structural hypotheses of ω (and Ω, and the support task when present)."""
    family = doc.require_family()
    results = {
        "reflexive": check_reflexive(family),
        "mutually_distributive": check_mutually_distributive(family, args.max_cells),
    }
    if doc.range is not None:
        rng = doc.range
        check_compatible(family, rng)
        results["range_reflexive"] = check_range_reflexive(rng)
        results["range_distributive"] = check_range_distributive(rng, args.max_cells)
        results["order_automorphism"] = check_range_automorphisms(rng)
        nondecreasing = Verdict.ok()
        for gamma in rng.indices:
            verdict = check_nondecreasing(rng, gamma)
            if not verdict:
                nondecreasing = verdict
                break
        results["nondecreasing"] = nondecreasing
    payload = _verdicts(results)
    passed = all(results.values())
    if "support" in doc.tasks:
        task = doc.tasks["support"]
        inst = SupportInstance(family, doc.require_range(), doc.function(task.f), task.D)
        hypotheses = validate_instance(inst, args.max_cells)
        payload["hypotheses"] = _verdicts(hypotheses)
        passed = passed and all(hypotheses.values())
    return payload, const.EXIT_OK if passed else const.EXIT_PREDICATE_FALSE


def _resolve_set(doc: InstanceDocument, ref: str, size: int):
    """A set name from the document, or an inline list like ``0,2``."""
    if ref not in doc.sets and ref.replace(",", "").replace(" ", "").isdigit():
        return parse_index_list(ref, size)
    return doc.subset(ref)


def _require_set(doc: InstanceDocument, args, size: int):
    if not args.set:
        raise SchemaError([{"path": "--set", "message": "this command needs --set NAME"}])
    return _resolve_set(doc, args.set, size)


def cmd_hull(doc: InstanceDocument, args) -> Result:
    family = doc.require_family()
    subset = _require_set(doc, args, family.size)
    kind = "convex" if args.command == "hull" else "extreme"
    trace = hull_trace(family, subset, kind)
    key = "hull" if kind == "convex" else "extreme_hull"
    return {"set": subset.indices(), key: trace[-1].indices(), "steps": len(trace) - 1}, const.EXIT_OK


def cmd_interior(doc: InstanceDocument, args) -> Result:
    family = doc.require_family()
    if args.command == "interior":
        return {"interior": omega_interior(family).indices()}, const.EXIT_OK
    return {"boundary": omega_boundary(family).indices()}, const.EXIT_OK


def cmd_classify_map(doc: InstanceDocument, args) -> Result:
    family = doc.require_family()
    rng = doc.require_range()
    if not args.function:
        raise SchemaError([{"path": "--function", "message": "classify-map needs --function NAME"}])
    f = doc.function(args.function)
    domain = _resolve_set(doc, args.set, family.size) if args.set else None
    results = {
        "convex": is_convex_map(f, family, rng, domain),
        "concave": is_concave_map(f, family, rng, domain),
        "affine": is_affine_map(f, family, rng, domain),
    }
    payload = _verdicts(results)
    payload["function"] = args.function
    if domain is not None:
        payload["domain"] = domain.indices()
    # without --expect this is a report
    if args.expect is None:
        return payload, const.EXIT_OK
    payload["expect"] = args.expect
    return payload, const.EXIT_OK if results[args.expect] else const.EXIT_PREDICATE_FALSE


def cmd_support(doc: InstanceDocument, args) -> Result:
    family = doc.require_family()
    rng = doc.require_range()
    task = doc.require_task("support")
    f = doc.function(task.f)
    if args.command == "support-at":
        point = args.point if args.point is not None else task.p
        if point is None:
            raise SchemaError([{"path": "$.support.p", "message": "support-at needs --point or support.p"}])
        certificate = support_at_point(family, rng, f, point, args.override_preconditions, args.max_cells, args.max_pivots)
    else:
        inst = SupportInstance(family, rng, f, task.D)
        certificate = support_extend(
            inst,
            override=args.override_preconditions,
            max_cells=args.max_cells,
            max_pivots=args.max_pivots,
        )
    return {"certificate": certificate.to_dict()}, const.EXIT_OK


def cmd_subadditive(doc: InstanceDocument, args) -> Result:
    family = doc.require_family()
    task = doc.require_task("subadditive")
    certificate = subadditive_support(family.op(task.operation), task.f, task.p, args.override_preconditions, args.max_pivots)
    return {"certificate": certificate.to_dict()}, const.EXIT_OK


def cmd_sublinear(doc: InstanceDocument, args) -> Result:
    task = doc.require_task("sublinear")
    certificate = sublinear_support(task.sample, task.f, task.cone, task.p, task.multipliers, args.max_pivots)
    return {"certificate": certificate.to_dict()}, const.EXIT_OK


def cmd_mt2(doc: InstanceDocument, args) -> Result:
    task = doc.require_task("mt2")
    compiled = mt2_compile(
        task.a,
        task.A,
        task.cone,
        task.grid,
        f=task.f,
        p=task.p,
        modulus=task.modulus,
        n_max=task.n_max,
        max_cells=args.max_cells,
    )
    payload: Dict[str, Any] = {"compilation": compiled.to_dict()}
    if task.p is not None:
        certificate = support_extend(
            compiled.instance,
            override=args.override_preconditions,
            max_cells=args.max_cells,
            max_pivots=args.max_pivots,
        )
        payload["certificate"] = certificate.to_dict()
    return payload, const.EXIT_OK


def cmd_ri_cert(doc: InstanceDocument, args) -> Result:
    certificate = ri_certificate(doc.require_task("ri"))
    return {"ri": certificate.to_dict()}, const.EXIT_OK if certificate.passed else const.EXIT_PREDICATE_FALSE


def cmd_delta_support(doc: InstanceDocument, args) -> Result:
    task = doc.require_task("delta")
    if task.candidate is not None:
        report = verify_delta_certificate(task.instance, task.candidate["A"], task.candidate["a"])
        return {"verification": report.to_dict()}, const.EXIT_OK if report.passed else const.EXIT_PREDICATE_FALSE
    certificate = delta_support(task.instance, args.max_pivots)
    return {"certificate": certificate.to_dict()}, const.EXIT_OK


def cmd_cone(doc: InstanceDocument, args) -> Result:
    if args.cone:
        cone = doc.cone(args.cone)
    elif len(doc.cones) == 1:
        cone = next(iter(doc.cones.values()))
    else:
        raise SchemaError([{"path": "--cone", "message": "name the cone with --cone NAME"}])
    payload: Dict[str, Any] = {"action": args.action, "cone": cone.to_dict()}
    code = const.EXIT_OK
    if args.action == "dual":
        payload["dual"] = dual_cone(cone).to_dict()
    elif args.action == "sharp":
        verdict = is_sharp(cone)
        payload["sharp"] = verdict.to_dict()
        code = const.EXIT_OK if verdict else const.EXIT_PREDICATE_FALSE
    elif args.action == "salient":
        verdict = is_salient_cone(cone)
        payload["salient"] = verdict.to_dict()
        code = const.EXIT_OK if verdict else const.EXIT_PREDICATE_FALSE
    elif args.action == "control":
        payload["control"] = controllability_functional(cone, Norm(args.norm)).to_dict()
    else:
        if not args.vector:
            raise SchemaError([{"path": "--vector", "message": "member needs --vector y1,y2,..."}])
        y = parse_vector_arg(args.vector)
        inside = cone.contains(y)
        payload["member"] = {"in_cone": inside, "in_bipolar": bipolar_member(cone, y)}
        code = const.EXIT_OK if inside else const.EXIT_PREDICATE_FALSE
    return payload, code


COMMANDS = {
    "check": cmd_check,
    "hull": cmd_hull,
    "extreme-hull": cmd_hull,
    "interior": cmd_interior,
    "boundary": cmd_interior,
    "classify-map": cmd_classify_map,
    "support": cmd_support,
    "support-at": cmd_support,
    "subadditive": cmd_subadditive,
    "sublinear": cmd_sublinear,
    "mt2": cmd_mt2,
    "ri-cert": cmd_ri_cert,
    "delta-support": cmd_delta_support,
    "cone": cmd_cone,
}


def _print_table(payload: Dict[str, Any]) -> None:
    """Print a result as a two-column table."""
    try:
        from rich import box
        from rich.console import Console
        from rich.table import Table
    except ImportError:
        # Fallback to JSON if rich not available
        print(json.dumps(payload, indent=2, sort_keys=True))
        return

    table = Table(box=box.ROUNDED)
    table.add_column("Key", style="cyan")
    table.add_column("Value", style="yellow")
    for key, value in sorted(payload.items()):
        if isinstance(value, dict) and "verdict" in value:
            mark = "✅ pass" if value["verdict"] == "pass" else "❌ fail"
            detail = json.dumps(value.get("witness"), sort_keys=True) if value.get("witness") else value.get("note", "")
            table.add_row(key, f"{mark} {detail}".strip())
        else:
            table.add_row(key, json.dumps(value, sort_keys=True))
    Console().print(table)


def emit(payload: Dict[str, Any], fmt: str = "json") -> None:
    if fmt == "table":
        _print_table(payload)
    else:
        print(json.dumps(payload, indent=2, sort_keys=True))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "table"], default="json", help="Output format (default: json)")
    common.add_argument("--max-cells", type=int, default=None, help=f"Table cell cap (default: {const.MAX_TABLE_CELLS})")
    common.add_argument("--max-pivots", type=int, default=None, help=f"Simplex pivot cap (default: {const.MAX_PIVOTS})")
    common.add_argument("--override-preconditions", action="store_true", help="Run support constructions even when hypotheses fail")
    common.add_argument("--debug", action="store_true", help="Debug logging on stderr")

    parser = argparse.ArgumentParser(
        description="Abstract convexity verification and construction",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Structural hypotheses of a family
  python omega_tool.py check instances/z5_midpoint.json

  # Convex hull of a named set
  python omega_tool.py hull --set H instances/z5_midpoint.json

  # Supporting affine minorant
  python omega_tool.py support instances/min2_support.json

  # Cone diagnostics
  python omega_tool.py cone control --norm l1 instances/cone_2d.json
        """,
    )
    subparsers = parser.add_subparsers(dest="command", help="Command to run")
    commands = {}

    commands["check"] = subparsers.add_parser("check", parents=[common], help="Reflexivity, distributivity and range hypotheses")
    for name, text in (("hull", "ω-convex hull of --set"), ("extreme-hull", "ω-extreme hull of --set")):
        commands[name] = subparsers.add_parser(name, parents=[common], help=text)
        commands[name].add_argument("--set", help="Name of a set in the document, or an index list such as 0,2")
    commands["interior"] = subparsers.add_parser("interior", parents=[common], help="ω-interior points")
    commands["boundary"] = subparsers.add_parser("boundary", parents=[common], help="ω-boundary points")

    classify = commands["classify-map"] = subparsers.add_parser("classify-map", parents=[common], help="Convex / concave / affine verdicts for a function")
    classify.add_argument("--function", help="Name of a function in the document")
    classify.add_argument("--set", help="Restrict the check to tuples from this set (name or index list)")
    classify.add_argument("--expect", choices=["convex", "concave", "affine"], help="Exit 1 unless this verdict passes")

    commands["support"] = subparsers.add_parser("support", parents=[common], help="Supporting affine minorant on the support block")
    support_at = commands["support-at"] = subparsers.add_parser("support-at", parents=[common], help="Supporting affine minorant at an interior point")
    support_at.add_argument("--point", type=int, help="Carrier element (default: support.p)")
    commands["subadditive"] = subparsers.add_parser("subadditive", parents=[common], help="Additive minorant of a subadditive map")
    commands["sublinear"] = subparsers.add_parser("sublinear", parents=[common], help="Linear minorant of a sampled sublinear map")
    commands["mt2"] = subparsers.add_parser("mt2", parents=[common], help="Compile a linear-combination structure (and solve it when p is given)")
    commands["ri-cert"] = subparsers.add_parser("ri-cert", parents=[common], help="Chain certificate for a relative interior point")
    commands["delta-support"] = subparsers.add_parser("delta-support", parents=[common], help="Delta-convex support on a sample, or verify a candidate")

    cone = commands["cone"] = subparsers.add_parser("cone", parents=[common], help="Cone diagnostics")
    cone.add_argument("action", choices=["dual", "sharp", "salient", "control", "member"])
    cone.add_argument("--cone", help="Name of a cone in the document")
    cone.add_argument("--norm", choices=list(const.NORM_TAGS), default="l1", help="Norm for control (default: l1)")
    cone.add_argument("--vector", help="Comma separated rationals for member")

    # instance goes last so that it follows each command's own positionals
    for sub in commands.values():
        sub.add_argument("instance", type=Path, help="JSON instance document")
    return parser


def _configure_logging(debug: bool) -> None:
    level = logging.DEBUG if debug else getattr(logging, const.LOG_LEVEL, logging.WARNING)
    logging.basicConfig(stream=sys.stderr, level=level, format=const.LOG_FORMAT, force=True)


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return const.EXIT_INVALID_INPUT

    _configure_logging(args.debug)
    try:
        doc = load_instance(args.instance, args.max_cells)
        payload, code = COMMANDS[args.command](doc, args)
    except KeyboardInterrupt:
        print("\nInterrupted by user.", file=sys.stderr)
        return const.EXIT_INTERRUPTED
    except OmegaError as err:
        if isinstance(err, (TheoremViolation, InternalError)):
            _LOGGER.error(f"{err.kind}: {err.message}")
        print(f"[omega_tool] {err.kind}: {err.message}", file=sys.stderr)
        emit(err.to_dict(), args.format)
        return err.exit_code
    except Exception as e:
        _LOGGER.exception(f"unexpected failure in {args.command}")
        err = InternalError(f"{type(e).__name__}: {e}")
        print(f"[omega_tool] {err.kind}: {err.message}", file=sys.stderr)
        emit(err.to_dict(), args.format)
        return err.exit_code

    payload["command"] = args.command
    emit(payload, args.format)
    return code


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
