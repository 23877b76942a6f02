"""Command-line driver: pi0, degree, separate and the verification suites.

Exit codes: 0 all checks pass, 2 a check failed, 3 a cap was exceeded,
4 invalid input.  Machine-readable reports use sorted keys and carry no
timings, so equal inputs, seed and caps give byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import CapExceeded, PreconditionError, StructuralError, ValidationError
from .invariants import InvariantTable, MuContext, separate, simp_degree
from .refs import resolve
from .simplicial.crew import Crew
from .simplicial.function_complex import pi0
from .suites import SUITES, Caps, jsonable, run_checks, suite_checks

EXIT_OK, EXIT_FAIL, EXIT_CAP, EXIT_INVALID = 0, 2, 3, 4
THREADS_ENV = "FINDEG_THREADS"


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"


def _emit(args, report: dict, text_lines: list[str]):
    if args.format == "json":
        sys.stdout.write(dumps(report))
    else:
        sys.stdout.write("\n".join(text_lines) + "\n")


def _header(args, caps: Caps) -> dict:
    echo = {k: v for k, v in sorted(vars(args).items())
            if k not in ("threads", "format", "out", "func") and v is not None}
    return {"command": echo, "seed": args.seed, "caps": caps.to_json()}


def _context(args, caps: Caps):
    K = resolve(args.source, caps)
    if not isinstance(K, Crew):
        raise ValidationError("the source must be a crew")
    T = resolve(args.target, caps)
    return K, T, pi0(K, T, caps.maps)


def _mu_context(args, caps: Caps, P) -> MuContext:
    p = getattr(args, "p", None)
    if p is None and P.slice.p is None:
        raise ValidationError("the target is not a module; pass --p")
    return MuContext(P, p, cap=caps.simplices)


def cmd_pi0(args, caps: Caps) -> int:
    K, T, P = _context(args, caps)
    result = P.summary()
    if getattr(T, "is_module", False):
        result["module"]["add_table"] = P.add_table()
    report = _header(args, caps) | {"result": result}
    lines = [f"pi0 [{args.source}, {args.target}]",
             f"  maps: {result['maps']}  homotopies: {result['homotopies']}",
             f"  classes: {result['classes']}",
             f"  representatives: {', '.join(result['representatives'])}"]
    if "module" in result:
        m = result["module"]
        lines.append(f"  module: F_{m['p']}^{m['dim']}, zero class {m['zero']}")
        names = result["representatives"]
        for a, row in zip(names, m["add_table"]):
            lines.append(f"    {a} + : " + " ".join(names[c] for c in row))
    if "cross_check" in result:
        lines.append(f"  chain-level cross-check: {'agrees' if result['cross_check'] else 'DISAGREES'}")
    _emit(args, report, lines)
    if P.cross_check is not None and not P.cross_check.holds:
        return EXIT_FAIL
    return EXIT_OK


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ValidationError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None


def cmd_degree(args, caps: Caps) -> int:
    _, _, P = _context(args, caps)
    ctx = _mu_context(args, caps, P)
    table = InvariantTable.from_json(P, _read_json(args.invariant), ctx.p)
    res = simp_degree(ctx, table, caps.r_max)
    report = _header(args, caps) | {"result": res.to_json()}
    deg = res.to_json()["simplicial_degree"]
    lines = [f"degree [{args.source}, {args.target}] {args.invariant}",
             f"  simplicial degree: {deg}"]
    if res.digest:
        lines.append(f"  functional digest: {res.digest}")
    _emit(args, report, lines)
    return EXIT_OK


def cmd_separate(args, caps: Caps) -> int:
    _, _, P = _context(args, caps)
    ctx = _mu_context(args, caps, P)
    try:
        u1, u2 = P.class_index(args.class1), P.class_index(args.class2)
    except KeyError as exc:
        raise ValidationError(f"unknown vertex {exc.args[0]!r}") from None
    if u1 == u2:
        raise ValidationError(f"{args.class1} and {args.class2} lie in the same class")
    found = separate(ctx, u1, u2, caps.r_max)
    if found is None:
        result = {"separating_degree": "inseparable at r_max", "r_max": caps.r_max}
        lines = [f"separate {args.class1} {args.class2}: inseparable at r_max = {caps.r_max}"]
        code = EXIT_FAIL
    else:
        r, table = found
        result = {"separating_degree": r, "table": table.to_json()}
        lines = [f"separate {args.class1} {args.class2}: degree {r}",
                 "  table: " + json.dumps(table.to_json()["values"], sort_keys=True)]
        if args.out:
            Path(args.out).write_text(dumps(table.to_json()))
            lines.append(f"  written to {args.out}")
        code = EXIT_OK
    _emit(args, _header(args, caps) | {"result": result}, lines)
    return code


def suite_report(name: str, seed: int, caps: Caps, trials: int = 50, threads: int = 1,
                 header: dict | None = None) -> tuple[dict, list]:
    results = run_checks(suite_checks(name, trials), seed, caps, threads)
    counts = {s: sum(r.status == s for r in results) for s in ("pass", "fail", "cap")}
    report = dict(header or {"command": {"suite": name, "trials": trials}, "seed": seed, "caps": caps.to_json()})
    report["checks"] = [r.to_json() for r in results]
    report["summary"] = counts | {"total": len(results)}
    return report, results


def suite_exit_code(results) -> int:
    if any(r.status == "fail" for r in results):
        return EXIT_FAIL
    if any(r.status == "cap" for r in results):
        return EXIT_CAP
    return EXIT_OK


def cmd_suite(args, caps: Caps) -> int:
    report, results = suite_report(args.name, args.seed, caps, args.trials, args.threads, _header(args, caps))
    lines = [f"suite {args.name} seed={args.seed}"]
    for r in results:
        lines.append(f"{r.status.upper():5} {r.name}  ({r.seconds:.2f}s)")
        if r.status != "pass":
            lines.append("      " + json.dumps(jsonable(r.detail), sort_keys=True)[:400])
            if r.witness is not None:
                lines.append(f"      witness: {r.witness!r}")
    s = report["summary"]
    lines.append(f"{s['pass']}/{s['total']} passed, {s['fail']} failed, {s['cap']} over caps")
    if args.out:
        Path(args.out).write_text(dumps(report))
    _emit(args, report, lines)
    return suite_exit_code(results)


def _threads_default() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--caps", help="comma list: maps=N,simplices=N,levels=N,r_max=N")
    common.add_argument("--r-max", type=int, dest="r_max", help="largest r tried (overrides caps)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--out", help="write the JSON report (or the separating table) here")
    common.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default ${THREADS_ENV} or 1)")

    pair = argparse.ArgumentParser(add_help=False)
    pair.add_argument("--source", required=True, help="crew ref, e.g. sphere:1 or file.json")
    pair.add_argument("--target", required=True, help="target ref, e.g. em:2,1")
    pair.add_argument("--p", type=int, help="prime for crew targets")

    ap = argparse.ArgumentParser(prog="findeg", description="Finite-degree homotopy invariants at desk scale.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("pi0", parents=[common, pair], help="homotopy classes of maps")
    s.set_defaults(func=cmd_pi0)
    s = sub.add_parser("degree", parents=[common, pair], help="simplicial degree of an invariant table")
    s.add_argument("--invariant", required=True, help='JSON file {"values": {"b0": 0, ...}}')
    s.set_defaults(func=cmd_degree)
    s = sub.add_parser("separate", parents=[common, pair], help="separate two classes by a low-degree invariant")
    s.add_argument("--class1", required=True)
    s.add_argument("--class2", required=True)
    s.set_defaults(func=cmd_separate)
    s = sub.add_parser("suite", parents=[common], help="run a verification suite")
    s.add_argument("name", choices=SUITES + ("all",))
    s.add_argument("--trials", type=int, default=50)
    s.set_defaults(func=cmd_suite)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.threads is None:
        args.threads = _threads_default()
    try:
        caps = Caps.parse(args.caps)
        if args.r_max is not None:
            caps.r_max = args.r_max
        return args.func(args, caps)
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValidationError, StructuralError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PreconditionError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
