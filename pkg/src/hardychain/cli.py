"""Command-line entry point.

Exit codes: 0 all checks pass, 1 verification mismatch, 2 usage error,
3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import math
import os
import sys
from pathlib import Path

from . import bell, hardy, lhv, verify
from .errors import ConvergenceError, HardyChainError, ResourceLimitError
from .io import bounds_record, dumps, frame_from_json, frame_to_json, load_json, save_json, sig9, state_from_json, state_to_json

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3
OUTPUT_DIR_ENV = "HARDYCHAIN_OUTPUT_DIR"
MAX_DIAG_N = 10


class UsageError(Exception):
    pass


def parse_n_range(text: str) -> list[int]:
    text = str(text).strip()
    try:
        if ".." in text:
            lo, hi = text.split("..")
            values = list(range(int(lo), int(hi) + 1))
        else:
            values = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad n range {text!r}; use e.g. 3, 2..6 or 2,4,6") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError(f"bad n range {text!r}")
    return values


def parse_indices(text: str) -> tuple[int, ...]:
    if text is None or str(text).strip() == "":
        return ()
    try:
        return tuple(int(t) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad index list {text!r}") from None


def _truthy(value) -> bool:
    return str(value).strip().lower() in ("1", "true", "yes", "on")


def read_config(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment; keys use flag names with - or _."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


# ---------------------------------------------------------------------------
# output


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([sig9(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _aligned(header: list[str], rows: list[list]) -> str:
    cells = [[str(c) for c in header]] + [[str(sig9(c)) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = [" | ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "-+-".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def emit(args, text: str, ext: str):
    target = args.output
    if target is None and os.environ.get(OUTPUT_DIR_ENV):
        target = Path(os.environ[OUTPUT_DIR_ENV]) / f"{args.command}.{ext}"
    if target is None:
        sys.stdout.write(text)
    else:
        Path(target).parent.mkdir(parents=True, exist_ok=True)
        Path(target).write_text(text)


def _ext(fmt: str) -> str:
    return {"json": "json", "csv": "csv", "text": "txt"}[fmt]


# ---------------------------------------------------------------------------
# commands


def _members_from_args(args) -> list[lhv.ChainMember]:
    if "@" in args.member:
        return [lhv.parse_member(args.member)]
    if args.n is None:
        raise UsageError("--n is required unless --member carries @n=")
    return [lhv.ChainMember(args.member, n, args.indices) for n in args.n]


def cmd_lhv_bounds(args) -> int:
    members = _members_from_args(args)
    records = []
    for m in members:
        rec = bounds_record(m.label, lhv.lhv_bounds_bruteforce(m, cap=args.cap))
        expected = (0, m.upper_bound) if m.upper_bound is not None else None
        rec["expected_min"] = None if expected is None else expected[0]
        rec["expected_max"] = None if expected is None else expected[1]
        rec["match"] = expected is None or (rec["min"], rec["max"]) == expected
        records.append(rec)
    cols = ["member", "min", "max", "expected_min", "expected_max", "match", "min_witness", "max_witness"]
    rows = [[r[c] for c in cols] for r in records]
    if args.format == "json":
        emit(args, dumps(sig9({"command": "lhv-bounds", "records": records})), "json")
    elif args.format == "csv":
        emit(args, _csv_text(cols, rows), "csv")
    else:
        emit(args, _aligned(cols, rows), "txt")
    bad = [r["member"] for r in records if not r["match"]]
    for label in bad:
        print(f"mismatch: {label} bounds differ from closed form", file=sys.stderr)
    return EXIT_MISMATCH if bad else EXIT_OK


def _exact_values(kind: str, n: int):
    if kind == "X" and n == 2:
        return bell.exact_x_eigenvalues_n2()
    if kind == "Xij" and n == 3:
        return bell.exact_xij_eigenvalues_n3()
    return None


def cmd_tables(args) -> int:
    kind = "X" if args.which == 1 else "Xij"
    indices = args.indices or (1, 2)
    if args.exact and not any(_exact_values(kind, n) for n in args.n):
        raise UsageError(f"no exact closed form is known for {kind} at n={args.n}")
    if max(args.n) > args.max_diag_n:
        raise ResourceLimitError(f"n={max(args.n)} exceeds diagonalization cap {args.max_diag_n}")
    reports, problems = [], []
    for n in args.n:
        rep = bell.spectrum_report(kind, n, indices, full=not args.no_full)
        entry = rep.to_dict()
        if not args.no_full and rep.max_match_distance >= 1e-8:
            problems.append(f"n={n}: root not in spectrum (distance {rep.max_match_distance:.3e})")
        if rep.reference is not None:
            for value, err in zip(rep.reference, rep.reference_errors):
                if err > bell.TABLE_TOL:
                    problems.append(f"n={n}: printed {value} has no root within {bell.TABLE_TOL} (off by {err:.3e})")
        if args.exact:
            exact = _exact_values(kind, n)
            if exact is not None:
                errs = [abs(a - b) for a, b in zip(sorted(exact), rep.roots)]
                entry["exact"] = list(exact)
                entry["exact_errors"] = errs
                if max(errs) > 1e-12:
                    problems.append(f"n={n}: exact roots off by {max(errs):.3e}")
        entry["violates_lower"] = rep.lower_violated
        entry["violates_upper"] = rep.upper_violated
        reports.append((rep, entry))

    if args.format == "json":
        emit(args, dumps(sig9({"command": "tables", "which": args.which, "reports": [e for _, e in reports],
                               "problems": problems})), "json")
    elif args.format == "csv":
        rows = []
        for rep, _ in reports:
            matched = rep.matched or [(r, float("nan"), float("nan")) for r in rep.roots]
            for root, eig, dist in matched:
                rows.append([rep.n, kind, root, eig, dist, rep.lhv_bounds[0], rep.lhv_bounds[1]])
        emit(args, _csv_text(["n", "kind", "root", "eigenvalue", "distance", "lhv_min", "lhv_max"], rows), "csv")
    else:
        emit(args, bell.format_table([r for r, _ in reports]) + "\n", "txt")
    for p in problems:
        print(f"mismatch: {p}", file=sys.stderr)
    return EXIT_MISMATCH if problems else EXIT_OK


def _variant(args) -> hardy.HardyVariant:
    return hardy.HardyVariant.parse(args.variant, args.n, args.indices)


def cmd_hardy(args) -> int:
    if args.hardy_command == "scan-n3":
        res = hardy.scan_stationary_surface_n3(args.resolution)
        data = {"command": "hardy scan-n3", "resolution": args.resolution, "u": res.u, "v": res.v,
                "value": res.value, "grid_value": res.grid_value}
        ok = abs(res.value - hardy.HARDY_N3_OPTIMUM) <= 1e-7
        _emit_record(args, data)
        print(f"scan-n3: max {res.value:.10f} at u={res.u:.8f}, v={res.v:.8f}", file=sys.stderr)
        return EXIT_OK if ok else EXIT_MISMATCH

    if args.hardy_command == "stationary":
        g = hardy.GOLDEN
        b = (g, 1.0, g) if args.b is None else args.b
        params = hardy.LocalUnitaryParams(tuple(math.sqrt(max(0.0, 1 - x * x)) for x in b), b)
        state = hardy.construct_stationary_state_n3(params)
        save_json(args.state_out, state_to_json(state))
        save_json(args.frame_out, frame_to_json(params.frame()))
        print(f"wrote {args.state_out} and {args.frame_out}", file=sys.stderr)
        return EXIT_OK

    if args.hardy_command == "check":
        state = state_from_json(load_json(args.state))
        frame = frame_from_json(load_json(args.frame))
        if args.n is None:
            args.n = state.n
        report = hardy.check_hardy(state, frame, _variant(args), args.tau)
        _emit_record(args, {"command": "hardy check", "variant": _variant(args).label, **report.to_dict()})
        print(f"check: target {report.target:.9g}, max zero term {report.max_zero_term:.3e}, "
              f"conclusion {report.conclusion:.9g}, lhv_violated={report.lhv_violated}", file=sys.stderr)
        return EXIT_OK if report.lhv_violated else EXIT_MISMATCH

    # max
    if args.n is None:
        raise UsageError("--n is required")
    config = hardy.OptimizerConfig(starts=args.starts, max_iter=args.max_iter, tolerance=args.tolerance,
                                   seed=args.seed, complex_search=args.complex, workers=args.workers)
    variant = _variant(args)
    try:
        result = hardy.maximize_violation(variant, config)
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        print(dumps(sig9(exc.diagnostics)), file=sys.stderr)
        return EXIT_MISMATCH
    if args.save_state:
        save_json(args.save_state, state_to_json(result.state))
    if args.save_frame:
        save_json(args.save_frame, frame_to_json(result.frame))
    _emit_record(args, {"command": "hardy max", "variant": variant.label, **result.to_dict()})
    print(f"max: target {result.best_value:.9g}, constraint residual {result.constraint_residual:.3e}, "
          f"{result.feasible_starts}/{config.starts} feasible starts", file=sys.stderr)
    return EXIT_OK


def _flatten(data, prefix=""):
    for k, v in data.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        elif isinstance(v, list):
            continue
        else:
            yield key, v


def _emit_record(args, data: dict):
    if args.format == "json":
        emit(args, dumps(sig9(data)), "json")
        return
    pairs = list(_flatten(data))
    if args.format == "csv":
        emit(args, _csv_text([k for k, _ in pairs], [[v for _, v in pairs]]), "csv")
    else:
        emit(args, _aligned(["field", "value"], [[k, v] for k, v in pairs]), "txt")


def cmd_verify(args) -> int:
    cfg = verify.VerifyConfig(n_max=args.n_max, samples=args.samples, seed=args.seed, cap=args.cap)
    only = [s.strip() for s in args.only.split(",")] if args.only else None
    try:
        results = verify.run(cfg, only)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    ok = all(r.passed for r in results)
    data = {"command": "verify", "passed": ok, "n_max": args.n_max, "samples": args.samples,
            "results": [r.to_dict() for r in results]}
    if args.format == "json":
        emit(args, dumps(sig9(data)), "json")
    else:
        rows = [[r.name, r.passed, r.checked] for r in results]
        text = _csv_text(["property", "passed", "checked"], rows) if args.format == "csv" \
            else _aligned(["property", "passed", "checked"], rows)
        emit(args, text, _ext(args.format))
    for r in results:
        if not r.passed:
            print(f"FAILED {r.name}: {r.detail}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_MISMATCH


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, fmt: str = "json"):
    p.add_argument("--format", choices=["json", "csv", "text"], default=fmt)
    p.add_argument("--output", "-o", default=None, help=f"output file (default: stdout, or ${OUTPUT_DIR_ENV})")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=lhv.DEFAULT_CAP, help="enumeration cap on n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hardychain", description=__doc__)
    parser.add_argument("--config", default=None, help="key = value file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lhv-bounds", help="exact classical bounds by vertex enumeration")
    p.add_argument("--member", required=True, help="X, Xij, Xijk, Xijkl or a full form like Xij(1,2)@n=5")
    p.add_argument("--indices", type=parse_indices, default=())
    p.add_argument("--n", type=parse_n_range, default=None)
    _common(p, "text")
    p.set_defaults(func=cmd_lhv_bounds)

    p = sub.add_parser("tables", help="eigenvalue tables of the X and X_ij operators")
    p.add_argument("--which", type=int, choices=[1, 2], required=True)
    p.add_argument("--n", type=parse_n_range, required=True)
    p.add_argument("--indices", type=parse_indices, default=())
    p.add_argument("--exact", action="store_true", help="compare with closed forms where known")
    p.add_argument("--no-full", action="store_true", help="skip full diagonalization")
    p.add_argument("--max-diag-n", type=int, default=MAX_DIAG_N)
    _common(p, "text")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("hardy", help="Hardy-type constraint checks and optimization")
    hsub = p.add_subparsers(dest="hardy_command", required=True)
    for name in ("check", "max"):
        hp = hsub.add_parser(name)
        hp.add_argument("--variant", default="standard", help="standard, i, ii or iii")
        hp.add_argument("--indices", type=parse_indices, default=())
        hp.add_argument("--n", type=int, default=None)
        _common(hp)
        hp.set_defaults(func=cmd_hardy)
        if name == "check":
            hp.add_argument("--state", required=True)
            hp.add_argument("--frame", required=True)
            hp.add_argument("--tau", type=float, default=hardy.DEFAULT_TAU)
        else:
            hp.add_argument("--starts", type=int, default=hardy.OptimizerConfig.starts)
            hp.add_argument("--max-iter", type=int, default=hardy.OptimizerConfig.max_iter)
            hp.add_argument("--tolerance", type=float, default=hardy.OptimizerConfig.tolerance)
            hp.add_argument("--workers", type=int, default=1)
            hp.add_argument("--complex", action="store_true", help="search complex amplitudes and axes")
            hp.add_argument("--save-state", default=None)
            hp.add_argument("--save-frame", default=None)
    hp = hsub.add_parser("scan-n3")
    hp.add_argument("--resolution", type=int, default=1000)
    _common(hp)
    hp.set_defaults(func=cmd_hardy)
    hp = hsub.add_parser("stationary", help="write the three-qubit stationary state and its frame")
    hp.add_argument("--b", type=lambda s: tuple(float(x) for x in s.split(",")), default=None,
                    help="b1,b2,b3 (default: golden-ratio example)")
    hp.add_argument("--state-out", required=True)
    hp.add_argument("--frame-out", required=True)
    _common(hp)
    hp.set_defaults(func=cmd_hardy)

    p = sub.add_parser("verify", help="run the property suite")
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--only", default=None, help="comma-separated: " + ", ".join(verify.PROPERTIES))
    p.add_argument("--samples", type=int, default=100)
    _common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def _find_subparser(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.ArgumentParser:
    """Innermost subparser selected by argv, used to install config-file defaults."""
    current = parser
    for tok in argv:
        actions = [a for a in current._actions if isinstance(a, argparse._SubParsersAction)]
        if actions and tok in actions[0].choices:
            current = actions[0].choices[tok]
    return current


def _apply_config(parser, argv, path):
    values = read_config(path)
    target = _find_subparser(parser, argv)
    known = {a.dest: a for a in target._actions}
    defaults = {}
    for key, value in values.items():
        action = known.get(key)
        if action is None:
            raise UsageError(f"config key {key!r} is not an option of this command")
        action.required = False
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = _truthy(value)
        elif action.type is not None:
            defaults[key] = action.type(value)
        else:
            defaults[key] = value
    target.set_defaults(**defaults)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("--config", default=None)
        known, _ = pre.parse_known_args(argv)
        if known.config:
            _apply_config(parser, argv, known.config)
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0) if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, argparse.ArgumentTypeError, OSError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except HardyChainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
