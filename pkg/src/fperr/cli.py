"""Command-line front end: ``fperr <subcommand> ...``."""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .catalog import DangerCatalog, condition_number
from .corpus import lookup, registry
from .detect import DetectionConfig, run_detection
from .exceptions import DomainError, FPErrError, InvalidRecord, OracleDomainError, UnknownFunction
from .newton import SolverConfig, path_to_csv
from .oracle import OracleConfig, evaluate_high_precision, format_decimal, relative_error
from .report import RunReport, emit_report
from .targets import enumerate_targets
from .trace import SiteId, evaluate_traced, trace_to_csv
from .validation import PerturbationConfig, is_significant

SEED_ENV = "FPERR_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=None, help=f"RNG seed (default ${SEED_ENV} or 0)")
    g.add_argument("--json", metavar="PATH", help="write a JSON report / result here")
    g.add_argument("--csv", metavar="PATH", help="write a CSV table here")
    g.add_argument("--precision-bits", type=int, default=256, help="oracle precision")
    g.add_argument("--cond-threshold", type=float, default=1e5)
    g.add_argument("--delta", type=float, default=1e-14, help="perturbation size")
    g.add_argument("--max-iter", type=int, default=20, help="Newton iteration cap")
    g.add_argument("--fail-on-bugs", action="store_true", help="exit 2 if any bug is confirmed")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="fperr", description="Find inputs that trigger large floating-point errors.")
    parser.add_argument("--version", action="version", version=f"fperr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("list", parents=[common], help="list corpus functions")
    sub.add_parser("catalog", parents=[common], help="show condition formulas and danger values")

    for name, text in (("trace", "run one input and show every operation"),
                       ("targets", "list the residual targets at an input"),
                       ("validate", "compare double and high-precision results")):
        sp = sub.add_parser(name, parents=[common], help=text)
        sp.add_argument("function")
        sp.add_argument("--input", "--probe", dest="input", type=float, nargs="+", required=True)

    sp = sub.add_parser("solve", parents=[common], help="Newton on one site's residual")
    sp.add_argument("function")
    sp.add_argument("--site", type=int, required=True, help="operation index")
    sp.add_argument("--target", type=int, default=0, help="which danger value of the site (default 0)")
    sp.add_argument("--from", dest="start", type=float, nargs="+", required=True)

    sp = sub.add_parser("detect", parents=[common], help="search for error-triggering inputs")
    sp.add_argument("function", help="function id or 'all'")
    sp.add_argument("--jobs", type=int, default=1, help="worker processes for 'all'")
    sp.add_argument("--include-overflow", action="store_true", help="also target exp/sinh/cosh overflow")
    return parser


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _configs(args):
    try:
        solver = SolverConfig(max_iter=args.max_iter)
        catalog = DangerCatalog(include_overflow=getattr(args, "include_overflow", False))
        cfg = DetectionConfig(rng_seed=_seed(args), solver=solver, cond_threshold=args.cond_threshold, catalog=catalog)
        pcfg = PerturbationConfig(delta=args.delta, cond_threshold=args.cond_threshold)
        ocfg = OracleConfig(precision_bits=args.precision_bits)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return cfg, pcfg, ocfg


def _function(fid):
    try:
        return lookup(fid).function
    except UnknownFunction:
        known = ", ".join(e.id for e in registry())
        raise UsageError(f"unknown function {fid!r} (known: {known})") from None


def _inputs(f, values):
    if len(values) != f.arity:
        raise UsageError(f"{f.id} takes {f.arity} input(s), got {len(values)}")
    return tuple(values)


def _fmt(v: float) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def _table(rows, header):
    rows = [[str(c) for c in r] for r in rows]
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    line = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()  # noqa: E731
    out = [line(header), line(["-" * w for w in widths])]
    out.extend(line(r) for r in rows)
    return "\n".join(out)


def _write(path, text):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def cmd_list(args) -> int:
    rows = []
    for e in registry():
        f = e.function
        sites = ",".join(str(s.op_index) for s, _ in e.known_bug_sites) or "-"
        rows.append([f.id, f.arity, f.description, sites])
    print(_table(rows, ["id", "inputs", "expression", "known bug sites"]))
    return 0


def cmd_catalog(args) -> int:
    catalog = DangerCatalog(include_overflow=getattr(args, "include_overflow", False))
    rows = []
    for op, specs, text in catalog.rows():
        rows.append([op.value, text, ", ".join(str(s) for s in specs) or "-"])
    print(_table(rows, ["op", "condition number", "danger targets"]))
    return 0


def cmd_trace(args) -> int:
    f = _function(args.function)
    inputs = _inputs(f, args.input)
    try:
        result, trace = evaluate_traced(f, inputs)
    except DomainError as exc:
        print(f"domain error at {exc.site}: {exc}", file=sys.stderr)
        return 1
    rows = []
    for r in trace.records:
        try:
            gamma = condition_number(r)
        except InvalidRecord:
            gamma = math.nan
        flag = "*" if gamma > args.cond_threshold else ""
        rows.append([r.site.op_index, r.op.value, ", ".join(_fmt(v) for v in r.operands), _fmt(r.result),
                     f"{gamma:.3e}", flag])
    print(_table(rows, ["site", "op", "operands", "result", "condition", ""]))
    print(f"output = {result!r}")
    if args.csv:
        _write(args.csv, trace_to_csv(trace))
    return 0


def cmd_targets(args) -> int:
    f = _function(args.function)
    inputs = _inputs(f, args.input)
    cfg, _, _ = _configs(args)
    targets = enumerate_targets(f, inputs, cfg.catalog)
    per_site = {}
    rows = []
    for t in targets:
        k = per_site.get(t.site, 0)
        per_site[t.site] = k + 1
        rows.append([t.site.op_index, k, str(t.spec)])
    print(_table(rows, ["site", "target", "danger"]))
    return 0


def cmd_solve(args) -> int:
    from .detect import solve_target

    f = _function(args.function)
    start = _inputs(f, args.start)
    cfg, _, _ = _configs(args)
    site = SiteId(f.id, args.site)
    specs = [t for t in enumerate_targets(f, start, cfg.catalog) if t.site == site]
    if not specs:
        raise UsageError(f"site {args.site} of {f.id} has no danger target at this start point")
    if not 0 <= args.target < len(specs):
        raise UsageError(f"site {args.site} has {len(specs)} target(s)")
    target = specs[args.target]
    out = solve_target(f, target, start, cfg.solver)
    rows = [[k, ", ".join(_fmt(v) for v in xs), _fmt(g)] for k, (xs, g) in enumerate(out.path)]
    print(f"target: {target}")
    print(_table(rows, ["step", "x", "residual"]))
    print(f"status = {out.status}  iterations = {out.iterations}")
    if args.csv:
        _write(args.csv, path_to_csv(out))
    return 0


def cmd_validate(args) -> int:
    f = _function(args.function)
    inputs = _inputs(f, args.input)
    _, pcfg, ocfg = _configs(args)
    try:
        plain, trace = evaluate_traced(f, inputs)
    except DomainError as exc:
        print(f"domain error at {exc.site}: {exc}", file=sys.stderr)
        return 1
    for r in trace.records:
        print(f"  site {r.site.op_index} {r.op.value:<5} = {r.result!r}")
    print(f"double result    = {plain!r}")
    try:
        exact = evaluate_high_precision(f, inputs, ocfg)
    except OracleDomainError as exc:
        print(f"oracle domain error: {exc}", file=sys.stderr)
        return 1
    err = relative_error(plain, exact)
    print(f"oracle result    = {format_decimal(exact, 40)}")
    print(f"relative error   = {err:.6e}")
    print(f"significant      = {'yes' if is_significant(err) else 'no'} (threshold 1e-3)")
    return 0


def _detect_one(fid, cfg, pcfg, ocfg):
    return run_detection(lookup(fid).function, cfg, pcfg, ocfg)


def cmd_detect(args) -> int:
    cfg, pcfg, ocfg = _configs(args)
    if args.function == "all":
        ids = [e.id for e in registry()]
    else:
        ids = [_function(args.function).id]
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    t0 = time.perf_counter()
    if args.jobs > 1 and len(ids) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_detect_one, ids, *([x] * len(ids) for x in (cfg, pcfg, ocfg))))
    else:
        results = [_detect_one(fid, cfg, pcfg, ocfg) for fid in ids]
    total = time.perf_counter() - t0

    rows, n_bugs = [], 0
    for r in results:
        for b in r.bugs:
            n_bugs += 1
            rows.append([r.function_id, b.site.op_index, b.op, ", ".join(_fmt(v) for v in b.witness),
                         f"{b.condition_number:.3e}", f"{b.perturbed_rel_error:.3e}",
                         f"{b.oracle_rel_error:.3e}", "yes" if b.significant else "NO"])
    print(_table(rows, ["function", "site", "op", "witness", "condition", "perturbed err", "oracle err", "significant"]))
    weak = sum(1 for r in results for b in r.bugs if not b.significant)
    print(f"{n_bugs} bug(s) in {len(results)} function(s), seed {cfg.rng_seed}, {total:.2f} s")
    if weak:
        print(f"note: {weak} confirmed bug(s) have oracle error <= 1e-3")

    report = RunReport.build(results, cfg, pcfg, ocfg, {"total": total})
    if args.json:
        emit_report(report, args.json, "json")
    if args.csv:
        emit_report(report, args.csv, "csv")
    if args.fail_on_bugs and n_bugs:
        return 2
    return 0


COMMANDS = {
    "list": cmd_list, "catalog": cmd_catalog, "trace": cmd_trace, "targets": cmd_targets,
    "solve": cmd_solve, "validate": cmd_validate, "detect": cmd_detect,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (FPErrError, OSError) as exc:
        print(f"fperr: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
