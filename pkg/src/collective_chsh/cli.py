"""Command-line front end.

Subcommands::

    collective-chsh bound --pairs 5 --x 0.5 --strategy xor
    collective-chsh sweep --pairs 1,2,3,4 --x-step 0.01 --strategy optimize --out curves.csv
    collective-chsh crossover --pairs 3
    collective-chsh verify --cases 50

Results go to stdout (or ``--out``) and are byte-identical for identical
flags.  The run manifest, which carries the wall time, goes to stderr or to
a companion ``*.manifest.json`` file so it never perturbs the results.

Exit codes: 0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import logging
import math
import sys
import time
from pathlib import Path

from . import __version__
from .chsh import correlation_matrix, horodecki_bound, xor_bound_closed_form
from .optimize import (
    CrossoverNotFoundError,
    DegenerateRowsError,
    OptimizationConfig,
    crossover,
    maximize_bound,
    sweep,
)
from .oracle import run_equivalence_suite, run_invariance_suite
from .protocol import DegenerateSelectionError, xor_reduced_closed_form

CSV_HEADER = "n,x,strategy,bound,success_prob,violation"
NUMERICAL_ERRORS = (DegenerateSelectionError, DegenerateRowsError, ArithmeticError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def fmt(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def _manifest(command: str, params: dict, seed, payload: str, started: float) -> dict:
    return {
        "command": command,
        "parameters": params,
        "seed": seed,
        "version": __version__,
        "wall_time_s": round(time.perf_counter() - started, 3),
        "output_sha256": hashlib.sha256(payload.encode()).hexdigest(),
    }


def _emit(payload: str, manifest: dict, manifest_path: str | None, out=None):
    out = out or sys.stdout
    out.write(payload)
    text = json.dumps(manifest, indent=2) + "\n"
    if manifest_path:
        Path(manifest_path).write_text(text, encoding="utf-8")
    else:
        sys.stderr.write(text)


def _config(args) -> OptimizationConfig:
    return OptimizationConfig(restarts=args.restarts, seed=args.seed)


def _bound_record(args) -> dict:
    n, x = args.pairs, args.x
    if args.strategy == "xor":
        state = xor_reduced_closed_form(n, x)
        bell = horodecki_bound(correlation_matrix(state.rho_new))
        label = "xor"
        prob = state.success_probability
    else:
        res = maximize_bound(n, x, _config(args))
        bell, label, prob = res.bell, res.strategy_label, res.success_probability
    return {
        "n": n,
        "x": x,
        "strategy": args.strategy,
        "strategy_label": label,
        "bound": bell.bound,
        "m_value": bell.m_value,
        "success_prob": prob,
        "xor_bound": xor_bound_closed_form(n, x),
        "violation": bell.bound > 2.0,
    }


def cmd_bound(args) -> int:
    started = time.perf_counter()
    if not 1 <= args.pairs <= 5:
        raise UsageError("--pairs must be between 1 and 5")
    if not 0.0 <= args.x <= 1.0:
        raise UsageError("--x must lie in [0, 1]")
    rec = _bound_record(args)
    if args.format == "json":
        payload = json.dumps(rec, indent=2) + "\n"
    else:
        payload = CSV_HEADER + "\n" + ",".join(
            fmt(rec[k]) for k in ("n", "x", "strategy", "bound", "success_prob", "violation")
        ) + "\n"
    params = {k: getattr(args, k) for k in ("pairs", "x", "strategy", "restarts", "format")}
    _emit(payload, _manifest("bound", params, args.seed, payload, started), args.manifest)
    return 0


def _x_grid(x_min: float, x_max: float, step: float) -> list[float]:
    if not (0.0 <= x_min < x_max <= 1.0):
        raise UsageError("need 0 <= x-min < x-max <= 1")
    if step <= 0:
        raise UsageError("--x-step must be positive")
    count = int(math.floor((x_max - x_min) / step + 1e-9)) + 1
    return [round(x_min + i * step, 10) for i in range(count)]


def _parse_pairs(text: str) -> list[int]:
    try:
        ns = sorted({int(t) for t in text.split(",") if t.strip()})
    except ValueError:
        raise UsageError(f"bad --pairs list {text!r}") from None
    if not ns or ns[0] < 1 or ns[-1] > 5:
        raise UsageError("--pairs entries must be between 1 and 5")
    return ns


def sweep_csv(rows, strategy: str) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in rows:
        if strategy in ("xor", "both"):
            buf.write(
                ",".join(
                    [fmt(r.n), fmt(r.x), "xor", fmt(r.xor_bound), fmt(r.success_probability),
                     fmt(r.xor_bound > 2.0)]
                )
                + "\n"
            )
        if strategy in ("optimize", "both"):
            ok = r.opt_bound is not None
            buf.write(
                ",".join(
                    [fmt(r.n), fmt(r.x), "optimize", fmt(r.opt_bound),
                     fmt(r.opt_success_probability), fmt(r.opt_bound > 2.0) if ok else "NA"]
                )
                + "\n"
            )
    return buf.getvalue()


def sweep_columns(rows, strategy: str) -> str:
    """gnuplot blocks of ``x bound``, one per (n, strategy), separated by two blank lines."""
    blocks = []
    strategies = ["xor", "optimize"] if strategy == "both" else [strategy]
    for s in strategies:
        for n in sorted({r.n for r in rows}):
            lines = [f"# n={n} strategy={s}"]
            for r in rows:
                if r.n != n:
                    continue
                val = r.xor_bound if s == "xor" else r.opt_bound
                lines.append(f"{fmt(r.x)} {fmt(val)}")
            blocks.append("\n".join(lines))
    return "\n\n\n".join(blocks) + "\n"


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    ns = _parse_pairs(args.pairs)
    xs = _x_grid(args.x_min, args.x_max, args.x_step)
    rows = sweep(ns, xs, _config(args), args.strategy)
    payload = sweep_csv(rows, args.strategy)
    params = {
        "pairs": ns, "x_min": args.x_min, "x_max": args.x_max, "x_step": args.x_step,
        "strategy": args.strategy, "restarts": args.restarts,
    }
    manifest = _manifest("sweep", params, args.seed, payload, started)
    if args.out:
        out = Path(args.out)
        out.write_text(payload, encoding="utf-8", newline="\n")
        out.with_suffix(".dat").write_text(sweep_columns(rows, args.strategy), encoding="utf-8")
        out.with_suffix(".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    else:
        _emit(payload, manifest, args.manifest)
    return 0


def cmd_crossover(args) -> int:
    started = time.perf_counter()
    if args.pairs not in (2, 3, 4):
        raise UsageError("--pairs must be 3 or 4 (2 runs as a diagnostic)")
    config = _config(args)
    try:
        x_star = crossover(args.pairs, config, tol=args.tol, resolution=args.resolution)
    except CrossoverNotFoundError as exc:
        payload = json.dumps({"n": args.pairs, "x_star": None, "found": False}, indent=2) + "\n"
        params = {"pairs": args.pairs, "tol": args.tol, "restarts": args.restarts}
        _emit(payload, _manifest("crossover", params, args.seed, payload, started), args.manifest)
        print(f"crossover not found: {exc}", file=sys.stderr)
        return 2
    payload = json.dumps(
        {"n": args.pairs, "x_star": x_star, "found": True, "resolution": args.resolution}, indent=2
    ) + "\n"
    params = {"pairs": args.pairs, "tol": args.tol, "restarts": args.restarts}
    _emit(payload, _manifest("crossover", params, args.seed, payload, started), args.manifest)
    return 0


def cmd_verify(args) -> int:
    started = time.perf_counter()
    if args.cases < 1:
        raise UsageError("--cases must be >= 1")
    eq = run_equivalence_suite(args.seed, args.cases)
    inv = run_invariance_suite(args.seed, args.cases)
    report = {
        "passed": eq.passed and inv.passed,
        "equivalence": eq.to_dict(),
        "invariance": inv.to_dict(),
    }
    payload = json.dumps(report, indent=2) + "\n"
    params = {"cases": args.cases}
    _emit(payload, _manifest("verify", params, args.seed, payload, started), args.manifest)
    return 0 if report["passed"] else 2


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="collective-chsh", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, restarts=64):
        sp.add_argument("--restarts", type=int, default=restarts)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--manifest", help="write the run manifest here instead of stderr")

    b = sub.add_parser("bound", help="CHSH bound for n pairs at one singlet fraction")
    b.add_argument("--pairs", type=int, required=True)
    b.add_argument("--x", type=float, required=True)
    b.add_argument("--strategy", choices=("xor", "optimize"), default="xor")
    b.add_argument("--format", choices=("json", "csv"), default="json")
    common(b)
    b.set_defaults(func=cmd_bound)

    s = sub.add_parser("sweep", help="bounds on an (n, x) grid as CSV")
    s.add_argument("--pairs", default="1,2,3,4")
    s.add_argument("--x-min", type=float, default=0.0)
    s.add_argument("--x-max", type=float, default=1.0)
    s.add_argument("--x-step", type=float, default=0.01)
    s.add_argument("--strategy", choices=("xor", "optimize", "both"), default="xor")
    s.add_argument("--out", help="CSV path; also writes .dat (gnuplot) and .manifest.json")
    common(s)
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("crossover", help="singlet fraction where XOR rows stop being optimal")
    c.add_argument("--pairs", type=int, required=True)
    c.add_argument("--tol", type=float, default=1e-4)
    c.add_argument("--resolution", type=float, default=0.005)
    common(c, restarts=128)
    c.set_defaults(func=cmd_crossover)

    v = sub.add_parser("verify", help="run the oracle equivalence and invariance suites")
    v.add_argument("--seed", type=int, default=1)
    v.add_argument("--cases", type=int, default=50)
    v.add_argument("--manifest", help="write the run manifest here instead of stderr")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except NUMERICAL_ERRORS as exc:
        print(f"collective-chsh: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (UsageError, ValueError) as exc:
        print(f"collective-chsh: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
