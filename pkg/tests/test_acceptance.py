"""Acceptance gate: eight criteria at their stated tolerances.

Every test records a single ``PASS``/``FAIL`` line that is printed in the
terminal summary, then asserts.  Runtime is a few minutes, dominated by the
crossover searches and the optimized sweep.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES

from collective_chsh import cli
from collective_chsh.chsh import correlation_matrix, horodecki_bound, xor_bound_closed_form
from collective_chsh.optimize import OptimizationConfig, maximize_bound, sweep
from collective_chsh.oracle import dense_reduce, direct_chsh_max, run_equivalence_suite, run_invariance_suite
from collective_chsh.protocol import reduce_pairs, tie_partner_rows, xor_reduced_closed_form, xor_rows
from collective_chsh.states import make_werner


def record(number: int, title: str, checks: list[tuple[bool, str]], key: float | None = None):
    ok = all(c for c, _ in checks)
    detail = "; ".join(msg for _, msg in checks)
    ACCEPTANCE_LINES[number if key is None else key] = f"[{'PASS' if ok else 'FAIL'}] criterion {number} {title}: {detail}"
    failed = [msg for c, msg in checks if not c]
    assert ok, failed


def bound_of(state) -> float:
    return horodecki_bound(correlation_matrix(state.rho_new)).bound


def crossing(xs, ys, level=2.0):
    """First grid crossing of ``level`` by linear interpolation, or None."""
    for i in range(len(xs) - 1):
        if ys[i] <= level < ys[i + 1]:
            return xs[i] + (level - ys[i]) * (xs[i + 1] - xs[i]) / (ys[i + 1] - ys[i])
    return None


def test_criterion_1_single_pair_line():
    rows = xor_rows(1)
    worst = 0.0
    for x in np.linspace(0.0, 1.0, 11):
        b = bound_of(reduce_pairs([make_werner(x)], rows, tie_partner_rows(rows)))
        worst = max(worst, abs(b - 2 * math.sqrt(2) * x))
    root = None
    lo, hi = 0.5, 1.0
    for _ in range(60):
        mid = (lo + hi) / 2
        val = bound_of(reduce_pairs([make_werner(mid)], rows, tie_partner_rows(rows)))
        lo, hi = (mid, hi) if val < 2.0 else (lo, mid)
        root = (lo + hi) / 2
    record(1, "single-pair line", [
        (worst <= 1e-9, f"max |bound - 2*sqrt2*x| = {worst:.2e} (tol 1e-9)"),
        (abs(root - 1 / math.sqrt(2)) <= 1e-6, f"crossing at x = {root:.9f}"),
    ])


def test_criterion_2_two_pair_optimality():
    started = time.perf_counter()
    worst, labels = 0.0, set()
    for x in np.round(np.arange(0.1, 0.95, 0.1), 10):
        res = maximize_bound(2, float(x), OptimizationConfig())
        worst = max(worst, abs(res.bell.bound - 4 * x / math.sqrt(1 + x * x)))
        labels.add(res.strategy_label)
    elapsed = time.perf_counter() - started
    record(2, "n=2 optimality", [
        (worst <= 1e-6, f"max deviation from 4x/sqrt(1+x^2) = {worst:.2e} (tol 1e-6)"),
        (labels == {"xor_equivalent"}, f"labels {sorted(labels)}"),
        (elapsed <= 120, f"runtime {elapsed:.0f} s"),
    ])


def test_criterion_3_five_pair_violation():
    n, x = 5, 0.5
    pairs = [make_werner(x)] * n
    rows = xor_rows(n)
    partner = tie_partner_rows(rows)
    closed = xor_reduced_closed_form(n, x)
    fast = reduce_pairs(pairs, rows, partner)
    dense = dense_reduce(pairs, rows, partner)
    values = [xor_bound_closed_form(n, x), bound_of(closed), bound_of(fast), bound_of(dense)]
    spread = max(values) - min(values)
    direct = direct_chsh_max(fast.rho_new)
    record(3, "n=5 violation at x=0.5", [
        (values[2] > 2.0, f"bound {values[2]:.7f} > 2"),
        # exact value 2.00087323...; the quoted 2.0008733 is one unit high in its last digit
        (abs(values[2] - 2.0008733) <= 1e-7, f"value {values[2]:.10f} vs 2.0008733 (one unit in 7th decimal)"),
        (spread <= 1e-12, f"closed/fast/dense spread {spread:.1e} (tol 1e-12)"),
        (-1e-9 <= values[2] - direct <= 1e-3, f"direct settings {direct:.7f}"),
        (abs(fast.success_probability - 0.0148926) <= 5e-8
         and abs(fast.success_probability - 488 / 32768) <= 1e-12,
         f"success probability {fast.success_probability:.7f}"),
    ])


@pytest.mark.parametrize("n,target", [(3, 0.57), (4, 0.52)])
def test_criterion_4_crossover(n, target, capsys):
    started = time.perf_counter()
    code = cli.main(["crossover", "--pairs", str(n), "--restarts", "128"])
    out, _ = capsys.readouterr()
    elapsed = time.perf_counter() - started
    x_star = json.loads(out)["x_star"] if code == 0 else None
    checks = [(code == 0 and x_star is not None and abs(x_star - target) <= 0.03,
               f"x* = {x_star} (target {target} +- 0.03)"),
              (elapsed <= 480, f"runtime {elapsed:.0f} s")]
    record(4, f"crossover n={n}", checks, key=4 + n / 10)


def test_criterion_5_curve_properties():
    xs = [round(0.01 * i, 10) for i in range(101)]
    rows = sweep([1, 2, 3, 4], xs, OptimizationConfig(restarts=1), "optimize")
    curves = {n: np.array([r.opt_bound for r in rows if r.n == n]) for n in (1, 2, 3, 4)}
    interior = slice(1, 100)
    ordered = all(np.all(curves[n + 1][interior] > curves[n][interior]) for n in (1, 2, 3))
    worst_drop = max(float(np.max(-np.diff(curves[n]))) for n in curves)
    thresholds = [crossing(xs, curves[n]) for n in (1, 2, 3, 4)]
    expected = [1 / math.sqrt(2), 1 / math.sqrt(3), 0.533014, 0.511081]
    near = all(t is not None and abs(t - e) <= 0.005 for t, e in zip(thresholds, expected))
    decreasing = all(t is not None for t in thresholds) and all(
        a > b for a, b in zip(thresholds, thresholds[1:])
    )
    record(5, "curve properties", [
        (ordered, "strictly increasing in n on the interior grid"),
        (worst_drop <= 0.0, f"nondecreasing in x (largest drop {max(worst_drop, 0.0):.1e})"),
        (decreasing and near, "thresholds " + ", ".join(f"{t:.4f}" for t in thresholds if t)),
    ])


def test_criterion_6_oracle_equivalence():
    report = run_equivalence_suite(seed=1, case_count=200)
    cats = report.categories
    record(6, "oracle equivalence (200 cases)", [
        (cats[name].passed, f"{name} max dev {cats[name].max_abs_deviation:.1e}")
        for name in ("reduce", "symmetric_t", "direct_chsh", "xor_closed_form")
    ])


def test_criterion_7_invariance():
    report = run_invariance_suite(seed=1, case_count=100, tol=1e-10)
    cats = report.categories
    record(7, "invariance (100 cases)", [
        (cats[name].passed, f"{name} max dev {cats[name].max_abs_deviation:.1e}")
        for name in ("gauge_rows", "gauge_pairs", "density_validity", "ceiling")
    ])


def _cli(*argv) -> bytes:
    proc = subprocess.run(
        [sys.executable, "-m", "collective_chsh.cli", *argv], capture_output=True, check=True
    )
    return proc.stdout


def test_criterion_8_determinism(tmp_path):
    bound = ["bound", "--pairs", "3", "--x", "0.8", "--strategy", "optimize", "--restarts", "4", "--seed", "9"]
    sweep_args = ["sweep", "--pairs", "2,3", "--x-min", "0.5", "--x-max", "0.7", "--x-step", "0.1",
                  "--strategy", "both", "--restarts", "2", "--seed", "3"]
    b1, b2 = _cli(*bound), _cli(*bound)
    s1, s2 = _cli(*sweep_args), _cli(*sweep_args)
    outs = []
    for i in range(2):
        path = tmp_path / f"run{i}.csv"
        _cli(*sweep_args, "--out", str(path))
        outs.append((path.read_bytes(), path.with_suffix(".dat").read_bytes()))
    record(8, "determinism", [
        (b1 == b2 and len(b1) > 0, "bound stdout byte-identical"),
        (s1 == s2 and len(s1) > 0, "sweep stdout byte-identical"),
        (outs[0] == outs[1] and outs[0][0] == s1, "sweep --out files byte-identical"),
    ])
