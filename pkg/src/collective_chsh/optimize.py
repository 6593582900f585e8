"""Multi-start Powell search for the best retained rows.

Rows are parameterized without constraints: the search runs over raw
vectors that are Gram-Schmidt orthonormalized on every evaluation.  With
``tie_bob`` (the default) Bob's rows are the sign-flipped copy of Alice's
and the parameter vector is ``[u0, u1]``; otherwise it is
``[u0, u1, v0, v1]``.

Maxima are not isolated points (rotations of the two rows into each other
and identical rotations of any pair leave the value unchanged), so only
values are ever compared, never locations.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .chsh import (
    PAULI_PAIRS,
    BellBound,
    correlation_matrix,
    horodecki_bound,
    xor_bound_closed_form,
)
from .protocol import (
    ReductionKernel,
    RowPair,
    tie_partner_rows,
    tie_signs,
    xor_reduced_closed_form,
    xor_rows,
)
from .states import check_singlet_fraction, make_werner

__all__ = [
    "CrossoverNotFoundError",
    "DegenerateRowsError",
    "OptimizationConfig",
    "OptimizationResult",
    "PowellResult",
    "SweepRow",
    "bound_objective",
    "crossover",
    "embed_point",
    "maximize_bound",
    "orthonormalize",
    "powell_minimize",
    "sweep",
    "xor_point",
]

log = logging.getLogger(__name__)

WORKERS_ENV = "COLLECTIVE_CHSH_WORKERS"
XOR_LABEL_MARGIN = 1e-7
_DEGENERATE = 1e-8
_MAX_RESAMPLE = 16


class DegenerateRowsError(ValueError):
    """Raw vectors too close to parallel (or zero) to orthonormalize."""


class CrossoverNotFoundError(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimizationConfig:
    restarts: int = 64
    seed: int = 0
    rel_tolerance: float = 1e-10
    max_iterations: int = 2000
    include_xor_warm_start: bool = True
    tie_bob: bool = True
    # Brent line-search tolerance on the parameters; the value error is quadratic in it
    line_tolerance: float = 1e-4
    workers: int | None = None

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.rel_tolerance <= 0:
            raise ValueError("rel_tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class PowellResult:
    point: np.ndarray
    value: float
    evaluations: int
    budget_exhausted: bool


@dataclass(frozen=True)
class OptimizationResult:
    n: int
    x: float
    best_rows: RowPair
    best_partner: RowPair
    bell: BellBound
    restart_values: tuple[float, ...]
    strategy_label: str
    evaluations: int
    success_probability: float
    best_point: np.ndarray = field(repr=False)
    budget_exhausted: int = 0


@dataclass(frozen=True)
class SweepRow:
    n: int
    x: float
    xor_bound: float
    success_probability: float
    opt_bound: float | None = None
    opt_success_probability: float | None = None
    strategy_label: str | None = None
    error: str | None = None


def orthonormalize(raw0, raw1) -> RowPair:
    """Gram-Schmidt: ``u0 = raw0/|raw0|``, ``u1`` the normalized remainder of ``raw1``."""
    raw0 = np.asarray(raw0, dtype=float)
    raw1 = np.asarray(raw1, dtype=float)
    n0 = np.linalg.norm(raw0)
    if n0 <= _DEGENERATE:
        raise DegenerateRowsError("first raw vector is (nearly) zero")
    u0 = raw0 / n0
    rest = raw1 - u0 * (u0 @ raw1)
    n1 = np.linalg.norm(rest)
    if n1 <= _DEGENERATE:
        raise DegenerateRowsError("second raw vector is (nearly) parallel to the first")
    n = int(round(np.log2(raw0.size)))
    return RowPair(n, u0, rest / n1)


def _rows_from_point(p: np.ndarray, n: int, tie_bob: bool) -> tuple[RowPair, RowPair]:
    d = 2**n
    u = orthonormalize(p[:d], p[d : 2 * d])
    if tie_bob:
        return u, tie_partner_rows(u)
    return u, orthonormalize(p[2 * d : 3 * d], p[3 * d : 4 * d])


def bound_objective(pairs: Sequence, tie_bob: bool = True) -> Callable[[np.ndarray], float]:
    """Return ``f(p) = -M`` for the raw parameter vector ``p``.

    Degenerate parameter vectors score 0, the worst possible value.
    """
    kernel = ReductionKernel(pairs)
    if np.iscomplexobj(kernel.composite):
        raise ValueError("optimization supports real pair states only")
    n = kernel.n
    d = 2**n
    comp = kernel.composite
    signs = tie_signs(n)
    # real parts of sigma_p x sigma_q, transposed, for T = Tr[(s_p x s_q) R] with R real
    pauli_t = np.ascontiguousarray(
        PAULI_PAIRS.real.transpose(0, 1, 3, 2).reshape(9, 16)
    )

    def unit_pair(a, b):
        na = np.sqrt(a @ a)
        if na <= _DEGENERATE:
            return None
        a = a / na
        b = b - a * (a @ b)
        nb = np.sqrt(b @ b)
        if nb <= _DEGENERATE:
            return None
        return a, b / nb

    def f(p):
        uu = unit_pair(p[:d], p[d : 2 * d])
        if uu is None:
            return 0.0
        if tie_bob:
            vv = (signs * uu[0], -signs * uu[1])
        else:
            vv = unit_pair(p[2 * d : 3 * d], p[3 * d : 4 * d])
            if vv is None:
                return 0.0
        u = np.stack(uu)
        v = np.stack(vv)
        w = (u[:, None, :, None] * v[None, :, None, :]).reshape(4, -1)
        r = w @ comp @ w.T
        tr = r[0, 0] + r[1, 1] + r[2, 2] + r[3, 3]
        if tr < 1e-14:
            return 0.0
        t = (pauli_t @ r.reshape(16)).reshape(3, 3) / tr
        ev = np.linalg.eigvalsh(t.T @ t)
        return -(ev[1] + ev[2])

    return f


def powell_minimize(objective, start, config: OptimizationConfig = OptimizationConfig()) -> PowellResult:
    """Powell direction-set minimization (scipy), stopped on a relative cycle gain below
    ``config.rel_tolerance``.  Budget exhaustion is flagged, not raised."""
    start = np.asarray(start, dtype=float)
    f0 = objective(start)
    if not np.isfinite(f0):
        raise ValueError("objective is not finite at the start point")
    res = minimize(
        objective,
        start,
        method="Powell",
        options={
            "ftol": config.rel_tolerance,
            "xtol": config.line_tolerance,
            "maxiter": config.max_iterations,
        },
    )
    return PowellResult(np.asarray(res.x), float(res.fun), int(res.nfev), res.status != 0)


def xor_point(n: int, tie_bob: bool = True) -> np.ndarray:
    u = xor_rows(n)
    parts = [u.u0, u.u1]
    if not tie_bob:
        v = tie_partner_rows(u)
        parts += [v.u0, v.u1]
    return np.concatenate(parts)


def embed_point(p: np.ndarray, n: int) -> np.ndarray:
    """Lift an n-pair parameter vector to n+1 pairs; the new pair only enters via spin up.

    Each row ``r`` becomes ``r x e_0`` (new pair least significant), which
    reproduces the n-pair reduced state exactly.
    """
    rows = np.asarray(p, dtype=float).reshape(-1, 2**n)
    out = np.zeros((rows.shape[0], 2 ** (n + 1)))
    out[:, ::2] = rows
    return out.reshape(-1)


def _restart_start(seed: int, index: int, size: int, attempt: int) -> np.ndarray:
    # counter-based stream per restart: independent of how many restarts run or in which order
    ss = np.random.SeedSequence(seed, spawn_key=(index, attempt))
    return np.random.Generator(np.random.Philox(ss)).standard_normal(size)


def _draw_start(seed: int, index: int, n: int, tie_bob: bool) -> np.ndarray:
    d = 2**n
    size = 2 * d if tie_bob else 4 * d
    for attempt in range(_MAX_RESAMPLE):
        p = _restart_start(seed, index, size, attempt)
        try:
            _rows_from_point(p, n, tie_bob)
        except DegenerateRowsError:
            continue
        return p
    raise DegenerateRowsError(f"restart {index}: no usable start after {_MAX_RESAMPLE} draws")


_objective_cache: dict = {}


def _cached_objective(n: int, x: float, tie_bob: bool):
    key = (n, x, tie_bob)
    f = _objective_cache.get(key)
    if f is None:
        if len(_objective_cache) > 8:
            _objective_cache.clear()
        f = bound_objective([make_werner(x)] * n, tie_bob)
        _objective_cache[key] = f
    return f


def _local_search(job) -> PowellResult:
    n, x, config, start = job
    f = _cached_objective(n, x, config.tie_bob)
    return powell_minimize(f, start, config)


def _worker_count(config: OptimizationConfig) -> int:
    if config.workers is not None:
        return max(1, config.workers)
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _run_jobs(jobs: list, config: OptimizationConfig) -> list[PowellResult]:
    workers = _worker_count(config)
    if workers == 1 or len(jobs) < 2:
        return [_local_search(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_local_search, jobs, chunksize=1))


def _starts(n: int, config: OptimizationConfig, warm_starts: Sequence) -> list[np.ndarray]:
    size = 2 ** (n + 1) if config.tie_bob else 2 ** (n + 2)
    starts = []
    for w in warm_starts:
        w = np.asarray(w, dtype=float)
        if w.shape != (size,):
            raise ValueError(f"warm start has shape {w.shape}, expected ({size},)")
        starts.append(w)
    if config.include_xor_warm_start:
        starts.append(xor_point(n, config.tie_bob))
    starts.extend(_draw_start(config.seed, i, n, config.tie_bob) for i in range(config.restarts))
    return starts


def _check_n(n: int):
    if not 1 <= n <= 5:
        raise ValueError(f"optimization supports 1 <= n <= 5, got {n}")
    if n == 5:
        log.warning("full optimization at n=5 is expensive (64 parameters)")


def maximize_bound(
    n: int,
    x: float,
    config: OptimizationConfig = OptimizationConfig(),
    warm_starts: Sequence = (),
) -> OptimizationResult:
    """Maximize the CHSH bound over retained rows for n Werner pairs of fraction ``x``.

    Local searches start from ``warm_starts``, then the XOR rows (if
    configured), then ``config.restarts`` random points.  The best value
    wins; ties go to the earliest start.
    """
    _check_n(n)
    x = check_singlet_fraction(x)
    starts = _starts(n, config, warm_starts)
    results = _run_jobs([(n, x, config, s) for s in starts], config)
    values = np.array([2.0 * np.sqrt(max(-r.value, 0.0)) for r in results])
    best = int(np.argmax(values))
    point = results[best].point
    u, v = _rows_from_point(point, n, config.tie_bob)
    state = ReductionKernel([make_werner(x)] * n).reduce(u, v)
    bell = horodecki_bound(correlation_matrix(state.rho_new))
    xor = xor_bound_closed_form(n, x)
    label = "xor_equivalent" if values[best] <= xor + XOR_LABEL_MARGIN else "general"
    return OptimizationResult(
        n=n,
        x=x,
        best_rows=u,
        best_partner=v,
        bell=bell,
        restart_values=tuple(float(val) for val in values),
        strategy_label=label,
        evaluations=sum(r.evaluations for r in results),
        success_probability=state.success_probability,
        best_point=point,
        budget_exhausted=sum(r.budget_exhausted for r in results),
    )


def sweep(
    ns: Sequence[int],
    x_grid: Sequence[float],
    config: OptimizationConfig = OptimizationConfig(),
    strategy: str = "xor",
) -> list[SweepRow]:
    """Bounds on an (n, x) grid, rows in (n, x) order.

    The XOR column comes from the closed form.  For ``optimize``/``both`` each
    point is also optimized, warm-started from the best rows at the previous
    x (same n) and from the lifted best rows at n-1 (same x), so curves are
    tracked continuously and never drop below the n-1 curve.  A failing point
    is recorded with ``error`` set and the sweep continues.
    """
    if strategy not in ("xor", "optimize", "both"):
        raise ValueError(f"unknown strategy {strategy!r}")
    ns = [int(n) for n in ns]
    xs = [check_singlet_fraction(x) for x in x_grid]
    if not ns or not xs:
        raise ValueError("grids must be nonempty")
    if ns != sorted(ns) or xs != sorted(xs):
        raise ValueError("grids must be sorted")
    rows = []
    best_at: dict[tuple[int, float], np.ndarray] = {}
    for n in ns:
        prev = None
        for x in xs:
            row = SweepRow(
                n, x, xor_bound_closed_form(n, x), xor_reduced_closed_form(n, x).success_probability
            )
            if strategy != "xor":
                warm = []
                if prev is not None:
                    warm.append(prev)
                lower = best_at.get((n - 1, x))
                if lower is not None and config.tie_bob:
                    warm.append(embed_point(lower, n - 1))
                try:
                    res = maximize_bound(n, x, config, warm)
                except Exception as exc:  # keep sweeping past a bad point
                    log.warning("optimization failed at n=%d x=%g: %s", n, x, exc)
                    row = replace(row, error=f"{type(exc).__name__}: {exc}")
                else:
                    prev = res.best_point
                    best_at[(n, x)] = res.best_point
                    row = replace(
                        row,
                        opt_bound=res.bell.bound,
                        opt_success_probability=res.success_probability,
                        strategy_label=res.strategy_label,
                    )
            rows.append(row)
    return rows


def _exceeds_xor(n, x, config, warm, tol):
    """Does some local search beat the XOR value by more than ``tol``?

    Same starts, same order as :func:`maximize_bound`, but stops at the first
    search that answers yes.
    """
    threshold = xor_bound_closed_form(n, x) + tol
    for start in _starts(n, config, warm):
        r = _local_search((n, x, config, start))
        if 2.0 * np.sqrt(max(-r.value, 0.0)) > threshold:
            return True, r.point
    return False, None


def crossover(
    n: int,
    config: OptimizationConfig = OptimizationConfig(restarts=128),
    tol: float = 1e-4,
    resolution: float = 0.005,
    grid_step: float = 0.05,
) -> float:
    """Smallest singlet fraction where optimized rows beat XOR rows by more than ``tol``.

    Scans down from ``1 - grid_step`` until the first point where nothing
    beats XOR, then bisects that bracket to ``resolution``.  Every evaluation
    is warm-started from the best rows at the nearest winning point.  Raises
    :class:`CrossoverNotFoundError` if no grid point is beaten.
    """
    _check_n(n)
    grid = np.round(np.arange(1.0 - grid_step, 0.0, -grid_step), 12)
    hi = hi_point = None
    lo = 0.0
    for x in grid:
        ok, pt = _exceeds_xor(n, float(x), config, [hi_point] if hi_point is not None else [], tol)
        if ok:
            hi, hi_point = float(x), pt
        elif hi is not None:
            lo = float(x)
            break
    if hi is None:
        raise CrossoverNotFoundError(f"no x in (0, 1) where n={n} beats XOR by more than {tol}")
    while hi - lo > resolution:
        mid = (lo + hi) / 2.0
        ok, pt = _exceeds_xor(n, mid, config, [hi_point], tol)
        if ok:
            hi, hi_point = mid, pt
        else:
            lo = mid
    log.info("n=%d crossover bracket [%.5f, %.5f]", n, lo, hi)
    return hi
