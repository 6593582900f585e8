"""Slow, independent reference paths for checking the fast ones.

Nothing here reuses the fast path's permutation tables or contraction:

* :func:`brute_force_reduce` evaluates the post-selected sum term by term
  over every index tuple, with its own bit arithmetic.
* :func:`dense_reduce` completes the rows to full unitaries, transforms the
  whole pair-major composite, and post-selects by projecting onto spin up.
* :func:`direct_chsh_max` searches measurement directions instead of using
  the eigenvalue formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from .chsh import (
    chsh_value,
    correlation_matrix,
    correlation_matrix_symmetric,
    horodecki_bound,
    xor_bound_closed_form,
)
from .protocol import (
    MIN_SUCCESS,
    DegenerateSelectionError,
    ReducedState,
    RowPair,
    gauge_rotate,
    pair_gauge_rotate,
    reduce_pairs,
    tie_partner_rows,
    xor_reduced_closed_form,
    xor_rows,
)
from .states import make_werner, validate_density

__all__ = [
    "CategoryReport",
    "OracleReport",
    "brute_force_reduce",
    "complete_rows",
    "complex_rows_probe",
    "dense_reduce",
    "direct_chsh_max",
    "random_row_pair",
    "run_equivalence_suite",
    "run_invariance_suite",
]

BRUTE_FORCE_MAX_PAIRS = 4


def _rows(r) -> np.ndarray:
    if isinstance(r, RowPair):
        return r.matrix
    r = np.asarray(r)
    if r.ndim != 2 or r.shape[0] != 2:
        raise ValueError(f"rows must be a RowPair or a 2 x 2**n array, got shape {r.shape}")
    return r


def _bit(index, n: int, k: int):
    """Bit of pair ``k`` (0-based, first pair most significant) in an n-pair row index."""
    return (index >> (n - 1 - k)) & 1


def brute_force_reduce(pairs, u, v) -> ReducedState:
    """Post-selected state by direct summation over all ``(a, b, c, d)``.

    ``R[mu, nu, sigma, tau] = sum U[mu, a] V[nu, b] prod_k rho_k[a_k b_k, c_k d_k]
    U*[sigma, c] V*[tau, d]``; complex rows are accepted.
    """
    pairs = [np.asarray(p, dtype=complex) for p in pairs]
    n = len(pairs)
    if not 1 <= n <= BRUTE_FORCE_MAX_PAIRS:
        raise ValueError(f"brute force supports 1..{BRUTE_FORCE_MAX_PAIRS} pairs, got {n}")
    um, vm = _rows(u), _rows(v)
    if um.shape[1] != 2**n or vm.shape[1] != 2**n:
        raise ValueError("row dimension does not match the number of pairs")
    a, b, c, d = np.indices((2**n,) * 4)
    weight = np.ones(a.shape, dtype=complex)
    for k in range(n):
        row = 2 * _bit(a, n, k) + _bit(b, n, k)
        col = 2 * _bit(c, n, k) + _bit(d, n, k)
        weight = weight * pairs[k][row, col]
    r = np.zeros((4, 4), dtype=complex)
    for mu in range(2):
        for nu in range(2):
            for sg in range(2):
                for ta in range(2):
                    terms = (
                        um[mu][:, None, None, None]
                        * vm[nu][None, :, None, None]
                        * weight
                        * um[sg].conj()[None, None, :, None]
                        * vm[ta].conj()[None, None, None, :]
                    )
                    r[2 * mu + nu, 2 * sg + ta] = terms.sum()
    p = np.trace(r).real
    if p < MIN_SUCCESS:
        raise DegenerateSelectionError(f"post-selection probability {p!r} below {MIN_SUCCESS}")
    return ReducedState(r / p, p)


def complete_rows(u) -> np.ndarray:
    """A full 2**n x 2**n unitary whose rows 00...0 and 10...0 are ``u0`` and ``u1``."""
    um = _rows(u)
    dim = um.shape[1]
    rest = null_space(um.conj()).T
    full = np.zeros((dim, dim), dtype=np.result_type(um, rest))
    half = dim // 2
    full[0] = um[0]
    full[half] = um[1]
    others = [i for i in range(dim) if i not in (0, half)]
    full[others] = rest
    return full


def dense_reduce(pairs, u, v) -> ReducedState:
    """Post-selected state via full local unitaries on the dense composite.

    The pair-major composite is transformed by ``U (x) V`` (acting on Alice's
    and Bob's interleaved bits) and then projected onto outcomes where every
    particle except the first pair's is spin up.
    """
    pairs = [np.asarray(p) for p in pairs]
    n = len(pairs)
    comp = pairs[0]
    for p in pairs[1:]:
        comp = np.kron(comp, p)
    uf, vf = complete_rows(u), complete_rows(v)
    if uf.shape[0] != 2**n or vf.shape[0] != 2**n:
        raise ValueError("row dimension does not match the number of pairs")
    idx = np.arange(4**n)
    alice = np.zeros_like(idx)
    bob = np.zeros_like(idx)
    for k in range(n):
        shift = 2 * (n - 1 - k)
        alice = (alice << 1) | ((idx >> (shift + 1)) & 1)
        bob = (bob << 1) | ((idx >> shift) & 1)
    op = uf[np.ix_(alice, alice)] * vf[np.ix_(bob, bob)]
    out = op @ comp @ op.conj().T
    keep = np.arange(4) * 4 ** (n - 1)
    r = out[np.ix_(keep, keep)]
    p = np.trace(r).real
    if p < MIN_SUCCESS:
        raise DegenerateSelectionError(f"post-selection probability {p!r} below {MIN_SUCCESS}")
    return ReducedState(r / p, p)


def _unit(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def _angles(vec):
    nrm = np.linalg.norm(vec)
    if nrm == 0.0:
        return 0.0, 0.0
    vec = vec / nrm
    return math.acos(max(-1.0, min(1.0, vec[2]))), math.atan2(vec[1], vec[0])


def direct_chsh_max(rho, coarse_step: float = 5.0, refine_iterations: int = 100) -> float:
    """Largest CHSH value found by searching the four measurement directions.

    Alice's two directions are scanned on a ``coarse_step``-degree spherical
    grid, with Bob's directions set to the best response (for fixed ``a``,
    ``a2`` the expression is linear in ``b`` and ``b2``).  The best grid point
    is then refined by coordinate search over all eight angles with step
    halving, one sweep per iteration, keeping only improvements.
    """
    t = correlation_matrix(rho)
    step = math.radians(coarse_step)
    thetas = np.arange(0.0, math.pi + 1e-12, step)
    phis = np.arange(0.0, 2.0 * math.pi - 1e-12, step)
    th, ph = np.meshgrid(thetas, phis, indexing="ij")
    dirs = _unit(th.ravel(), ph.ravel())
    g = dirs @ t  # row i: T^T a_i
    sq = np.einsum("ij,ij->i", g, g)
    best, bi, bj = -np.inf, 0, 0
    chunk = 256
    for start in range(0, len(g), chunk):
        gram = g[start : start + chunk] @ g.T
        s = sq[start : start + chunk, None] + sq[None, :]
        vals = np.sqrt(np.maximum(s + 2 * gram, 0.0)) + np.sqrt(np.maximum(s - 2 * gram, 0.0))
        k = int(np.argmax(vals))
        if vals.flat[k] > best:
            best = float(vals.flat[k])
            bi, bj = start + k // len(g), k % len(g)
    a, a2 = dirs[bi], dirs[bj]
    b_ang = _angles(t.T @ (a + a2))
    b2_ang = _angles(t.T @ (a - a2))
    params = np.array([*_angles(a), *_angles(a2), *b_ang, *b2_ang])

    def value(p):
        v = _unit(p[0::2], p[1::2])
        return chsh_value(t, v[0], v[1], v[2], v[3])

    cur = value(params)
    h = step
    for _ in range(refine_iterations):
        improved = False
        for i in range(8):
            for sgn in (1.0, -1.0):
                trial = params.copy()
                trial[i] += sgn * h
                val = value(trial)
                if val > cur:
                    params, cur, improved = trial, val, True
                    break
        if not improved:
            h /= 2.0
    return cur


def random_row_pair(rng: np.random.Generator, n: int, complex_rows: bool = False) -> RowPair:
    d = 2**n
    raw = rng.standard_normal((2, d))
    if complex_rows:
        raw = raw + 1j * rng.standard_normal((2, d))
    u0 = raw[0] / np.linalg.norm(raw[0])
    u1 = raw[1] - u0 * np.vdot(u0, raw[1])
    return RowPair(n, u0, u1 / np.linalg.norm(u1))


@dataclass
class CategoryReport:
    name: str
    tolerance: float
    max_abs_deviation: float = 0.0
    failures: list = field(default_factory=list)
    cases: int = 0

    def record(self, descriptor: str, deviation: float, ok: bool | None = None):
        self.cases += 1
        self.max_abs_deviation = max(self.max_abs_deviation, abs(deviation))
        if ok is None:
            ok = abs(deviation) <= self.tolerance
        if not ok:
            self.failures.append((descriptor, float(deviation)))

    @property
    def passed(self) -> bool:
        return not self.failures


@dataclass
class OracleReport:
    case_count: int
    categories: dict

    @property
    def max_abs_deviation(self) -> float:
        return max((c.max_abs_deviation for c in self.categories.values()), default=0.0)

    @property
    def failures(self) -> list:
        return [(f"{c.name}: {d}", dev) for c in self.categories.values() for d, dev in c.failures]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.categories.values())

    def to_dict(self) -> dict:
        return {
            "case_count": self.case_count,
            "passed": self.passed,
            "categories": {
                name: {
                    "tolerance": c.tolerance,
                    "cases": c.cases,
                    "max_abs_deviation": c.max_abs_deviation,
                    "failures": [[d, dev] for d, dev in c.failures],
                }
                for name, c in self.categories.items()
            },
        }


def _state_deviation(s1: ReducedState, s2: ReducedState) -> float:
    return max(
        float(np.max(np.abs(s1.rho_new - s2.rho_new))),
        abs(s1.success_probability - s2.success_probability),
    )


def run_equivalence_suite(
    seed: int = 1,
    case_count: int = 50,
    reduce=None,
    tol: float = 1e-13,
    direct_tol: float = 1e-3,
    xor_tol: float = 1e-12,
    direct_step: float = 5.0,
) -> OracleReport:
    """Randomized fast-vs-reference comparison.

    Categories: ``reduce`` (fast contraction vs brute force, n <= 3, random
    real rows, per-pair random x), ``symmetric_t`` (five-component T vs the
    trace formula on random real symmetric states), ``direct_chsh`` (eigenvalue
    bound vs direction search; must satisfy ``-1e-9 <= bound - direct <= direct_tol``)
    and ``xor_closed_form`` (closed forms vs the pipeline, n <= 5).
    ``reduce`` defaults to :func:`reduce_pairs` and can be swapped to check
    that the suite notices a broken fast path.
    """
    if case_count < 1:
        raise ValueError("case_count must be >= 1")
    if reduce is None:
        reduce = reduce_pairs
    rng = np.random.default_rng(seed)
    cats = {
        "reduce": CategoryReport("reduce", tol),
        "symmetric_t": CategoryReport("symmetric_t", tol),
        "direct_chsh": CategoryReport("direct_chsh", direct_tol),
        "xor_closed_form": CategoryReport("xor_closed_form", xor_tol),
    }
    for i in range(case_count):
        n = int(rng.integers(1, 4))
        xs = rng.uniform(0.0, 1.0, n)
        pairs = [make_werner(x) for x in xs]
        u, v = random_row_pair(rng, n), random_row_pair(rng, n)
        desc = f"case {i}: n={n} x={np.round(xs, 4).tolist()}"
        fast = reduce(pairs, u, v)
        slow = brute_force_reduce(pairs, u, v)
        cats["reduce"].record(desc, _state_deviation(fast, slow))

        a = rng.standard_normal((4, 4))
        rho = a @ a.T
        rho /= np.trace(rho)
        dev = np.max(np.abs(correlation_matrix(rho) - correlation_matrix_symmetric(rho)))
        cats["symmetric_t"].record(f"case {i}: random real symmetric state", dev)

        bound = horodecki_bound(correlation_matrix(slow.rho_new)).bound
        direct = direct_chsh_max(slow.rho_new, coarse_step=direct_step)
        gap = bound - direct
        cats["direct_chsh"].record(desc, gap, ok=-1e-9 <= gap <= direct_tol)

        nx = int(rng.integers(1, 6))
        x = float(rng.uniform(0.0, 1.0))
        xr = xor_rows(nx)
        pipe = reduce([make_werner(x)] * nx, xr, tie_partner_rows(xr))
        dev = max(
            _state_deviation(xor_reduced_closed_form(nx, x), pipe),
            abs(horodecki_bound(correlation_matrix(pipe.rho_new)).bound - xor_bound_closed_form(nx, x)),
        )
        cats["xor_closed_form"].record(f"case {i}: n={nx} x={x:.6f}", dev)
    return OracleReport(case_count, cats)


def run_invariance_suite(seed: int = 1, case_count: int = 100, tol: float = 1e-10) -> OracleReport:
    """Gauge invariance of the bound, pair-rotation invariance of the state,
    density validity and the Tsirelson ceiling on random row pairs (n <= 3)."""
    if case_count < 1:
        raise ValueError("case_count must be >= 1")
    rng = np.random.default_rng(seed)
    cats = {
        "gauge_rows": CategoryReport("gauge_rows", tol),
        "gauge_pairs": CategoryReport("gauge_pairs", tol),
        "density_validity": CategoryReport("density_validity", tol),
        "ceiling": CategoryReport("ceiling", 1e-9),
    }
    for i in range(case_count):
        n = int(rng.integers(1, 4))
        x = float(rng.uniform(0.0, 1.0))
        pairs = [make_werner(x)] * n
        u, v = random_row_pair(rng, n), random_row_pair(rng, n)
        desc = f"case {i}: n={n} x={x:.6f}"
        base = reduce_pairs(pairs, u, v)
        bound = horodecki_bound(correlation_matrix(base.rho_new)).bound

        alpha, alpha2 = rng.uniform(-math.pi, math.pi, 2)
        rot = reduce_pairs(pairs, gauge_rotate(u, alpha), gauge_rotate(v, alpha2))
        cats["gauge_rows"].record(desc, horodecki_bound(correlation_matrix(rot.rho_new)).bound - bound)

        k = int(rng.integers(1, n + 1))
        beta = float(rng.uniform(-math.pi, math.pi))
        pu, pv = pair_gauge_rotate(u, v, k, beta)
        cats["gauge_pairs"].record(f"{desc} k={k}", _state_deviation(reduce_pairs(pairs, pu, pv), base))

        diag = validate_density(base.rho_new, tol)
        worst = max(diag.hermiticity_defect, diag.trace_defect, -diag.min_eigenvalue, 0.0)
        ok = diag.passed and 0.0 < base.success_probability <= 1.0 + 1e-12
        cats["density_validity"].record(desc, worst, ok=ok)

        over = bound - 2.0 * math.sqrt(2.0)
        cats["ceiling"].record(desc, max(over, 0.0), ok=over <= 1e-9 and bound >= 0.0)
    return OracleReport(case_count, cats)


def complex_rows_probe(n: int, x: float, samples: int = 200, seed: int = 0) -> float:
    """Best bound over random complex row pairs for Alice and Bob independently.

    Numerical evidence only: it can show real rows are beaten, never prove
    they are not.
    """
    rng = np.random.default_rng(seed)
    pairs = [make_werner(x)] * n
    best = 0.0
    for _ in range(samples):
        u = random_row_pair(rng, n, complex_rows=True)
        v = random_row_pair(rng, n, complex_rows=True)
        try:
            state = brute_force_reduce(pairs, u, v)
        except DegenerateSelectionError:
            continue
        best = max(best, horodecki_bound(correlation_matrix(state.rho_new)).bound)
    return best
