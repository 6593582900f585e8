"""Collective test on n Werner pairs: local rows, spin-up post-selection, reduction.

Alice and Bob each hold one particle of every pair.  After a local
transformation each of them checks that particles 2..n are spin up and the
run is kept only if all 2(n-1) checks pass.  Only the two rows of the local
transformation with output indices 00...0 and 10...0 matter, so a
transformation is represented by a :class:`RowPair`.

Bit-order conventions:

* Row vector components are indexed by ``m*2**(n-1) + m'*2**(n-2) + ...``,
  first pair most significant.
* Composite density matrices are pair-major, ``(m, n, m', n', ...)`` with
  the first pair's Alice bit most significant.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .states import check_singlet_fraction, freeze

__all__ = [
    "MAX_PAIRS",
    "CompositeDensity",
    "DegenerateSelectionError",
    "ReducedState",
    "ReductionKernel",
    "RowPair",
    "assemble_composite",
    "gauge_rotate",
    "pair_gauge_rotate",
    "party_major_permutation",
    "reduce_pairs",
    "tie_partner_rows",
    "tie_signs",
    "xor_reduced_closed_form",
    "xor_rows",
]

MAX_PAIRS = 6
ROW_TOL = 1e-10
MIN_SUCCESS = 1e-14


class DegenerateSelectionError(ArithmeticError):
    """Post-selection never succeeds for the given rows and pairs."""


@dataclass(frozen=True)
class RowPair:
    """The two retained rows ``u0``, ``u1`` of a local 2**n-dim transformation."""

    n: int
    u0: np.ndarray
    u1: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        dim = 2**self.n
        dtype = np.result_type(np.asarray(self.u0), np.asarray(self.u1), float)
        u0 = np.array(self.u0, dtype=dtype)
        u1 = np.array(self.u1, dtype=dtype)
        if u0.shape != (dim,) or u1.shape != (dim,):
            raise ValueError(f"rows must have shape ({dim},), got {u0.shape} and {u1.shape}")
        for name, row in (("u0", u0), ("u1", u1)):
            norm = np.linalg.norm(row)
            if abs(norm - 1.0) > ROW_TOL:
                raise ValueError(f"{name} is not unit norm (|{name}| = {norm!r})")
        overlap = abs(np.vdot(u0, u1))
        if overlap > ROW_TOL:
            raise ValueError(f"rows are not orthogonal (|u0.u1| = {overlap!r})")
        object.__setattr__(self, "u0", freeze(u0))
        object.__setattr__(self, "u1", freeze(u1))

    @classmethod
    def from_matrix(cls, rows) -> "RowPair":
        rows = np.asarray(rows)
        n = int(round(np.log2(rows.shape[1])))
        return cls(n, rows[0], rows[1])

    @property
    def matrix(self) -> np.ndarray:
        return np.stack([self.u0, self.u1])

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.u0)


@dataclass(frozen=True)
class ReducedState:
    """Post-selected state of the first pair and the probability of keeping a run."""

    rho_new: np.ndarray
    success_probability: float

    def __post_init__(self):
        p = float(self.success_probability)
        if not 0.0 < p <= 1.0 + 1e-12:
            raise ValueError(f"success probability out of range: {p!r}")
        object.__setattr__(self, "success_probability", p)
        rho = np.array(self.rho_new, dtype=complex)
        object.__setattr__(self, "rho_new", freeze(rho))


@dataclass(frozen=True)
class CompositeDensity:
    n: int
    entries: np.ndarray


def xor_rows(n: int) -> RowPair:
    """Rows 00...0 -> e_0 and 10...0 -> e_{2**n - 1}."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    dim = 2**n
    u0 = np.zeros(dim)
    u1 = np.zeros(dim)
    u0[0] = 1.0
    u1[dim - 1] = 1.0
    return RowPair(n, u0, u1)


@lru_cache(maxsize=None)
def tie_signs(n: int) -> np.ndarray:
    """``(-1)**popcount(b)`` for every component index ``b`` of an n-pair row."""
    idx = np.arange(2**n)
    parity = np.zeros(2**n, dtype=int)
    for k in range(n):
        parity ^= (idx >> k) & 1
    return freeze(1.0 - 2.0 * parity)


def tie_partner_rows(u: RowPair) -> RowPair:
    """Bob's rows tied to Alice's: ``V[nu, b] = (-1)**(nu + popcount(b)) * U[nu, b]``.

    This is the sign change that maps the singlet's antisymmetric form to a
    symmetric one on Bob's side.
    """
    s = tie_signs(u.n)
    return RowPair(u.n, s * u.u0, -s * u.u1)


def gauge_rotate(u: RowPair, alpha: float) -> RowPair:
    c, s = np.cos(alpha), np.sin(alpha)
    return RowPair(u.n, c * u.u0 - s * u.u1, s * u.u0 + c * u.u1)


def _rotate_bit(row: np.ndarray, n: int, k: int, rot: np.ndarray) -> np.ndarray:
    t = row.reshape(2 ** (k - 1), 2, 2 ** (n - k))
    return np.einsum("ij,ajb->aib", rot, t).reshape(-1)


def pair_gauge_rotate(u: RowPair, v: RowPair, k: int, beta: float) -> tuple[RowPair, RowPair]:
    """Rotate the component index of pair ``k`` (1-based) by ``beta`` in all four rows.

    Alice's and Bob's particle of pair ``k`` get the same real rotation, which a
    Werner pair does not notice, so the reduced state is unchanged.
    """
    if u.n != v.n:
        raise ValueError("row pairs disagree on n")
    n = u.n
    if not 1 <= k <= n:
        raise IndexError(f"pair index {k} out of range 1..{n}")
    c, s = np.cos(beta), np.sin(beta)
    rot = np.array([[c, -s], [s, c]])
    out = [
        RowPair(n, _rotate_bit(r.u0, n, k, rot), _rotate_bit(r.u1, n, k, rot))
        for r in (u, v)
    ]
    return out[0], out[1]


def _as_pair_list(pairs) -> list[np.ndarray]:
    out = [np.asarray(p) for p in pairs]
    if not out:
        raise ValueError("need at least one pair")
    if len(out) > MAX_PAIRS:
        raise ValueError(f"at most {MAX_PAIRS} pairs supported, got {len(out)}")
    for p in out:
        if p.shape != (4, 4):
            raise ValueError(f"pair density must be 4x4, got {p.shape}")
    return out


def _composite_array(pairs: list[np.ndarray]) -> np.ndarray:
    out = pairs[0]
    for p in pairs[1:]:
        out = np.kron(out, p)
    return out


def assemble_composite(pairs: Sequence) -> CompositeDensity:
    """Tensor product of the pair states in pair-major bit order."""
    pairs = _as_pair_list(pairs)
    entries = np.array(_composite_array(pairs), dtype=complex)
    return CompositeDensity(len(pairs), freeze(entries))


@lru_cache(maxsize=None)
def party_major_permutation(n: int) -> np.ndarray:
    """Pair-major index for every party-major index.

    Party-major order is ``(m, m', ..., n, n', ...)``: Alice's n bits followed
    by Bob's.  ``P_party = P_pair[perm][:, perm]``.
    """
    j = np.arange(4**n)
    alice = j >> n
    bob = j & (2**n - 1)
    out = np.zeros_like(j)
    for k in range(n):
        # bit k of each party index (LSB = last pair) lands at pair slot k
        out |= ((alice >> k) & 1) << (2 * k + 1)
        out |= ((bob >> k) & 1) << (2 * k)
    return freeze(out)


class ReductionKernel:
    """Precomputed party-major composite for repeated reductions of fixed pairs.

    Reducing with rows ``U`` and ``V`` is then a single contraction
    ``W P W^H`` with ``W[(mu, nu), (a, b)] = U[mu, a] V[nu, b]``.
    """

    def __init__(self, pairs: Sequence):
        pairs = _as_pair_list(pairs)
        self.n = len(pairs)
        comp = _composite_array(pairs)
        if not np.iscomplexobj(comp) or not np.any(comp.imag):
            comp = comp.real
        perm = party_major_permutation(self.n)
        self.composite = freeze(np.ascontiguousarray(comp[np.ix_(perm, perm)]))

    def unnormalized(self, umat: np.ndarray, vmat: np.ndarray) -> np.ndarray:
        w = (umat[:, None, :, None] * vmat[None, :, None, :]).reshape(4, -1)
        return w @ self.composite @ w.conj().T

    def reduce(self, u: RowPair, v: RowPair) -> ReducedState:
        if u.n != self.n or v.n != self.n:
            raise ValueError(f"rows are for n={u.n}/{v.n}, pairs give n={self.n}")
        r = self.unnormalized(u.matrix, v.matrix)
        return _normalize(r)


def _normalize(r: np.ndarray) -> ReducedState:
    p = np.trace(r).real
    if p < MIN_SUCCESS:
        raise DegenerateSelectionError(f"post-selection probability {p!r} below {MIN_SUCCESS}")
    return ReducedState(r / p, p)


def reduce_pairs(pairs: Sequence, u: RowPair, v: RowPair) -> ReducedState:
    """Post-selected state of the first pair after Alice applies ``u``, Bob ``v``."""
    return ReductionKernel(pairs).reduce(u, v)


def xor_reduced_closed_form(n: int, x: float) -> ReducedState:
    """Reduced state for XOR rows (Bob tied) on n identical Werner pairs.

    With ``a = ((1-x)/4)**n`` and ``b = ((1+x)/4)**n`` the unnormalized state
    has diagonal ``(a, b, b, a)`` and singlet coherence ``-(x/2)**n``.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    x = check_singlet_fraction(x)
    a = ((1.0 - x) / 4.0) ** n
    b = ((1.0 + x) / 4.0) ** n
    c = (x / 2.0) ** n
    r = np.zeros((4, 4), dtype=complex)
    r[0, 0] = r[3, 3] = a
    r[1, 1] = r[2, 2] = b
    r[1, 2] = r[2, 1] = -c
    return _normalize(r)
