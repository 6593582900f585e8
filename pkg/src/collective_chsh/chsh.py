"""Correlation matrix and the maximal CHSH value of a two-qubit state.

For a state rho the correlation matrix is ``T[p, q] = Tr[(sigma_p x sigma_q) rho]``
and the largest value of ``<AB> + <AB'> + <A'B> - <A'B'>`` over spin
observables is ``2*sqrt(M)``, with ``M`` the sum of the two largest
eigenvalues of ``T^T T``.  Only traceless observables ``a . sigma`` enter,
so the trivial value 2 from measuring the identity is never counted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .states import check_singlet_fraction

__all__ = [
    "BellBound",
    "PAULI",
    "PAULI_PAIRS",
    "TSIRELSON",
    "chsh_value",
    "correlation_matrix",
    "correlation_matrix_symmetric",
    "horodecki_bound",
    "jacobi_eigenvalues",
    "sparse_block_eigenvalues",
    "xor_bound_closed_form",
    "xor_correlations",
]

TSIRELSON = 2.0 * math.sqrt(2.0)

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

# PAULI_PAIRS[p, q] = sigma_p (Alice) x sigma_q (Bob) in the 2m+n basis
PAULI_PAIRS = np.array([[np.kron(sp, sq) for sq in PAULI] for sp in PAULI])


@dataclass(frozen=True)
class BellBound:
    m_value: float
    bound: float

    @classmethod
    def from_m(cls, m: float) -> "BellBound":
        m = max(float(m), 0.0)
        return cls(m, 2.0 * math.sqrt(m))

    @property
    def violation(self) -> bool:
        return self.bound > 2.0


def correlation_matrix(rho) -> np.ndarray:
    """``T[p, q] = Tr[(sigma_p x sigma_q) rho]`` as a real 3x3 array.

    Raises ``ValueError`` if any trace has an imaginary part above 1e-9,
    which means ``rho`` is not Hermitian.
    """
    rho = np.asarray(rho, dtype=complex)
    t = np.einsum("pqij,ji->pq", PAULI_PAIRS, rho)
    resid = float(np.max(np.abs(t.imag)))
    if resid > 1e-9:
        raise ValueError(f"correlation traces have imaginary residue {resid:.3g}")
    return np.ascontiguousarray(t.real)


def correlation_matrix_symmetric(rho) -> np.ndarray:
    """Correlation matrix of a real symmetric ``rho`` from its five nonzero components.

    For such states every term with exactly one ``sigma_y`` vanishes, and so
    do ``T_xy``, ``T_yx``, ``T_yz``, ``T_zy``.
    """
    rho = np.asarray(rho)
    if np.iscomplexobj(rho):
        if np.max(np.abs(rho.imag)) > 1e-12:
            raise ValueError("state is not real")
        rho = rho.real
    if np.max(np.abs(rho - rho.T)) > 1e-12:
        raise ValueError("state is not symmetric")
    r = lambda mn, st: rho[int(mn, 2), int(st, 2)]  # noqa: E731
    t = np.zeros((3, 3))
    t[0, 0] = r("00", "11") + r("01", "10") + r("10", "01") + r("11", "00")
    t[1, 1] = -r("00", "11") + r("01", "10") + r("10", "01") - r("11", "00")
    t[2, 2] = r("00", "00") - r("01", "01") - r("10", "10") + r("11", "11")
    t[0, 2] = r("00", "10") - r("01", "11") + r("10", "00") - r("11", "01")
    t[2, 0] = r("00", "01") + r("01", "00") - r("10", "11") - r("11", "10")
    return t


def jacobi_eigenvalues(a, tol: float = 1e-14, max_sweeps: int = 50) -> np.ndarray:
    """Eigenvalues of a real symmetric 3x3 matrix by cyclic Jacobi rotations, ascending."""
    a = [[float(v) for v in row] for row in np.asarray(a)]
    scale = max(abs(v) for row in a for v in row) or 1.0
    for _ in range(max_sweeps):
        off = a[0][1] ** 2 + a[0][2] ** 2 + a[1][2] ** 2
        if math.sqrt(off) <= tol * scale:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            apq = a[p][q]
            if apq == 0.0:
                continue
            theta = (a[q][q] - a[p][p]) / (2.0 * apq)
            t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            for k in range(3):
                akp, akq = a[k][p], a[k][q]
                a[k][p] = c * akp - s * akq
                a[k][q] = s * akp + c * akq
            for k in range(3):
                apk, aqk = a[p][k], a[q][k]
                a[p][k] = c * apk - s * aqk
                a[q][k] = s * apk + c * aqk
            a[p][q] = a[q][p] = 0.0
    return np.sort([a[0][0], a[1][1], a[2][2]])


def horodecki_bound(t) -> BellBound:
    """Maximal CHSH value ``2*sqrt(M)`` for correlation matrix ``t``."""
    t = np.asarray(t, dtype=float)
    ev = jacobi_eigenvalues(t.T @ t)
    return BellBound.from_m(ev[1] + ev[2])


def sparse_block_eigenvalues(t) -> np.ndarray:
    """Eigenvalues of ``T^T T`` when only T_xx, T_yy, T_zz, T_xz, T_zx are nonzero.

    One eigenvalue is ``T_yy**2``; the other two come from the symmetric 2x2
    block on the (x, z) columns.  Returned ascending.
    """
    t = np.asarray(t, dtype=float)
    txx, tyy, tzz, txz, tzx = t[0, 0], t[1, 1], t[2, 2], t[0, 2], t[2, 0]
    p = txx**2 + tzx**2
    r = txz**2 + tzz**2
    q = txx * txz + tzx * tzz
    mean = (p + r) / 2.0
    half = math.hypot((p - r) / 2.0, q)
    return np.sort([tyy**2, mean - half, mean + half])


def chsh_value(t, a, a2, b, b2, tol: float = 1e-10) -> float:
    """``a.T b + a.T b2 + a2.T b - a2.T b2`` for unit spin directions."""
    t = np.asarray(t, dtype=float)
    vecs = [np.asarray(v, dtype=float) for v in (a, a2, b, b2)]
    for name, v in zip(("a", "a2", "b", "b2"), vecs):
        if abs(np.linalg.norm(v) - 1.0) > tol:
            raise ValueError(f"direction {name} is not a unit vector")
    a, a2, b, b2 = vecs
    return float(a @ t @ (b + b2) + a2 @ t @ (b - b2))


def xor_correlations(n: int, x: float) -> tuple[float, float]:
    """``(T_xx, T_zz)`` of the XOR-reduced state; ``T_yy == T_xx``, the rest vanish."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    x = check_singlet_fraction(x)
    lo, hi = (1.0 - x) ** n, (1.0 + x) ** n
    d = lo + hi
    return -((2.0 * x) ** n) / d, (lo - hi) / d


def xor_bound_closed_form(n: int, x: float) -> float:
    txx, tzz = xor_correlations(n, x)
    return 2.0 * math.sqrt(txx**2 + max(txx**2, tzz**2))
