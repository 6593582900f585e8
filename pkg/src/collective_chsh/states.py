"""Werner pairs, the singlet, and density-matrix sanity checks.

Two-qubit states are plain 4x4 complex arrays.  Rows are indexed by
``2*m + n`` and columns by ``2*s + t`` where ``m, s`` label Alice's particle
and ``n, t`` Bob's; index value 0 is spin up, 1 is spin down.  Arrays
returned from the constructors are read-only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DensityDiagnostics",
    "check_singlet_fraction",
    "fidelity",
    "freeze",
    "make_singlet",
    "make_werner",
    "validate_density",
]

# Singlet projector in the 2m+n basis: S_{01,01} = S_{10,10} = 1/2,
# S_{01,10} = S_{10,01} = -1/2.
_SINGLET = np.array(
    [
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 0.5, -0.5, 0.0],
        [0.0, -0.5, 0.5, 0.0],
        [0.0, 0.0, 0.0, 0.0],
    ],
    dtype=complex,
)


def freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def check_singlet_fraction(x: float) -> float:
    """Return ``x`` as a float, raising ``ValueError`` outside ``[0, 1]``."""
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"singlet fraction must lie in [0, 1], got {x!r}")
    return x


def make_werner(x: float) -> np.ndarray:
    """Werner pair with singlet fraction ``x``: ``x*S + (1 - x)*I/4``."""
    x = check_singlet_fraction(x)
    rho = x * _SINGLET + (1.0 - x) * np.eye(4, dtype=complex) / 4.0
    return freeze(rho)


def make_singlet() -> np.ndarray:
    return make_werner(1.0)


def fidelity(x: float) -> float:
    """Total singlet weight ``(3x + 1)/4`` of a Werner pair.

    The maximally mixed part contributes a quarter of its weight to the
    singlet, hence the offset.
    """
    x = check_singlet_fraction(x)
    return (3.0 * x + 1.0) / 4.0


@dataclass(frozen=True)
class DensityDiagnostics:
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    tol: float

    @property
    def passed(self) -> bool:
        return (
            self.hermiticity_defect <= self.tol
            and self.trace_defect <= self.tol
            and self.min_eigenvalue >= -self.tol
        )

    def __bool__(self) -> bool:
        return self.passed


def validate_density(rho, tol: float = 1e-12) -> DensityDiagnostics:
    """Report how far ``rho`` is from a valid density matrix.

    The Hermiticity defect is the largest entrywise ``|rho - rho^H|``, the
    trace defect is ``|Tr rho - 1|``, and the minimum eigenvalue is taken
    from the Hermitian part.  Nothing is raised; check ``.passed``.
    """
    rho = np.asarray(rho, dtype=complex)
    herm = float(np.max(np.abs(rho - rho.conj().T))) if rho.size else 0.0
    trace = float(abs(np.trace(rho) - 1.0))
    hermitian_part = (rho + rho.conj().T) / 2.0
    min_eig = float(np.linalg.eigvalsh(hermitian_part)[0])
    return DensityDiagnostics(herm, trace, min_eig, float(tol))
