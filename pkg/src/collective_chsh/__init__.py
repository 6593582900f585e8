"""Collective CHSH tests on several Werner pairs.

Alice and Bob each apply a local transformation to their halves of n Werner
pairs, keep only runs where every particle except the first pair's is spin
up, and test the surviving pair.  This package computes the surviving state,
its maximal CHSH value, and searches for the transformations that maximize it.
"""

__version__ = "0.1.0"

from .chsh import (
    BellBound,
    chsh_value,
    correlation_matrix,
    correlation_matrix_symmetric,
    horodecki_bound,
    xor_bound_closed_form,
)
from .optimize import OptimizationConfig, crossover, maximize_bound, orthonormalize, sweep
from .protocol import (
    ReducedState,
    RowPair,
    assemble_composite,
    gauge_rotate,
    pair_gauge_rotate,
    reduce_pairs,
    tie_partner_rows,
    xor_reduced_closed_form,
    xor_rows,
)
from .states import fidelity, make_singlet, make_werner, validate_density

__all__ = [
    "BellBound",
    "OptimizationConfig",
    "ReducedState",
    "RowPair",
    "assemble_composite",
    "chsh_value",
    "correlation_matrix",
    "correlation_matrix_symmetric",
    "crossover",
    "fidelity",
    "gauge_rotate",
    "horodecki_bound",
    "make_singlet",
    "make_werner",
    "maximize_bound",
    "orthonormalize",
    "pair_gauge_rotate",
    "reduce_pairs",
    "sweep",
    "tie_partner_rows",
    "validate_density",
    "xor_bound_closed_form",
    "xor_reduced_closed_form",
    "xor_rows",
]
