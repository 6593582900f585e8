"""A single Werner pair and the CHSH bound.

One pair with singlet fraction x has a diagonal correlation matrix with
entries -x, so the best CHSH value is 2*sqrt(2)*x.  A single test only
violates the inequality above x = 1/sqrt(2).
"""
import math

import numpy as np

from collective_chsh import correlation_matrix, fidelity, horodecki_bound, make_werner, validate_density

for x in np.linspace(0.0, 1.0, 6):
    rho = make_werner(x)
    assert validate_density(rho)
    bell = horodecki_bound(correlation_matrix(rho))
    print(f"x={x:.1f}  F={fidelity(x):.3f}  bound={bell.bound:.6f}  violation={bell.violation}")

print(f"threshold x = 1/sqrt(2) = {1 / math.sqrt(2):.6f}")
