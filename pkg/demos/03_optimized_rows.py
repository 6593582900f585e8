"""Optimizing the retained rows, and where XOR stops being best.

For two pairs the XOR rows are already optimal.  For three pairs they stop
being optimal somewhere near x = 0.58, above which a general transformation
does strictly better.  The crossover search takes under a minute.
"""
from collective_chsh import OptimizationConfig, crossover, maximize_bound, xor_bound_closed_form

cfg = OptimizationConfig(restarts=16, seed=0)
for n, x in [(2, 0.6), (3, 0.5), (3, 0.8)]:
    res = maximize_bound(n, x, cfg)
    print(
        f"n={n} x={x}  optimized={res.bell.bound:.7f}  xor={xor_bound_closed_form(n, x):.7f}"
        f"  label={res.strategy_label}"
    )

print("crossover n=3:", crossover(3, OptimizationConfig(restarts=32)))
