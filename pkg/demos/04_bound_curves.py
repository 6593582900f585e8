"""Bound versus singlet fraction for one to four pairs.

Runs an optimized sweep (a couple of minutes), prints where each curve
crosses 2 and writes ``curves.csv``.  Pass ``--plot`` to draw the curves if
matplotlib is available.
"""
import sys

import numpy as np

from collective_chsh import OptimizationConfig, sweep

xs = [round(0.01 * i, 10) for i in range(101)]
rows = sweep([1, 2, 3, 4], xs, OptimizationConfig(restarts=1), "both")

with open("curves.csv", "w") as fh:
    fh.write("n,x,xor_bound,opt_bound\n")
    for r in rows:
        fh.write(f"{r.n},{r.x},{r.xor_bound:.12g},{r.opt_bound:.12g}\n")

curves = {n: np.array([r.opt_bound for r in rows if r.n == n]) for n in range(1, 5)}
for n, ys in curves.items():
    i = int(np.argmax(ys > 2.0))
    x0 = xs[i - 1] + (2.0 - ys[i - 1]) * (xs[i] - xs[i - 1]) / (ys[i] - ys[i - 1])
    print(f"n={n}: crosses 2 at x ~ {x0:.4f}")

if "--plot" in sys.argv:
    import matplotlib.pyplot as plt

    for n, ys in curves.items():
        plt.plot(xs, ys, label=f"{n} pair{'s' if n > 1 else ''}")
    plt.axhline(2.0, color="k", lw=0.5)
    plt.xlabel("singlet fraction x")
    plt.ylabel("max CHSH value")
    plt.legend()
    plt.show()
