"""Two one-dimensional ingredients: the uniform oscillatory-integral bound and a weighted Fourier inequality.

Run:  python3 demos/oscillatory_and_pitt.py
"""

import math

import numpy as np

from damekricci.dispersive import walther_constants
from damekricci.experiments import oscillatory_bound_check, pitt_check


def main():
    a, beta = 0.5, 0.2
    w = walther_constants(a, beta)
    rep = oscillatory_bound_check(a, beta, [16, 64, 256], [-1, 0, 1], np.geomspace(0.01, 100, 17))
    print(f"|I(x)| / (|x|^-{w.c1:g} + |x|^-{w.c2:g}): sup {rep.sup_ratio:.4f}, "
          f"change when N grows 4x: {rep.inputs['drift']:.2e}")

    for alpha in (0.0, 0.25, 0.49):
        rep = pitt_check([(1.5, 0.5 / 2 ** k) for k in range(5)], alpha)
        ratios = ", ".join(f"{r['ratio']:.4f}" for r in rep.per_point)
        print(f"alpha={alpha:<4}: ratios [{ratios}]  ({'bounded' if rep.passed else 'growing'})")
    print(f"alpha = 0 reproduces Plancherel: sqrt(2 pi) = {math.sqrt(2 * math.pi):.4f}")


if __name__ == "__main__":
    main()
