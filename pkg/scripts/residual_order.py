"""Residual and solution error of the Green operator for Gaussian forcing.

The last column applies the same difference stencil to the exact solution;
it bounds from below what any discretisation can report at that spacing.
"""
import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from oracles import gaussian_bounded_solution  # noqa: E402
from wavefront.perron import Grid, Profile, TailSpec, apply_green, make_kernel, ode_residual  # noqa: E402


def main():
    k = make_kernel(1.0, 1.0, 1.0)
    print(f"{'h':>7} {'residual':>11} {'order':>7} {'sol. error':>11} {'exact resid':>11}")
    prev = None
    for h in (0.04, 0.02, 0.01, 0.005, 0.0025):
        g = Grid.symmetric(20.0, h)
        f = Profile.from_function(g, lambda t: np.exp(-t * t), TailSpec.make(1))
        u = apply_green(k, f)
        exact = Profile(g, gaussian_bounded_solution(1, 1, 1, g.nodes), TailSpec.make(1))
        res = ode_residual(k, u, f)
        order = "" if prev is None else f"{math.log2(prev / res):.4f}"
        err = np.max(np.abs(u.values - exact.values))
        print(f"{h:7.4f} {res:11.4e} {order:>7} {err:11.3e} {ode_residual(k, exact, f):11.4e}")
        prev = res


if __name__ == "__main__":
    main()
