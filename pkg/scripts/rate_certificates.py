#!/usr/bin/env python3
"""Print fitted convergence rates next to their theoretical envelopes.

Runs plain gradient descent (sublinear and linear regimes), the inertial
proximal gradient method, and its strongly convex variant on small fixtures,
fits the observed objective gaps, and prints the comparison.

Usage: python scripts/rate_certificates.py [--iters 2000]
"""
import argparse
import sys

import numpy as np

from proxsplit.certify import fit_rate
from proxsplit.solvers import SolverConfig, gradient_descent
from proxsplit.suite import (
    anisotropic_quadratic,
    lasso_diag_fixture,
    singular_quadratic_fixture,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--iters", type=int, default=2000)
    args = ap.parse_args()

    print(f"{'run':>24s} {'model':>9s} {'fitted':>12s} {'theory':>12s} {'R^2':>7s}")

    f, x0, x_star, f_star = singular_quadratic_fixture()
    trace = gradient_descent(f, x0, SolverConfig(gamma=1.0 / f.lipschitz,
                                                 max_iter=args.iters))
    gaps = trace.objective - f_star
    c, r2 = fit_rate(np.maximum(gaps, 0.0), "inv_n")
    theory = 0.5 * f.lipschitz * float(np.sum((x0 - x_star) ** 2))
    print(f"{'gd singular':>24s} {'C/n':>9s} {c:12.4e} {theory:12.4e} {r2:7.3f}")

    f2 = anisotropic_quadratic()
    trace = gradient_descent(f2, np.array([1.0, 1.0]),
                             SolverConfig(gamma=1.0 / f2.lipschitz, max_iter=500))
    ratio, r2 = fit_rate(trace.objective, "geometric")
    theory = 1.0 - f2.strong_convexity / f2.lipschitz
    print(f"{'gd strongly convex':>24s} {'r^n':>9s} {ratio:12.4e} {theory:12.4e} "
          f"{r2:7.3f}")

    inst = lasso_diag_fixture(0)
    fq = inst.metadata["f"]
    j_star = inst.ground_truth["objective"]
    x_star = inst.ground_truth["x"]
    trace, _ = inst.run("fista", SolverConfig(max_iter=args.iters))
    c, r2 = fit_rate(np.maximum(trace.objective - j_star, 0.0), "inv_n2")
    theory = 2.0 * fq.lipschitz * float(np.sum(x_star ** 2))
    print(f"{'inertial lasso':>24s} {'C/n^2':>9s} {c:12.4e} {theory:12.4e} "
          f"{r2:7.3f}")

    trace, _ = inst.run("vfista", SolverConfig(max_iter=400))
    ratio, r2 = fit_rate(np.maximum(trace.objective - j_star, 0.0), "geometric")
    theory = 1.0 - np.sqrt(fq.strong_convexity / fq.lipschitz)
    print(f"{'strongly convex inertial':>24s} {'r^n':>9s} {ratio:12.4e} "
          f"{theory:12.4e} {r2:7.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
