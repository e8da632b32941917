#!/usr/bin/env python3
"""
Example usage of LCU Walk Simulator as a Python module.
"""

import math

from lcu_walk import ParitySpec, make_parity_path, make_random_sparse, plan_segments, run, simulate
from lcu_walk.hamiltonian import parity_states
from lcu_walk.walk import build_walk_system, spectral_check


def example_basic_usage():
    """Simulate a random instance and compare with e^{-iHt}."""
    H = make_random_sparse(n=2, d=2, h_max_target=1.0, seed=7)
    report = simulate(H, t=1.0, epsilon=1e-6)
    print(f"segments={report.plan.num_segments} k={report.plan.k} l={report.plan.l_iters}")
    print(f"queries={report.queries} spectral_error={report.spectral_error:.3e}")


def example_tradeoff():
    """Compare the fixed-z and tradeoff planners on the same instance."""
    H = make_random_sparse(n=2, d=2, h_max_target=1.0, seed=3)
    for strategy, alpha in (("fixed_z", 1.0), ("tradeoff", 0.5), ("tradeoff", 1.0)):
        plan = plan_segments(H, 4.0, 1e-6, strategy, alpha)
        report = run(H, plan)
        print(f"{strategy:<9} alpha={plan.alpha:.1f} segments={plan.num_segments:>3} "
              f"queries={report.queries:>6} error={report.spectral_error:.2e}")


def example_walk_spectrum():
    """Check the walk eigenvalue relation directly."""
    ws = build_walk_system(make_random_sparse(n=2, d=2, h_max_target=1.0, seed=11))
    report = spectral_check(ws)
    print(f"max residual={report.max_residual:.2e} max mismatch={report.max_mismatch:.2e}")


def example_parity():
    """Parity transport on the twisted double path."""
    spec = ParitySpec(N=4, x="1011")
    H = make_parity_path(spec, "H2")
    report = simulate(H, math.pi / 2, 1e-6)
    start, target = parity_states(spec, "H2", H.N)
    print(f"parity(x)={spec.parity} fidelity={report.fidelity(start, target):.10f}")


if __name__ == "__main__":
    print("LCU Walk Simulator Examples")
    print("=" * 30)
    example_basic_usage()
    example_tradeoff()
    example_walk_spectrum()
    example_parity()
