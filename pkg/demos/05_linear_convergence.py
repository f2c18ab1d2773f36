"""Linear convergence on a gradient-dominated instance.

A least-squares problem over a ring, compressed with a saturating
quantizer under a geometric scaling schedule: the optimality gap plus
consensus error decays geometrically until float precision, and a log-space
fit recovers the ratio.
"""

from dcopt import (
    GeometricSchedule,
    HyperParams,
    SaturatingQuantizer,
    build_graph,
    make_quadratic,
    rate_fit,
    run,
)

n, d, T = 10, 6, 500
problem = make_quadratic(n, d, seed=33, condition_number=5.0)
graph = build_graph("ring", n)
compressor = SaturatingQuantizer(30.0, 0.5, seed=3)

hyper = HyperParams(alpha=0.45, beta=0.6, gamma=0.4, omega=1.0,
                    schedule=GeometricSchedule(0.1, 0.96))
trace = run(problem, graph, compressor, hyper, T=T, x0_seed=7,
            contract=compressor.contract(d))

series = trace.f_bar - problem.f_star + trace.consensus
ratio, r2 = rate_fit(trace.k[20:], series[20:], "geometric", burn_in_frac=0.0)

print(f"{'k':>5s} {'gap+consensus':>15s}")
for k in (0, 20, 100, 250, 500):
    print(f"{k:5d} {series[k]:15.3e}")
print(f"\ngeometric fit over k in [20, {T}]: ratio {ratio:.4f}, R^2 {r2:.4f}")
print(f"total decay: {series[-1] / series[0]:.2e}")
print("\nthe scaling schedule s_k = s0 * 0.96^k is what drives the floor:")
print(f"s_500 = {trace.s_k[-1]:.3e}, so the quantizer's absolute error has")
print("shrunk by the same factor and never limits the linear rate.")
