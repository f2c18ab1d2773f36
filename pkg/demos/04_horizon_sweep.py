"""Sum-rate decay across horizons, with and without an exact first round.

For each horizon T the stepsize and scaling recursion are re-derived from
the horizon-dependent displays, the run executes, and the averaged
stationarity-plus-consensus metric is fit to a power law in T.  The
uncompressed-first-exchange variant decays at a visibly steeper rate.
"""

import numpy as np

from dcopt import OneBit, build_graph, make_nonconvex, rate_fit, run, theorem_params

problem = make_nonconvex(10, 5, seed=41)
graph = build_graph("complete", 10)
compressor = OneBit(1.0, seed=13)
contract = compressor.contract(5)
horizons = [500, 2000, 8000]

for regime, label in [("T1_local_nonconvex", "compressed from round 0"),
                      ("T2_local_exact_first", "one exact first round")]:
    metrics = []
    for T in horizons:
        sel = theorem_params(regime, problem, graph, contract, T=T, x0_seed=11)
        tr = run(problem, graph, compressor, sel.hyper, T=T,
                 init_mode=sel.init_mode, x0=sel.x0, contract=contract)
        metrics.append(float(np.mean(tr.grad_sq[:-1] + tr.consensus[:-1])))
    exponent, r2 = rate_fit(horizons, metrics, "power_law", burn_in_frac=0.0)
    pretty = ", ".join(f"T={t}: {m:.3e}" for t, m in zip(horizons, metrics))
    print(f"{label}:")
    print(f"  {pretty}")
    print(f"  fitted metric ~ T^{exponent:.3f}  (R^2 = {r2:.4f})\n")

print("the guarantees are upper bounds: 1/sqrt(T) for the compressed-from-")
print("round-0 schedule and 1/T^(2/3) after one exact exchange, so fitted")
print("exponents at or below -0.5 and -0.67 are the expected outcome.")
