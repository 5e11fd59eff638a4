# Cumulative regret of IMLinUCB on star and ray graphs as L grows.
# Star: every leaf only ever talks to the hub, so few edges are relevant to
# any seed and regret grows slowly. Ray: long arms mean each edge is
# relevant to many downstream nodes, so rays should grow faster in L.
# This uses n = 2000 and 3 runs, short enough that the ray slope is still
# noisy and can come out below the star's; the acceptance suite uses
# n = 10^4 and 10 runs.
import numpy as np

from imlinucb import ExperimentConfig, fit_loglog, run_experiment

SIZES = (8, 12, 16, 24)
N = 2000

for kind in ("star", "ray"):
    points = []
    for L in SIZES:
        cfg = ExperimentConfig(
            topology=kind, L=L, K=1, n=N, omega=0.8, features="tabular",
            c="eq4", c_scale=0.1, oracle="exact", regret="coupled",
            runs=3, seed=2024, metrics=False,
        )
        log = run_experiment(cfg)
        R = float(np.mean(log.final_regrets()))
        points.append((L, R))
        print(f"{kind:5s} L={L:3d}  mean R(n)={R:9.2f}")
    fit = fit_loglog(points)
    print(f"{kind:5s} slope {fit.exponent:.2f}  (r^2 {fit.r_squared:.3f})\n")
