"""How the imitation error falls as reflecting elements are added.

For a fixed random target layer W (unit-norm columns), sweep the total
number of reflecting elements M for a single RIS and for five RISs, and
print the mean imitation error over a few channel seeds. More elements
give more passive beamforming gain; more surfaces raise the effective
channel rank, which matters most when M is large.
"""
import numpy as np

from airfc import OptimizerOptions, SystemConfig, gen_channel_set, \
    run_alternating
from airfc.cli import random_unit_column_weights

N = 8
K_DB = 10.0
PMAX = 10.0          # 10 dB
SEEDS = range(5)

print(f"{'M':>5} {'L=1':>12} {'L=5':>12}")
for m in (20, 40, 60, 80, 100):
    row = []
    for l in (1, 5):
        errs = []
        for seed in SEEDS:
            cfg = SystemConfig(n=N, m=m, l=l, k_db=K_DB, pmax=PMAX, sigma2=1.0)
            cs = gen_channel_set(cfg, np.random.default_rng(100 * m + seed))
            w = random_unit_column_weights(N, np.random.default_rng(seed))
            _, report = run_alternating(cfg, cs, w,
                                        OptimizerOptions(max_iters=80, seed=seed))
            errs.append(report.imitation_error)
        row.append(np.mean(errs))
    print(f"{m:>5} {row[0]:>12.4f} {row[1]:>12.4f}")
