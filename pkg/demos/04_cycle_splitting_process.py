"""
The splitting process on the cycle
==================================

On C_n, a non-increasing sequence stays non-increasing under every edge but
the wrap-around one.  The splitting process handles that edge by splitting the
sequence in two monotone pieces.  Its total L1 distance dominates the
averaging process in expectation, and its potential
``Q(x) = sum (n + 1 - i) x_i`` never increases.
"""

import numpy as np

from avgmix.analysis import pc2_comparison, q_functional
from avgmix.process import SplitSystem, pc2_apply, split_step
from avgmix.rng import RngStream

print("wrap edge on (0.6, 0.4, 0, 0):", [np.round(p, 12).tolist() for p in pc2_apply(np.array([0.6, 0.4, 0, 0]), 3)])

# %%
# One trajectory: Q starts at n and only goes down, while the number of
# live sequences grows.
n = 8
sys = SplitSystem.start(np.eye(n)[0])
r = RngStream(0)
for t in range(1, 41):
    sys = split_step(sys, n, r)
    if t % 10 == 0:
        print(f"t={t:3d}  sequences={sys.count:4d}  Q={q_functional(sys):.4f}")

# %%
# Expected distances, with independent streams for the two processes.
c = pc2_comparison(n, [5, 20, 50], trials=1000, r=1)
for t, a, b in zip(c.t, c.mean_a, c.mean_b):
    print(f"t={t:3d}  averaging {a:.4f}  <=  splitting {b:.4f}")
