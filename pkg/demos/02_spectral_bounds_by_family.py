"""
Spectral bounds by graph family
===============================

The quantity gamma = |E| / lambda_2 controls how fast the L2 distance decays.
For several families we print gamma, the L2 sandwich
``(2 gamma - 1) log(1/eps) <= t(eps, 2) <= 4 gamma log(1/eps)``, and a Monte
Carlo estimate started from the Fiedler vector (the slowest unit-L2 start).
"""

from avgmix import make_graph
from avgmix.analysis import bound_report, estimate_mixing_time
from avgmix.spectral import spectral_summary

eps = 0.1
print(f"{'graph':>14} {'lambda2':>10} {'gamma':>9} {'lower':>8} {'t_hat':>7} {'upper':>8}")
for spec in ("complete:32", "star:32", "btree:31", "cycle:32", "dumbbell:16"):
    g = make_graph(spec)
    s = spectral_summary(g)
    b = bound_report(g, eps, s)
    est = estimate_mixing_time(g, "fiedler", eps, p=2, q=2, trials=60, r=1)
    print(f"{spec:>14} {s.lambda2:10.5f} {s.gamma:9.1f} {b.l2_lower:8.0f} {est.t_hat:7d} {b.l2_upper:8.0f}")

# %%
# The lower end is nearly tight from the Fiedler start: the first step
# contracts the squared distance by exactly 1 - 1/(2 gamma), and the state
# stays close to the eigenvector for a long time.  On K_n every zero-sum
# vector is an eigenvector, so the decay is exactly geometric and the estimate
# can land one step above the upper bound: the bound is real-valued while t
# is an integer.
