"""
The slowed pair process
=======================

Pick a uniform node pair and average it only if it is an edge.  On K_n this is
the ordinary process; on any other graph some steps are wasted.  With the same
starting vector, K_n has the smallest expected L1 distance at every step.
"""

from avgmix import make_graph
from avgmix.analysis import slowed_comparison

for spec in ("star:8", "path:8", "cycle:8"):
    c = slowed_comparison(make_graph(spec), "corner:0", t_max=100, trials=3000, r=5)
    print(f"{spec}: K_8 ahead at {int(c.holds().sum())}/{len(c.t)} checkpoints (2 SE)")
    for t in (10, 50, 100):
        print(f"   t={t:3d}  K_8 {c.mean_a[t]:.4f}   {spec} {c.mean_b[t]:.4f}")
