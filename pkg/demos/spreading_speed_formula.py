"""Spreading speeds from unbounded supports: w(e) = c* / min(1, dist(e, R+ U(U))).

Run: python3 demos/spreading_speed_formula.py
"""

import math

import numpy as np

from spreadlab import geometry as G

C_STAR = 2.0

for spec in ("halfspace", "cone_subgraph(alpha=-1)", "cone_subgraph(alpha=1)", "sqrt_subgraph", "ball(radius=3)"):
    U = G.parse_support(spec)
    dirs = G.direction_sets(U, rho=0.5)
    pred = G.predict(dirs, C_STAR)
    print(f"{spec:26s} {dirs.counts()}  hyp_U={G.check_hyp_U(dirs)}")
    for deg in (90, 45, 0, -45):
        e = np.array([math.cos(math.radians(deg)), math.sin(math.radians(deg))])
        print(f"    w at {deg:>4} deg = {pred.w_of_e(e):.4f}")

# the downward cone spreads sideways at c*/sin(45 deg) = 2 sqrt 2
pred = G.predict(G.direction_sets(G.parse_support("cone_subgraph(alpha=-1)"), 0.5), C_STAR)
print(f"\ncone sideways: {pred.w_of_e(np.array([1.0, 0.0])):.5f}  vs 2*sqrt2 = {2 * math.sqrt(2):.5f}")

# two descriptions of the spreading set: radial envelope and Minkowski sum, same answer
P = np.random.default_rng(0).uniform(-20, 20, (10000, 2))
agree = np.mean(pred.W_contains(P) == pred.radial_contains(P))
print(f"envelope and Minkowski tests agree on {100 * agree:.2f}% of 10^4 random points")

# the growth of dist(t e, U)/t matches the angle to the nearest unbounded direction
U = G.parse_support("cone_subgraph(alpha=-1)")
lhs, rhs = G.check_eB_identity(U, pred.dirs, [1.0, 0.0])
print(f"dist(t e, U)/t = {lhs:.4f},  sqrt(1 - (xi.e)^2) = {rhs:.4f}")
