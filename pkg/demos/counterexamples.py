"""Supports where the spreading-set description breaks down, at the level of geometry.

Run: python3 demos/counterexamples.py   (about 20 s)
"""

import numpy as np

from spreadlab import geometry as G
from spreadlab.geometry import builtin_support
from spreadlab.pde import Grid, simulate
from spreadlab.metrics import sample
from spreadlab.reaction import make_builtin

# shells of radii 2^n +- 1: the distance ratio oscillates between 0 and 1/3 along rays
shells = builtin_support("shell_union", N=2)
e = np.array([1.0, 0.0])
for n in (5, 8, 11):
    print(f"n={n:2d}: dist(2^n e, U) = {shells.dist_to_U(2**n * e):.0f},"
          f"  dist(3 2^n e, U)/(3 2^n) = {shells.dist_to_U(3 * 2**n * e) / (3 * 2**n):.4f}")
d = G.direction_sets(shells, 0.5)
print("shell labels:", d.counts(), " (no direction is bounded or unbounded)")
print("shells keep U within bounded distance of U_rho:", G.check_dUrho(shells, 0.5, 200.0))

# in 1D the solution is ahead of c* t at some times and behind at others
grid = Grid.line(-2000, 2000, 0.1)
U1 = builtin_support("shell_union", {"n_max": 9}, N=1)
taus = [2.0 ** (n - 2) / 2.0 for n in range(5, 9)]
snaps = {s.time: s for s in simulate(grid, U1, make_builtin("kpp"), 64.0, sorted(set(taus) | {64.0}))}
for n, tau in zip(range(5, 9), taus):
    print(f"n={n}: u(tau_n, 12 c* tau_n) = {float(sample(snaps[tau], [[24.0 * tau]])[0]):.2e}")

# a thin gaussian slab: unbounded along the equator, but its erosion is empty
slab = builtin_support("gaussian_slab")
d = G.direction_sets(slab, 0.5)
k = d.nearest([1.0, 0.0])
print(f"\ngaussian slab equator: ratio to U {d.liminf_ratio[k]:.3f}, ratio to U_rho {d.liminf_ratio_rho[k]:.3f}")
print("slab satisfies the direction hypothesis:", G.check_hyp_U(d))

# a tube plus a thinning parabola: the parabola part is lost to erosion at every scale
tube = builtin_support("tube_plus_parabola")
for R in (50.0, 200.0, 800.0):
    print(f"tube+parabola, probe radius {R:5.0f}: sup dist(U, U_rho) = {G.check_dUrho(tube, 0.5, R)[1]:.2f}")
