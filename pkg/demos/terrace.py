"""A tristable reaction whose upper front is faster: the solution develops a terrace at beta.

Run: python3 demos/terrace.py   (about 30 s)
"""

import numpy as np

from spreadlab.front import tristable_terrace_speeds
from spreadlab.geometry import builtin_support
from spreadlab.pde import Grid, simulate
from spreadlab.reaction import make_builtin

f = make_builtin("tristable", {"alpha": 0.2, "beta": 0.5, "gamma": 0.8, "amp1": 100.0, "amp2": 60.0})
c1, c2 = tristable_terrace_speeds(f)
print(f"lower front 0 <- 1/2: c1 = {c1:.4f};  upper front 1/2 <- 1: c2 = {c2:.4f}")

grid = Grid.line(-300, 300, 0.1)
x = grid.axes[0]
for snap in simulate(grid, builtin_support("intervals", {"bounds": [[-5, 5]]}, N=1), f, 40.0, [10.0, 20.0, 40.0]):
    u = snap.values
    right = x >= 0
    outer = x[right][np.nonzero(u[right] > 0.25)[0][-1]]
    inner = x[right][np.nonzero(u[right] > 0.75)[0][-1]]
    print(f"t = {snap.time:4.0f}: u > 3/4 up to x = {inner:7.2f} ({inner / snap.time:.3f} t),"
          f"  u > 1/4 up to x = {outer:7.2f} ({outer / snap.time:.3f} t)")

t = 40.0
band = (np.abs(x) >= 1.1 * c2 * t) & (np.abs(x) <= 0.9 * c1 * t)
print(f"on {1.1 * c2 * t:.1f} <= |x| <= {0.9 * c1 * t:.1f} at t = 40: max |u - 1/2| = {np.abs(snap.values[band] - 0.5).max():.2e}")
