"""Minimal front speeds for the builtin reactions, and what the profiles look like.

Run: python3 demos/front_speeds.py
"""

import math

import numpy as np

from spreadlab.front import NoPositiveFrontError, minimal_speed, tristable_terrace_speeds
from spreadlab.reaction import check_hypotheses, integral_sign, make_builtin

# KPP is pulled: the speed is fixed by the linearisation at 0, 2*sqrt(f'(0)) = 2
kpp = make_builtin("kpp")
res = minimal_speed(kpp)
print(f"kpp               c* = {res.c_star:.5f}   bracket {res.bracket}")

# the cubic bistable reaction has the explicit profile 1/(1 + exp(z/sqrt2))
for a in (0.1, 0.25, 0.4, 0.75):
    f = make_builtin("bistable", {"a": a})
    try:
        c = minimal_speed(f).c_star
        print(f"bistable a={a:<5}  c* = {c:.5f}   exact {(1 - 2 * a) / math.sqrt(2):.5f}")
    except NoPositiveFrontError:
        # a > 1/2: the integral of f is negative, so no front moves into 0
        print(f"bistable a={a:<5}  no front, integral sign {integral_sign(f)}")

ign = make_builtin("ignition", {"alpha": 0.3})
print(f"ignition a=0.3    c* = {minimal_speed(ign).c_star:.5f}   theta {check_hypotheses(ign).theta:.3f}")

# the computed profile solves phi'' + c phi' + f(phi) = 0 to finite-difference accuracy
f = make_builtin("bistable", {"a": 0.25})
res = minimal_speed(f)
print(f"\nprofile residual (bistable a=0.25): {np.abs(res.residual(f)).max():.2e}")
z0 = res.profile_z[np.argmin(np.abs(res.profile_phi - 0.5))]
exact = 1 / (1 + np.exp((res.profile_z - z0) / math.sqrt(2)))
print(f"distance to the exact profile:        {np.abs(exact - res.profile_phi).max():.2e}")

# tristable: two fronts, 0 <- beta and beta <- 1; the upper one wins or loses the race
print()
# gamma = 0.7 makes the two halves mirror images when the amplitudes agree
for gamma, amps in ((0.7, (1, 30)), (0.7, (30, 1)), (0.7, (1, 1)), (0.8, (100, 60))):
    f = make_builtin("tristable", {"alpha": 0.2, "beta": 0.5, "gamma": gamma, "amp1": amps[0], "amp2": amps[1]})
    c1, c2 = tristable_terrace_speeds(f)
    kind = "terrace (c1 > c2)" if c1 > c2 + 1e-3 else ("single front (c1 < c2)" if c1 < c2 - 1e-3 else "c1 = c2")
    print(f"tristable gamma={gamma} amps {amps}:  c1 = {c1:.4f}  c2 = {c2:.4f}   {kind}")
