"""Phase-plane shooting for fronts phi'' + c phi' + f(phi) = 0.

Trajectories are tracked through w = p**2 as functions of q = phi, which
keeps the launch from the degenerate point p = 0 regular.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .reaction import ReactionTerm, check_hypotheses, integral_sign, rescaled

DQ_MAX = 1e-4
STEP_FRACTION = 0.05
# launch value standing in for the limit eps -> 0; see _shoot for why it is so small
EPS0 = 1e-150
PROFILE_DZ = 5e-3
PROFILE_TAIL = 1e-4


class FrontError(RuntimeError):
    pass


class NonFiniteError(FrontError):
    pass


class NoPositiveFrontError(FrontError):
    pass


class BracketError(FrontError):
    pass


class SubsolutionNotFoundError(FrontError):
    pass


class ParameterSearchError(FrontError):
    pass


@dataclass(frozen=True)
class PhaseTrajectory:
    c: float
    epsilon: float
    q_samples: np.ndarray = field(repr=False)
    w_samples: np.ndarray = field(repr=False)
    termination: str
    q_v: float | None = None
    w_1: float | None = None

    @property
    def vanished(self) -> bool:
        return self.termination == "vanished"

    @property
    def reached_one(self) -> bool:
        return self.termination == "reached_one"

    def sigma(self, q):
        """|p| at q, zero past the vanishing point."""
        return np.sqrt(np.interp(q, self.q_samples, self.w_samples, right=0.0))


def _shoot(f: ReactionTerm, c: float, epsilon: float, q_end: float = 1.0, record: bool = True):
    # Steps are capped by DQ_MAX and shrink with max(q, |p|): near the origin the
    # orbit lives on the scale of epsilon and a fixed step would jump over it.
    fs = f.scalar
    sqrt = math.sqrt
    w = epsilon * epsilon
    floor = min(1e-16, 1e-4 * w)
    q = 0.0
    qs = [0.0]
    ws = [w]
    c2 = 2.0 * c
    while q < q_end:
        s = sqrt(w)
        h = min(DQ_MAX, STEP_FRACTION * max(q, s), q_end - q)
        f0 = fs(q)
        f1 = fs(q + 0.5 * h)
        f2 = fs(q + h)
        k1 = c2 * s - 2.0 * f0
        x = w + 0.5 * h * k1
        k2 = c2 * (sqrt(x) if x > 0.0 else 0.0) - 2.0 * f1
        x = w + 0.5 * h * k2
        k3 = c2 * (sqrt(x) if x > 0.0 else 0.0) - 2.0 * f1
        x = w + h * k3
        k4 = c2 * (sqrt(x) if x > 0.0 else 0.0) - 2.0 * f2
        wn = w + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        if not math.isfinite(wn):
            raise NonFiniteError(f"w left the finite range at q={q:.6g} for c={c:.6g}")
        if wn <= floor:
            qv = q + h * w / (w - wn) if w > wn else q + h
            qv = min(qv, q + h)
            if record:
                qs.append(qv)
                ws.append(0.0)
            return qs, ws, "vanished", qv
        q += h
        w = wn
        if record:
            qs.append(q)
            ws.append(w)
    return qs, ws, "reached_one", w


def shoot(f: ReactionTerm, c: float, epsilon: float) -> PhaseTrajectory:
    """Orbit launched from (q, p) = (0, -epsilon), followed until p vanishes or q = 1."""
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must lie in (0, 1]")
    qs, ws, kind, last = _shoot(f, c, epsilon)
    q = np.asarray(qs)
    w = np.asarray(ws)
    if kind == "vanished":
        return PhaseTrajectory(c, epsilon, q, w, kind, q_v=last)
    return PhaseTrajectory(c, epsilon, q, w, kind, w_1=last)


def _reaches_one(f: ReactionTerm, c: float, epsilon: float = EPS0) -> bool:
    return _shoot(f, c, epsilon, record=False)[2] == "reached_one"


@dataclass(frozen=True)
class FrontResult:
    c_star: float
    bracket: tuple
    profile_z: np.ndarray = field(repr=False)
    profile_phi: np.ndarray = field(repr=False)
    theta_used: float
    profile_dphi: np.ndarray = field(default=None, repr=False)

    def sigma_star(self, q):
        """|p| along the front orbit as a function of q, linear below the sampled tail."""
        phi = self.profile_phi[::-1]
        slope = -self.profile_dphi[::-1]
        q = np.asarray(q, dtype=float)
        inside = np.interp(q, phi, slope)
        return np.where(q < phi[0], slope[0] / phi[0] * q, inside)

    def residual(self, f: ReactionTerm) -> np.ndarray:
        z, phi = self.profile_z, self.profile_phi
        dz = z[1] - z[0]
        d2 = (phi[2:] - 2.0 * phi[1:-1] + phi[:-2]) / dz**2
        d1 = (phi[2:] - phi[:-2]) / (2.0 * dz)
        return d2 + self.c_star * d1 + f.evaluate(phi[1:-1])


def _front_rhs(f: ReactionTerm, c: float):
    fs = f.scalar

    def rhs(z, y):
        return (y[1], -c * y[1] - fs(y[0]))

    return rhs


def _profile_from_top(f: ReactionTerm, c: float, theta: float, dz: float = PROFILE_DZ):
    """Orbit leaving the saddle (1, 0), sampled on a uniform z grid with phi(0) = theta.

    The orbit starts a small distance below 1 along the unstable direction and is
    followed until phi drops to PROFILE_TAIL or the slope turns nonnegative.
    """
    rhs = _front_rhs(f, c)
    fp1 = min(f.derivative(1.0), -1e-12)
    lam = 0.5 * (-c + math.sqrt(c * c - 4.0 * fp1))
    delta = 1e-8

    def bottom(z, y):
        return y[0] - PROFILE_TAIL

    def turn(z, y):
        return y[1]

    bottom.terminal = True
    turn.terminal = True
    sol = solve_ivp(
        rhs, (0.0, 1e4), (1.0 - delta, -lam * delta), method="DOP853", rtol=1e-12,
        atol=1e-15, dense_output=True, events=(bottom, turn),
    )
    if len(sol.t_events[0]) == 0:
        return None
    zs = sol.t
    phis = sol.y[0]
    k = int(np.argmax(phis <= theta))
    if phis[k] > theta:
        raise FrontError(f"orbit at c={c:.6g} turns back above theta={theta:.4g}")
    lo, hi = zs[k - 1], zs[k]
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if sol.sol(mid)[0] > theta:
            lo = mid
        else:
            hi = mid
    z0 = 0.5 * (lo + hi)
    k_lo = math.ceil(-z0 / dz)
    k_hi = math.floor((zs[-1] - z0) / dz)
    z = dz * np.arange(k_lo, k_hi + 1)
    y = sol.sol(z + z0)
    return z, y[0], y[1]


def minimal_speed(f: ReactionTerm, tol: float = 1e-3, epsilon: float = EPS0) -> FrontResult:
    """Smallest c whose orbit from the origin reaches q = 1 with p < 0, by bisection."""
    if integral_sign(f) <= 0:
        raise NoPositiveFrontError(
            f"{f.id}: the integral of f over [0,1] is not positive, fronts cannot move forward"
        )
    report = check_hypotheses(f)
    theta = report.theta if report.theta is not None else 0.5
    lo = 0.0
    hi = 2.0 + f.max_abs_derivative()
    if not _reaches_one(f, hi, epsilon):
        raise BracketError(f"{f.id}: orbit at c={hi:.4g} does not reach q=1")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _reaches_one(f, mid, epsilon):
            hi = mid
        else:
            lo = mid
    # The orbit leaving (1, 0) at the reported speed must reach the tail; for pushed
    # fronts this pins the speed inside the bracket well below tol.
    c_prof = hi
    prof = _profile_from_top(f, hi, theta)
    if prof is None:
        a, b = lo, hi
        if _profile_from_top(f, a, theta) is None:
            raise BracketError(f"{f.id}: no orbit from (1,0) reaches the tail inside {lo, hi}")
        for _ in range(40):
            mid = 0.5 * (a + b)
            if _profile_from_top(f, mid, theta) is None:
                b = mid
            else:
                a = mid
        c_prof = a
        prof = _profile_from_top(f, a, theta)
    z, phi, dphi = prof
    return FrontResult(c_prof, (lo, hi), z, phi, theta, dphi)


def tristable_terrace_speeds(f: ReactionTerm, tol: float = 1e-3):
    """Speeds of the fronts 0 <- beta and beta <- 1 of a tristable reaction."""
    if f.kind != "tristable":
        raise ValueError("tristable_terrace_speeds needs a tristable reaction")
    beta = f.params["beta"]
    c1 = minimal_speed(rescaled(f, 0.0, beta), tol).c_star
    c2 = minimal_speed(rescaled(f, beta, 1.0), tol).c_star
    return c1, c2


@dataclass(frozen=True)
class CompactSubsolution:
    c: float
    a: float
    z: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    epsilon_c: float
    top: float
    theta: float

    def residual(self, f: ReactionTerm) -> np.ndarray:
        dz = self.z[1] - self.z[0]
        phi = self.phi
        d2 = (phi[2:] - 2.0 * phi[1:-1] + phi[:-2]) / dz**2
        d1 = (phi[2:] - phi[:-2]) / (2.0 * dz)
        return d2 + self.c * d1 + f.evaluate(phi[1:-1])


def compact_subsolution(
    f: ReactionTerm, c: float, front: FrontResult | None = None, eps_bar: float = 0.05
) -> CompactSubsolution:
    """Decreasing profile on [0, a] with zero slope at 0 and phi(a) = 0, for c just below c*.

    The launch height is the smallest eps <= eps_bar whose orbit stays below the
    critical one up to max(q_c, theta); the critical orbit is approximated by the
    front orbit of the bracket's upper speed.
    """
    front = front or minimal_speed(f)
    if c >= front.bracket[0]:
        raise ValueError(f"c={c} is not below the speed bracket {front.bracket}")
    theta = front.theta_used
    limit = shoot(f, c, EPS0)
    if limit.reached_one:
        raise ValueError(f"c={c} reaches q=1 from the origin; it is not below c*")
    q_top = max(limit.q_v, theta)

    def below_reference(eps):
        qs, ws, kind, _ = _shoot(f, c, eps, q_end=q_top)
        if kind == "vanished":
            return False
        q = np.asarray(qs)
        return bool(np.all(np.sqrt(np.asarray(ws)) > front.sigma_star(q)))

    if not below_reference(eps_bar):
        raise SubsolutionNotFoundError(
            f"c={c} is too far below c*={front.c_star:.4g}: no launch height up to {eps_bar} works"
        )
    # eps_c can be astronomically small near c*, so bisect on log eps
    lo, hi = math.log(EPS0), math.log(eps_bar)
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        if below_reference(math.exp(mid)):
            hi = mid
        else:
            lo = mid
    hi = math.exp(hi)
    traj = shoot(f, c, hi)
    if not traj.vanished or not theta < traj.q_v < 1.0:
        raise SubsolutionNotFoundError(f"orbit at c={c} does not turn back inside (theta, 1)")
    top = traj.q_v
    rhs = _front_rhs(f, c)

    def ground(z, y):
        return y[0]

    ground.terminal = True
    sol = solve_ivp(
        rhs, (0.0, 1e3), (top, 0.0), method="DOP853", rtol=1e-12, atol=1e-14,
        dense_output=True, events=ground,
    )
    a = float(sol.t[-1])
    n = max(int(a / 2e-3), 50)
    z = np.linspace(0.0, a, n + 1)
    phi = sol.sol(z)[0]
    phi[-1] = 0.0
    return CompactSubsolution(c, a, z, phi, hi, top, theta)


@dataclass(frozen=True)
class ExponentialSupersolution:
    """Decreasing solution on the whole line with phi(0) = 1, built from the orbit at c > c*."""

    c: float
    A: float
    m: float
    b: float
    z_tail: float
    rho_tail: float
    _sol: object = field(repr=False)
    _f: ReactionTerm = field(repr=False)

    def rho(self, z):
        """-phi'/phi."""
        z = np.asarray(z, dtype=float)
        out = np.empty_like(z)
        left = z < 0
        mid = (z >= 0) & (z <= self.z_tail)
        right = z > self.z_tail
        with np.errstate(over="ignore", invalid="ignore"):
            e = np.exp(-self.c * z[left])
            out[left] = np.where(np.isinf(e), self.c, self.c * self.A * e / (self.A * e + 1.0 - self.A))
        if mid.any():
            out[mid] = self._sol.sol(z[mid])[1]
        out[right] = self.rho_tail
        return out

    def phi(self, z):
        z = np.asarray(z, dtype=float)
        out = np.empty_like(z)
        left = z < 0
        mid = (z >= 0) & (z <= self.z_tail)
        right = z > self.z_tail
        with np.errstate(over="ignore"):
            out[left] = self.A * np.exp(-self.c * z[left]) + 1.0 - self.A
        if mid.any():
            out[mid] = np.exp(self._sol.sol(z[mid])[0])
        log_tail = self._sol.sol(self.z_tail)[0]
        out[right] = np.exp(log_tail - self.rho_tail * (z[right] - self.z_tail))
        return out

    def dphi(self, z):
        z = np.asarray(z, dtype=float)
        out = np.empty_like(z)
        left = z < 0
        with np.errstate(over="ignore"):
            out[left] = -self.c * self.A * np.exp(-self.c * z[left])
        out[~left] = -self.rho(z[~left]) * self.phi(z[~left])
        return out

    def d2phi(self, z):
        z = np.asarray(z, dtype=float)
        p = self.phi(z)
        tail = z > self.z_tail
        out = -self.c * self.dphi(z) - self._f.evaluate(p)
        # beyond z_tail the profile is the exponential solution of the linearised equation
        out[tail] = self.rho_tail**2 * p[tail]
        return out


def exponential_supersolution(
    f: ReactionTerm, c: float, tail: float = 1e-6
) -> ExponentialSupersolution:
    traj = shoot(f, c, EPS0)
    if not traj.reached_one:
        raise FrontError(f"c={c} is not above c*: the orbit vanishes at q={traj.q_v:.4g}")
    sigma1 = math.sqrt(traj.w_1)
    A = sigma1 / c
    fs = f.scalar
    log_floor = math.log(tail)

    # l = log phi, r = -phi'/phi
    def rhs(z, y):
        phi = math.exp(y[0])
        g = fs(phi) / phi
        return (-y[1], y[1] * y[1] - c * y[1] + g)

    def low(z, y):
        return y[0] - log_floor

    low.terminal = True
    sol = solve_ivp(
        rhs, (0.0, 1e4), (0.0, sigma1), method="DOP853", rtol=1e-11, atol=1e-13,
        dense_output=True, events=low,
    )
    if sol.status != 1:
        raise FrontError(f"profile at c={c} did not decay to {tail}")
    z_tail = float(sol.t[-1])
    rho_tail = float(sol.y[1, -1])
    proto = ExponentialSupersolution(c, A, 1.0, 0.0, z_tail, rho_tail, sol, f)

    zs = np.concatenate([np.linspace(-40.0 / c, 0.0, 2001), np.linspace(0.0, z_tail, 4001)])
    ratios = np.concatenate([proto.rho(zs), [c, rho_tail]])
    m = max(float(ratios.max()), 1.0 / float(ratios.min())) * (1.0 + 1e-9)
    m = max(m, 1.0 + 1e-9)
    grid = np.linspace(0.0, z_tail + 10.0, 8001)
    curv = proto.d2phi(grid)
    bad = np.nonzero(curv < 0.0)[0]
    b = float(grid[bad[-1] + 1]) if len(bad) else float(grid[1])
    return ExponentialSupersolution(c, A, m, b, z_tail, rho_tail, sol, f)


@dataclass(frozen=True)
class RetractingSupersolution:
    c: float
    c_prime: float
    c_second: float
    beta: float
    s0: float
    Z: float
    L: float
    R_prime: float
    R: float
    T: float
    N: int
    lam: float
    m: float
    b: float
    profile: ExponentialSupersolution = field(repr=False)
    evaluator: Callable = field(repr=False)
    checks: dict = field(default_factory=dict)

    def __call__(self, t, r):
        return self.evaluator(t, r)


def _psi_parts(prof: ExponentialSupersolution, beta: float, Z: float):
    def weight(z):
        with np.errstate(over="ignore"):
            return np.exp(-beta * (z - Z))

    def psi(z):
        with np.errstate(over="ignore", invalid="ignore"):
            return prof.phi(z) * weight(z)

    def dpsi(z):
        with np.errstate(over="ignore", invalid="ignore"):
            return (prof.dphi(z) - beta * prof.phi(z)) * weight(z)

    def d2psi(z):
        with np.errstate(over="ignore", invalid="ignore"):
            return (prof.d2phi(z) - 2.0 * beta * prof.dphi(z) + beta**2 * prof.phi(z)) * weight(z)

    return psi, dpsi, d2psi


def build_retracting_supersolution(
    f: ReactionTerm,
    c: float,
    lam: float,
    T: float,
    N: int,
    front: FrontResult | None = None,
    samples: int = 1000,
) -> RetractingSupersolution:
    """Radial supersolution whose level sets shrink toward the origin over [0, T]."""
    front = front or minimal_speed(f)
    c_star = front.c_star
    if c <= c_star:
        raise ValueError(f"c={c} must exceed c*={c_star:.4g}")
    if not 0.0 < lam < 1.0 or T <= 0.0 or N < 1:
        raise ValueError("need 0 < lambda < 1, T > 0 and N >= 1")
    c1 = c_star + 2.0 * (c - c_star) / 3.0
    c2 = c_star + (c - c_star) / 3.0
    prof = exponential_supersolution(f, c2)
    m, b = prof.m, prof.b
    gap = c1 - c2

    fp0 = f.derivative(0.0)
    s = np.linspace(0.0, 1.0, samples + 1)[1:-1]
    ok = np.abs(f.evaluate(s) - fp0 * s) <= gap / (4.0 * m) * s
    first_bad = int(np.argmin(ok)) if not ok.all() else len(s)
    if first_bad == 0:
        # the admissible interval is shorter than the scan spacing; refine near zero
        s = np.geomspace(1e-8, s[0], samples)
        ok = np.abs(f.evaluate(s) - fp0 * s) <= gap / (4.0 * m) * s
        first_bad = int(np.argmin(ok)) if not ok.all() else len(s)
        if first_bad == 0:
            raise ParameterSearchError("no s0 satisfies the linearisation bound")
    s0 = float(s[first_bad - 1])
    check_s = np.linspace(0.0, s0, samples + 1)[1:]
    s0_ok = bool(np.all(np.abs(f.evaluate(check_s) - fp0 * check_s) <= gap / (4.0 * m) * check_s))

    def level(target):
        lo, hi = 0.0, 1.0
        while prof.phi(np.array([hi]))[0] > target:
            hi *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if prof.phi(np.array([mid]))[0] > target:
                lo = mid
            else:
                hi = mid
        return hi

    Z = level(s0)
    zs = np.linspace(-10.0, prof.z_tail + 20.0, samples)
    beta = 0.5 * gap
    while True:
        psi, dpsi, d2psi = _psi_parts(prof, beta, Z)
        lhs = -d2psi(zs) - (c1 - beta) * dpsi(zs)
        rhs = f.evaluate(prof.phi(zs)) * np.exp(-beta * (zs - Z)) + gap / (2.0 * m) * psi(zs)
        if np.all(lhs > rhs):
            break
        beta *= 0.5
        if beta < 1e-8:
            raise ParameterSearchError(f"no admissible decay rate found; c={c} may be too close to c*")
    L = max(Z + math.log(2.0) / beta, b, level(lam)) + 1.0
    R_prime = (N - 1) / beta + 1.0
    R = R_prime + L
    psi, dpsi, d2psi = _psi_parts(prof, beta, Z)

    def branches(t, r):
        # r <= 0 half-line of the one-dimensional construction
        za = r - c1 * (t - T) + L
        zb = -r - c1 * (t - T) + L
        return prof.phi(za), psi(za) + psi(zb)

    def line_value(t, r):
        v1, v2 = branches(t, -np.abs(r))
        return np.minimum(v1, v2)

    def evaluator(t, r):
        t, r = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(r, dtype=float))
        inner = r <= R_prime
        arg = np.where(inner, 0.0, R_prime - r)
        out = line_value(t.ravel(), arg.ravel()).reshape(t.shape)
        if out.ndim == 0:
            return float(out)
        return out

    sup = RetractingSupersolution(
        c, c1, c2, beta, s0, Z, L, R_prime, R, T, N, lam, m, b, prof, evaluator
    )
    sup.checks.update(_verify(sup, f, s0_ok, samples))
    return sup


def radial_residual(sup: RetractingSupersolution, f: ReactionTerm, t, rad):
    """Residual of the active branch at radii rad > R' from closed-form derivatives."""
    t, rad = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(rad, dtype=float))
    t = t.ravel()
    rad = rad.ravel()
    prof, c1, L, T, N = sup.profile, sup.c_prime, sup.L, sup.T, sup.N
    psi, dpsi, d2psi = _psi_parts(prof, sup.beta, sup.Z)
    r = sup.R_prime - rad
    za = r - c1 * (t - T) + L
    zb = -r - c1 * (t - T) + L
    v1 = prof.phi(za)
    v2 = psi(za) + psi(zb)
    use1 = v1 <= v2
    with np.errstate(over="ignore", invalid="ignore"):
        vt = np.where(use1, -c1 * prof.dphi(za), -c1 * (dpsi(za) + dpsi(zb)))
        vr = np.where(use1, prof.dphi(za), dpsi(za) - dpsi(zb))
        vrr = np.where(use1, prof.d2phi(za), d2psi(za) + d2psi(zb))
        v = np.minimum(v1, v2)
        return vt - vrr + (N - 1) / rad * vr - f.evaluate(v)


def _verify(sup: RetractingSupersolution, f: ReactionTerm, s0_ok: bool, samples: int) -> dict:
    far = np.linspace(sup.R + sup.c * sup.T, 2.0 * (sup.R + sup.c * sup.T), samples)
    times = np.linspace(0.0, sup.T, samples)
    top = sup.evaluator(np.zeros_like(far), far)
    centre = sup.evaluator(times, np.zeros_like(times))
    tt, rr = np.meshgrid(
        np.linspace(0.0, sup.T, 41),
        np.linspace(sup.R_prime + 1e-3, sup.R + sup.c * sup.T + 20.0, 400),
        indexing="ij",
    )
    res = radial_residual(sup, f, tt, rr)
    # inside the cap the value is v(t, 0): only d/dt and f act there
    dt = 1e-5
    tc = np.linspace(dt, sup.T - dt, 200)
    vc = sup.evaluator(tc, 0.0 * tc)
    vdot = (sup.evaluator(tc + dt, 0.0 * tc) - sup.evaluator(tc - dt, 0.0 * tc)) / (2.0 * dt)
    cap = vdot - f.evaluate(vc)
    checks = {
        "linearisation_bound": s0_ok,
        "L_bound": bool(sup.L > max(sup.Z + math.log(2.0) / sup.beta, sup.b)),
        "R_prime_bound": bool(sup.R_prime > (sup.N - 1) / sup.beta),
        "initial_above_one": bool(np.all(top >= 1.0)),
        "centre_below_lambda": bool(np.all(centre < sup.lam)),
        "min_residual": float(np.nanmin(res)),
        "residual_ok": bool(np.nanmin(res) >= -1e-6),
        "cap_residual_ok": bool(np.min(cap) >= -1e-6),
    }
    checks["all_ok"] = _all_ok(checks)
    return checks


def _all_ok(checks: dict) -> bool:
    keys = (
        "linearisation_bound", "L_bound", "R_prime_bound", "initial_above_one",
        "centre_below_lambda", "residual_ok", "cap_residual_ok",
    )
    return all(checks[k] for k in keys)
