"""Asymptotic quantities measured on simulation snapshots."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import map_coordinates

from .geometry import SpreadingPrediction, SupportSet, hausdorff, ray_distance
from .pde import Field, Grid, contour_points

FIT_FRACTION = 0.5
PROBE_SPREAD = 0.2


class DomainExitError(ValueError):
    pass


def sample(field: Field, points) -> np.ndarray:
    """Linear (1D) or bilinear (2D) interpolation of a field at arbitrary points."""
    g = field.grid
    pts = np.asarray(points, dtype=float)
    if g.space_dim == 1:
        x = pts.reshape(-1)
        if g.kind == "radial":
            x = np.abs(x)
        ax = g.axes[0]
        if x.size and (x.min() < ax[0] - 1e-9 or x.max() > ax[-1] + 1e-9):
            raise DomainExitError("probe point outside the grid")
        return np.interp(x, ax, np.asarray(field.values))
    pts = pts.reshape(-1, 2)
    (x0, x1), (y0, y1) = g.extent
    if len(pts) and (
        pts[:, 0].min() < x0 - 1e-9 or pts[:, 0].max() > x1 + 1e-9
        or pts[:, 1].min() < y0 - 1e-9 or pts[:, 1].max() > y1 + 1e-9
    ):
        raise DomainExitError("probe point outside the grid")
    idx = np.vstack([(pts[:, 0] - x0) / g.h, (pts[:, 1] - y0) / g.h])
    return map_coordinates(np.asarray(field.values), idx, order=1, mode="nearest")


@dataclass(frozen=True)
class SpreadingMeasurement:
    direction: np.ndarray
    times: np.ndarray
    level_positions: np.ndarray
    fitted_speed: float
    lam: float
    min_probe: float = math.nan
    sup_probe: float = math.nan
    saturated: bool = False
    extra: dict = field(default_factory=dict)


def _ray_length(field: Field, e: np.ndarray) -> float:
    g = field.grid
    if g.space_dim == 1:
        lo, hi = g.extent[0]
        return hi if e[0] > 0 else (-lo if g.kind != "radial" else hi)
    s = math.inf
    for k, (lo, hi) in enumerate(g.extent):
        if e[k] > 1e-15:
            s = min(s, hi / e[k])
        elif e[k] < -1e-15:
            s = min(s, lo / e[k])
    return s


def directional_speed(snapshots, e, lam: float = 0.5) -> SpreadingMeasurement:
    """Track sup{s : u(t, s e) > lam} and fit its slope over the last half of the times.

    Also reports the two-sided probes at c = (1 -/+ 0.2) * fitted speed on the
    last snapshot: the min of u on the segment [0, c t] e and the sup beyond.
    """
    e = np.asarray(e, dtype=float).ravel()
    e = e / np.linalg.norm(e)
    snaps = [s for s in snapshots]
    times = np.array([s.time for s in snaps])
    g = snaps[0].grid
    length = _ray_length(snaps[0], e)
    ds = 0.5 * g.h
    s_axis = np.arange(0.0, length + 1e-12, ds)
    pts = s_axis[:, None] * e[None, :]
    positions = []
    saturated = False
    profiles = []
    for snap in snaps:
        u = sample(snap, pts)
        profiles.append(u)
        above = np.nonzero(u > lam)[0]
        if len(above) == 0:
            positions.append(0.0)
            continue
        k = above[-1]
        if k == len(u) - 1:
            saturated = True
            positions.append(s_axis[-1])
            continue
        w = (u[k] - lam) / (u[k] - u[k + 1])
        positions.append(s_axis[k] + w * ds)
    positions = np.array(positions)
    window = times >= times[0] + (1.0 - FIT_FRACTION) * (times[-1] - times[0])
    if window.sum() < 2:
        raise ValueError("need at least two snapshots in the fitting window")
    speed = float(np.polyfit(times[window], positions[window], 1)[0])
    t_last = times[-1]
    u_last = profiles[-1]
    c_lo = (1.0 - PROBE_SPREAD) * speed
    c_hi = (1.0 + PROBE_SPREAD) * speed
    seg = s_axis <= c_lo * t_last
    tail = s_axis >= c_hi * t_last
    min_probe = float(u_last[seg].min()) if seg.any() else math.nan
    sup_probe = float(u_last[tail].max()) if tail.any() else math.nan
    return SpreadingMeasurement(
        e, times, positions, speed, lam, min_probe, sup_probe, saturated,
        {"window_points": int(window.sum())},
    )


def dilated_probe(snapshot: Field, C, lam: float | None = None):
    """min and max of u(t, t x) over the points x of C."""
    C = np.asarray(C, dtype=float)
    t = snapshot.time
    vals = sample(snapshot, C * t)
    return float(vals.min()), float(vals.max())


@dataclass(frozen=True)
class HausdorffTrace:
    times: np.ndarray
    local_dH: np.ndarray
    global_dH_over_t: np.ndarray
    R: float
    lam: float


def _node_cloud(field: Field):
    return field.grid.coordinates().reshape(-1, field.grid.space_dim)


def local_dH(snapshot: Field, W_contains, W_boundary, lam: float, R: float) -> float:
    """Hausdorff distance between (1/t)E_lam(t) and W, both cut by the closed ball of radius R.

    Each set is represented by the scaled grid nodes it contains plus its boundary
    points (the lam-contour for E, sampled boundary of W), restricted to the ball.
    """
    t = snapshot.time
    if t <= 0.0:
        return math.inf
    g = snapshot.grid
    nodes = _node_cloud(snapshot) / t
    vals = np.asarray(snapshot.values).reshape(-1)
    r = np.linalg.norm(nodes, axis=1)
    if g.kind == "radial" or g.space_dim == 1:
        reach = min(abs(g.extent[0][0]), abs(g.extent[0][1])) if g.kind != "radial" else g.extent[0][1]
    else:
        reach = min(abs(v) for ax in g.extent for v in ax)
    if R * t > reach + 1e-9:
        raise DomainExitError(f"ball of radius {R}*t leaves the grid at t={t}")
    ball = r <= R
    level, _ = contour_points(g, snapshot.values, lam)
    level = level / t
    level = level[np.linalg.norm(level, axis=1) <= R]
    E = np.vstack([nodes[ball & (vals > lam)], level])
    inside_W = W_contains(nodes[ball])
    Wb = np.asarray(W_boundary, dtype=float)
    if g.kind == "radial":
        # radial nodes only cover r >= 0; fold the prediction onto the half line
        Wb = np.abs(Wb.reshape(-1, 1))
    Wb = Wb[np.linalg.norm(Wb, axis=1) <= R] if len(Wb) else Wb
    Wc = np.vstack([nodes[ball][inside_W], Wb.reshape(-1, nodes.shape[1])])
    return hausdorff(E, Wc)


def global_dH(snapshot: Field, U: SupportSet, c_star: float, lam: float, region=None) -> float:
    """d_H(E_lam(t), {dist(., U) <= c* t}) computed on the grid nodes and the two level curves.

    ``region`` optionally restricts both sets to the closed ball of that radius.
    """
    t = snapshot.time
    g = snapshot.grid
    nodes = _node_cloud(snapshot)
    vals = np.asarray(snapshot.values).reshape(-1)
    if g.kind == "radial" and U.N == 2:
        probe = np.column_stack([nodes[:, 0], np.zeros(len(nodes))])
    else:
        probe = nodes
    dist = U.dist_to_U(probe).reshape(-1)
    level, _ = contour_points(g, snapshot.values, lam)
    thick_edge, _ = contour_points(g, (dist - c_star * t).reshape(g.shape), 0.0)
    E = np.vstack([nodes[vals > lam], level])
    T = np.vstack([nodes[dist <= c_star * t], thick_edge])
    if region is not None:
        E = E[np.linalg.norm(E, axis=1) <= region]
        T = T[np.linalg.norm(T, axis=1) <= region]
    return hausdorff(E, T)


def hausdorff_trace(
    snapshots,
    prediction: SpreadingPrediction | None,
    U: SupportSet | None,
    lam: float,
    R: float,
    c_star: float | None = None,
    W_contains=None,
    W_boundary=None,
    global_region=None,
) -> HausdorffTrace:
    """Local (ball of radius R, scaled by 1/t) and global (divided by t) Hausdorff gaps.

    The prediction supplies W; ``W_contains``/``W_boundary`` override it to test
    alternative limit sets.  The global gap is skipped when U is None.
    """
    if prediction is not None:
        W_contains = W_contains or prediction.W_contains
        if W_boundary is None:
            W_boundary = prediction.boundary(R)
        c_star = prediction.c_star if c_star is None else c_star
    times, loc, glob = [], [], []
    for snap in snapshots:
        if snap.time <= 0.0:
            continue
        times.append(snap.time)
        loc.append(local_dH(snap, W_contains, W_boundary, lam, R) if W_contains else math.nan)
        if U is not None and c_star is not None:
            glob.append(global_dH(snap, U, c_star, lam, global_region) / snap.time)
        else:
            glob.append(math.nan)
    return HausdorffTrace(np.array(times), np.array(loc), np.array(glob), float(R), float(lam))


def ball_predicate(radius: float):
    """Membership and boundary samples for the open ball B_radius."""

    def contains(x):
        return np.linalg.norm(np.asarray(x, dtype=float), axis=-1) < radius

    def boundary(N, n=2000):
        if N == 1:
            return np.array([[radius], [-radius]])
        a = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        return radius * np.column_stack([np.cos(a), np.sin(a)])

    return contains, boundary


def minkowski_predicate(directions, radius: float):
    """Membership and boundary samples for R+ Xi + B_radius, Xi a finite set of unit vectors."""
    xi = np.asarray(directions, dtype=float).reshape(len(directions), -1)
    xi = xi / np.linalg.norm(xi, axis=1, keepdims=True)

    def dist(x):
        return ray_distance(np.asarray(x, dtype=float).reshape(-1, xi.shape[1]), xi)

    def contains(x):
        return dist(x) < radius

    def boundary(N, R, n=400):
        if N == 1:
            pts = [s for s in (radius, -radius) if not np.any(xi[:, 0] * s > 0)]
            return np.array(pts, dtype=float).reshape(-1, 1)
        h = R / n
        g = Grid.plane((-R - 2 * h, R + 2 * h), (-R - 2 * h, R + 2 * h), h)
        d = dist(g.coordinates().reshape(-1, 2)).reshape(g.shape)
        pts, _ = contour_points(g, d, radius)
        return pts[np.linalg.norm(pts, axis=1) <= R]

    return contains, boundary


def radial_extent(snapshot: Field, lam: float, inner: float, outer: float):
    """min of u over |x| <= inner*t and max of u over |x| >= outer*t."""
    g = snapshot.grid
    t = snapshot.time
    r = np.linalg.norm(_node_cloud(snapshot), axis=1)
    vals = np.asarray(snapshot.values).reshape(-1)
    lo = vals[r <= inner * t]
    hi = vals[r >= outer * t]
    return (float(lo.min()) if len(lo) else math.nan, float(hi.max()) if len(hi) else math.nan)
