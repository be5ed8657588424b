"""Initial supports as membership/distance oracles and the direction sets they generate.

Supports live in one or two dimensions. One-dimensional sets are finite unions of
closed intervals; planar sets are balls, half-planes, radial shells, wedges and
"bands" {lo(x) <= y <= hi(x)} described by graphs, plus unions of those.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

CLASSIFY_TOL = 0.02
CROSSCHECK_TOL = 0.05
DEFAULT_M = 720
DEFAULT_LADDER = 2.0 ** (np.arange(8, 81) / 2.0)  # 16 ... 2**40, half-power steps

BOUNDED, UNBOUNDED, AMBIGUOUS = "bounded", "unbounded", "ambiguous"

# graph-distance search: coarse candidates, then repeated zooms
_COARSE = 257
_FINE = 33
_ZOOMS = 6
# directions this close to a refined arc count as inside it
_ARC_SNAP = 1e-9
_CHUNK = 2048
# erosion of graphs: lower envelope of semicircles, tabulated on a sinh-stretched grid
_ERODE_U = 65
_TABLE_SIZE = 80001
_TABLE_REACH = 1e13


class UnknownSupportError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


def _as_points(x, N):
    arr = np.asarray(x, dtype=float)
    if N == 1 and (arr.ndim == 0 or arr.shape[-1] != 1):
        arr = arr[..., None]
    if arr.shape[-1] != N:
        raise ValueError(f"points must have trailing dimension {N}, got shape {arr.shape}")
    return arr.reshape(-1, N), arr.shape[:-1]


class SupportSet:
    """Membership and distance oracle for an initial support U.

    Subclasses implement ``_contains`` and ``_boundary_distance`` on (P, N)
    arrays; the public methods accept any leading shape.
    """

    def __init__(self, name: str, N: int, params: dict | None = None, analytic: dict | None = None):
        self.name = name
        self.N = N
        self.params = dict(params or {})
        self.analytic = analytic

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r}, N={self.N})"

    @property
    def is_empty(self) -> bool:
        return False

    def _wrap(self, fn, x):
        pts, shape = _as_points(x, self.N)
        out = fn(pts)
        if shape == ():
            return out[0].item()
        return out.reshape(shape)

    def contains(self, x):
        return self._wrap(self._contains, x)

    def dist_to_U(self, x):
        return self._wrap(self._dist_to_U, x)

    def dist_to_complement(self, x):
        return self._wrap(self._dist_to_complement, x)

    def _dist_to_U(self, P):
        inside = self._contains(P)
        out = np.zeros(len(P))
        if (~inside).any():
            out[~inside] = self._boundary_distance(P[~inside])
        return out

    def _dist_to_complement(self, P):
        inside = self._contains(P)
        out = np.zeros(len(P))
        if inside.any():
            out[inside] = self._boundary_distance(P[inside])
        return out

    def eroded(self, rho: float) -> "SupportSet":
        raise NotImplementedError

    def boundary_samples(self, R: float, n: int = 4000) -> np.ndarray:
        return np.zeros((0, self.N))

    def probe_points(self, R: float) -> np.ndarray:
        """Points of U inside the closed ball of radius R: boundary samples plus a grid."""
        if self.N == 1:
            grid = np.linspace(-R, R, 4001)[:, None]
        else:
            g = np.linspace(-R, R, 101)
            X, Y = np.meshgrid(g, g, indexing="ij")
            grid = np.column_stack([X.ravel(), Y.ravel()])
            grid = grid[np.hypot(grid[:, 0], grid[:, 1]) <= R]
        grid = grid[self._contains(grid)]
        edge = self.boundary_samples(R)
        if len(edge):
            edge = edge[np.linalg.norm(edge, axis=1) <= R]
        return np.vstack([grid, edge])


class EmptySet(SupportSet):
    @property
    def is_empty(self):
        return True

    def _contains(self, P):
        return np.zeros(len(P), dtype=bool)

    def _boundary_distance(self, P):
        return np.full(len(P), np.inf)

    def eroded(self, rho):
        return self


class WholeSpace(SupportSet):
    def _contains(self, P):
        return np.ones(len(P), dtype=bool)

    def _boundary_distance(self, P):
        return np.full(len(P), np.inf)

    def eroded(self, rho):
        return self


class Intervals(SupportSet):
    """Finite union of closed intervals on the line; endpoints may be infinite."""

    def __init__(self, name, intervals, params=None, analytic=None):
        super().__init__(name, 1, params, analytic)
        merged = []
        for a, b in sorted((float(a), float(b)) for a, b in intervals):
            if b < a:
                continue
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        self.intervals = [tuple(iv) for iv in merged]
        ends = [e for iv in self.intervals for e in iv if np.isfinite(e)]
        self._ends = np.array(sorted(ends))

    @property
    def is_empty(self):
        return not self.intervals

    def _contains(self, P):
        x = P[:, 0]
        out = np.zeros(len(x), dtype=bool)
        for a, b in self.intervals:
            out |= (x >= a) & (x <= b)
        return out

    def _boundary_distance(self, P):
        if len(self._ends) == 0:
            return np.full(len(P), np.inf)
        x = P[:, 0]
        k = np.clip(np.searchsorted(self._ends, x), 1, len(self._ends)) if len(self._ends) > 1 else None
        if k is None:
            return np.abs(x - self._ends[0])
        left = self._ends[k - 1]
        right = self._ends[np.minimum(k, len(self._ends) - 1)]
        return np.minimum(np.abs(x - left), np.abs(x - right))

    def eroded(self, rho):
        kept = [(a + rho, b - rho) for a, b in self.intervals if b - a >= 2.0 * rho]
        if not kept:
            return EmptySet(f"{self.name}_rho", 1)
        return Intervals(f"{self.name}_rho", kept)

    def boundary_samples(self, R, n=4000):
        e = self._ends[np.abs(self._ends) <= R]
        return e[:, None]

    def probe_points(self, R):
        pts = [self.boundary_samples(R)]
        for a, b in self.intervals:
            lo, hi = max(a, -R), min(b, R)
            if lo <= hi:
                pts.append(np.linspace(lo, hi, 2001)[:, None])
        return np.vstack(pts)


class Ball(SupportSet):
    def __init__(self, name, center, radius, params=None, analytic=None):
        super().__init__(name, len(center), params, analytic)
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def _contains(self, P):
        return np.linalg.norm(P - self.center, axis=1) <= self.radius

    def _boundary_distance(self, P):
        return np.abs(np.linalg.norm(P - self.center, axis=1) - self.radius)

    def eroded(self, rho):
        if rho > self.radius:
            return EmptySet(f"{self.name}_rho", self.N)
        return Ball(f"{self.name}_rho", self.center, self.radius - rho)

    def boundary_samples(self, R, n=4000):
        a = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        return self.center + self.radius * np.column_stack([np.cos(a), np.sin(a)])


class HalfPlane(SupportSet):
    """{x : x_N <= offset}."""

    def __init__(self, name, offset=0.0, params=None, analytic=None):
        super().__init__(name, 2, params, analytic)
        self.offset = float(offset)

    def _contains(self, P):
        return P[:, 1] <= self.offset

    def _boundary_distance(self, P):
        return np.abs(P[:, 1] - self.offset)

    def eroded(self, rho):
        return HalfPlane(f"{self.name}_rho", self.offset - rho)

    def boundary_samples(self, R, n=4000):
        x = np.linspace(-R, R, n)
        return np.column_stack([x, np.full(n, self.offset)])


class RadialShells(SupportSet):
    """{x : |x| lies in a union of radius intervals}."""

    def __init__(self, name, N, radii, params=None, analytic=None):
        super().__init__(name, N, params, analytic)
        merged = []
        for a, b in sorted((max(float(a), 0.0), float(b)) for a, b in radii):
            if b < a:
                continue
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        self.radii = [tuple(iv) for iv in merged]
        self._ends = np.array(sorted(e for a, b in self.radii for e in ((a, b) if a > 0 else (b,))))

    def _contains(self, P):
        r = np.linalg.norm(P, axis=1)
        out = np.zeros(len(r), dtype=bool)
        for a, b in self.radii:
            out |= (r >= a) & (r <= b)
        return out

    def _boundary_distance(self, P):
        r = np.linalg.norm(P, axis=1)
        k = np.clip(np.searchsorted(self._ends, r), 1, len(self._ends) - 1)
        return np.minimum(np.abs(r - self._ends[k - 1]), np.abs(r - self._ends[k]))

    def eroded(self, rho):
        kept = [(a + rho if a > 0 else 0.0, b - rho) for a, b in self.radii]
        kept = [(a, b) for a, b in kept if b >= a]
        if not kept:
            return EmptySet(f"{self.name}_rho", self.N)
        return RadialShells(f"{self.name}_rho", self.N, kept)

    def boundary_samples(self, R, n=4000):
        e = self._ends[self._ends <= R]
        if len(e) == 0:
            return np.zeros((0, 2))
        a = np.linspace(0.0, 2.0 * np.pi, max(n // len(e), 64), endpoint=False)
        u = np.column_stack([np.cos(a), np.sin(a)])
        return np.vstack([r * u for r in e])


class Wedge(SupportSet):
    """{x : x_2 <= alpha |x_1| + offset}, with exact distances to its two edges."""

    def __init__(self, name, alpha, offset=0.0, params=None, analytic=None):
        super().__init__(name, 2, params, analytic)
        self.alpha = float(alpha)
        self.offset = float(offset)
        s = math.hypot(1.0, self.alpha)
        self._rays = np.array([[1.0, self.alpha], [-1.0, self.alpha]]) / s

    def _contains(self, P):
        return P[:, 1] <= self.alpha * np.abs(P[:, 0]) + self.offset

    def _boundary_distance(self, P):
        Q = P - np.array([0.0, self.offset])
        best = np.full(len(P), np.inf)
        for d in self._rays:
            t = np.maximum(Q @ d, 0.0)
            best = np.minimum(best, np.linalg.norm(Q - t[:, None] * d, axis=1))
        return best

    def eroded(self, rho):
        if self.alpha <= 0.0:
            # the set is convex: its inner parallel set is a translate
            return Wedge(f"{self.name}_rho", self.alpha, self.offset - rho * math.hypot(1.0, self.alpha))
        a, c = self.alpha, self.offset
        return Band(f"{self.name}_rho", lambda x: a * np.abs(x) + c, None).eroded(rho)

    def boundary_samples(self, R, n=4000):
        x = np.linspace(-R, R, n)
        return np.column_stack([x, self.alpha * np.abs(x) + self.offset])


def _graph_distance(px, py, g, lo, hi, valid=None, anchor=None):
    """Distance from points to the curve {(s, g(s)) : s in [lo, hi], valid(s)}.

    The vertical distance to the curve (or the distance to an anchor point on it)
    bounds the answer, which confines the search to a finite window; candidates
    on that window are then refined by repeated zooms around the best one.
    """
    out = np.empty(len(px))
    for i0 in range(0, len(px), _CHUNK):
        x = px[i0:i0 + _CHUNK]
        y = py[i0:i0 + _CHUNK]
        xc = np.clip(x, lo, hi)
        bound = np.hypot(x - xc, y - g(xc))
        if valid is not None:
            bound = np.where(valid(xc), bound, np.inf)
        if anchor is not None:
            bound = np.minimum(bound, np.hypot(x - anchor[0], y - anchor[1]))
        a = np.maximum(x - bound, lo)
        b = np.minimum(x + bound, hi)
        frac = np.linspace(0.0, 1.0, _COARSE)
        s = a[:, None] + (b - a)[:, None] * frac
        width = (b - a) / (_COARSE - 1)
        best_s, best_d = _pick(s, x, y, g, valid)
        fine = np.linspace(-1.0, 1.0, _FINE)
        for _ in range(_ZOOMS):
            s = np.clip(best_s[:, None] + width[:, None] * fine, lo, hi)
            s_new, d_new = _pick(s, x, y, g, valid)
            better = d_new < best_d
            best_s = np.where(better, s_new, best_s)
            best_d = np.where(better, d_new, best_d)
            width = width * 2.0 / (_FINE - 1)
        out[i0:i0 + _CHUNK] = best_d
    return out


def _pick(s, x, y, g, valid):
    with np.errstate(invalid="ignore"):
        d = np.hypot(s - x[:, None], g(s) - y[:, None])
    if valid is not None:
        d = np.where(valid(s), d, np.inf)
    d = np.where(np.isnan(d), np.inf, d)
    k = np.argmin(d, axis=1)
    rows = np.arange(len(s))
    return s[rows, k], d[rows, k]


def _segment_distance(px, py, xe, ya, yb):
    return np.hypot(px - xe, py - np.clip(py, ya, yb))


class Band(SupportSet):
    """{(x, y) : xlo <= x <= xhi, lo(x) <= y <= hi(x)}; ``lo = None`` gives a subgraph.

    ``hi`` and ``lo`` must accept arrays of any shape.  Where hi < lo the band is
    empty at that abscissa.
    """

    def __init__(self, name, hi, lo=None, xlo=-np.inf, xhi=np.inf, params=None, analytic=None):
        super().__init__(name, 2, params, analytic)
        self.hi = hi
        self.lo = lo
        self.xlo = float(xlo)
        self.xhi = float(xhi)
        self._valid = None if lo is None else (lambda s: hi(s) >= lo(s))
        self._anchor_hi = self._anchor(hi)
        self._anchor_lo = None if lo is None else self._anchor(lo)

    def _anchor(self, g):
        xs = np.linspace(max(self.xlo, -1e3), min(self.xhi, 1e3), 20001)
        if self._valid is not None:
            ok = self._valid(xs)
            if not ok.any():
                return None
            xs = xs[ok]
        x0 = xs[np.argmin(np.abs(xs))]
        return (float(x0), float(g(np.array([x0]))[0]))

    def _contains(self, P):
        x, y = P[:, 0], P[:, 1]
        inside = (x >= self.xlo) & (x <= self.xhi)
        xc = np.clip(x, self.xlo, self.xhi) if np.isfinite([self.xlo, self.xhi]).any() else x
        inside &= y <= self.hi(xc)
        if self.lo is not None:
            inside &= y >= self.lo(xc)
        return inside

    def _boundary_distance(self, P):
        x, y = P[:, 0], P[:, 1]
        d = _graph_distance(x, y, self.hi, self.xlo, self.xhi, self._valid, self._anchor_hi)
        if self.lo is not None:
            d = np.minimum(d, _graph_distance(x, y, self.lo, self.xlo, self.xhi, self._valid, self._anchor_lo))
        for xe in (self.xlo, self.xhi):
            if not np.isfinite(xe):
                continue
            top = float(self.hi(np.array([xe]))[0])
            bottom = -np.inf if self.lo is None else float(self.lo(np.array([xe]))[0])
            if top >= bottom:
                d = np.minimum(d, _segment_distance(x, y, xe, bottom, top))
        return d

    def eroded(self, rho):
        xlo, xhi = self.xlo + rho, self.xhi - rho
        if xlo > xhi:
            return EmptySet(f"{self.name}_rho", 2)
        hi_r = _tabulated_envelope(self.hi, rho, xlo, xhi, upper=True)
        lo_r = None if self.lo is None else _tabulated_envelope(self.lo, rho, xlo, xhi, upper=False)
        if lo_r is not None:
            xs = _stretched_grid(xlo, xhi, rho)
            ok = hi_r(xs) >= lo_r(xs)
            if not ok.any():
                return EmptySet(f"{self.name}_rho", 2)
            idx = np.nonzero(ok)[0]
            # shrink the abscissa range to where the band is non-empty
            if idx[0] > 0:
                xlo = xs[idx[0]]
            if idx[-1] < len(xs) - 1:
                xhi = xs[idx[-1]]
        return Band(f"{self.name}_rho", hi_r, lo_r, xlo, xhi)

    def boundary_samples(self, R, n=4000):
        a, b = max(self.xlo, -R), min(self.xhi, R)
        if a > b:
            return np.zeros((0, 2))
        xs = np.linspace(a, b, n)
        pts = []
        ok = np.ones(n, dtype=bool) if self._valid is None else self._valid(xs)
        pts.append(np.column_stack([xs[ok], self.hi(xs[ok])]))
        if self.lo is not None:
            pts.append(np.column_stack([xs[ok], self.lo(xs[ok])]))
        for xe in (self.xlo, self.xhi):
            if np.isfinite(xe) and abs(xe) <= R:
                top = float(self.hi(np.array([xe]))[0])
                bottom = max(-R, top - R) if self.lo is None else float(self.lo(np.array([xe]))[0])
                if top >= bottom:
                    ys = np.linspace(bottom, top, 200)
                    pts.append(np.column_stack([np.full(200, xe), ys]))
        return np.vstack(pts)


def _stretched_grid(lo, hi, rho):
    scale = max(rho, 1e-3) / 4.0
    reach = _TABLE_REACH
    s = np.linspace(-math.asinh(reach / scale), math.asinh(reach / scale), _TABLE_SIZE)
    xs = scale * np.sinh(s)
    xs = xs[(xs > lo) & (xs < hi)]
    ends = [v for v in (lo, hi) if np.isfinite(v) and abs(v) <= reach]
    return np.unique(np.concatenate([xs, ends]))


def _envelope(g, rho, x, upper):
    # hi_rho(x) = min_u g(x+u) - sqrt(rho^2-u^2); lo_rho mirrors it
    u = rho * np.cos(np.linspace(0.0, np.pi, _ERODE_U))
    cap = np.sqrt(np.maximum(rho * rho - u * u, 0.0))
    vals = g(x[:, None] + u[None, :])
    if upper:
        return np.min(vals - cap, axis=1)
    return np.max(vals + cap, axis=1)


def _tabulated_envelope(g, rho, lo, hi, upper):
    xs = _stretched_grid(lo, hi, rho)
    table = _envelope(g, rho, xs, upper)
    x_min, x_max = xs[0], xs[-1]

    def f(x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.interp(flat, xs, table)
        outside = (flat < x_min) | (flat > x_max)
        if outside.any():
            out[outside] = _envelope(g, rho, flat[outside], upper)
        return out.reshape(x.shape)

    return f


class Union(SupportSet):
    """Union of supports.  Distances to the complement use the largest part value,
    which is exact away from places where parts overlap."""

    def __init__(self, name, parts, params=None, analytic=None):
        super().__init__(name, parts[0].N, params, analytic)
        self.parts = [p for p in parts if not p.is_empty]

    @property
    def is_empty(self):
        return not self.parts

    def _contains(self, P):
        out = np.zeros(len(P), dtype=bool)
        for p in self.parts:
            out |= p._contains(P)
        return out

    def _dist_to_U(self, P):
        out = np.full(len(P), np.inf)
        for p in self.parts:
            out = np.minimum(out, p._dist_to_U(P))
        return out

    def _dist_to_complement(self, P):
        out = np.zeros(len(P))
        for p in self.parts:
            out = np.maximum(out, p._dist_to_complement(P))
        return out

    def _boundary_distance(self, P):
        return np.where(self._contains(P), self._dist_to_complement(P), self._dist_to_U(P))

    def eroded(self, rho):
        return Union(f"{self.name}_rho", [p.eroded(rho) for p in self.parts])

    def boundary_samples(self, R, n=4000):
        pts = [p.boundary_samples(R, n) for p in self.parts]
        return np.vstack(pts) if pts else np.zeros((0, self.N))


# ---------------------------------------------------------------- builtins

def _all(e):
    return np.ones(len(e), dtype=bool)


def _none(e):
    return np.zeros(len(e), dtype=bool)


def _meta(U, B, U_rho=None, star_shaped=True):
    return {"U_set": U, "B_set": B, "U_rho_set": U_rho or U, "star_shaped": star_shaped}


SUPPORT_NAMES = (
    "ball", "halfspace", "whole_space", "intervals", "cone_subgraph", "sqrt_subgraph",
    "shell_union", "tube_plus_parabola", "gaussian_slab", "custom_subgraph",
)


def builtin_support(name: str, params: dict | None = None, N: int = 2) -> SupportSet:
    params = dict(params or {})
    if N not in (1, 2):
        raise ValueError("supports are available in dimension 1 or 2")
    label = _support_id(name, params)
    if name == "ball":
        r = float(params.get("radius", 1.0))
        c = params.get("center", [0.0] * N)
        c = [float(v) for v in np.atleast_1d(c)]
        meta = _meta(_none, _all)
        if N == 1:
            return Intervals(label, [(c[0] - r, c[0] + r)], params, meta)
        return Ball(label, c, r, params, meta)
    if name == "halfspace":
        off = float(params.get("offset", 0.0))
        meta = _meta(lambda e: e[:, -1] <= 0.0, lambda e: e[:, -1] > 0.0)
        if N == 1:
            return Intervals(label, [(-np.inf, off)], params, meta)
        return HalfPlane(label, off, params, meta)
    if name == "whole_space":
        return WholeSpace(label, N, params, _meta(_all, _none))
    if name == "intervals":
        if N != 1:
            raise ValueError("intervals is a one-dimensional support")
        bounds = [tuple(map(float, iv)) for iv in params.get("bounds", [])]
        finite = all(np.isfinite(iv).all() for iv in bounds)
        meta = _meta(_none, _all) if finite else None
        return Intervals(label, bounds, params, meta)
    if name == "shell_union":
        n_min = int(params.get("n_min", 0))
        n_max = int(params.get("n_max", 60))
        radii = [(2.0**n - 1.0, 2.0**n + 1.0) for n in range(n_min, n_max + 1)]
        meta = _meta(_none, _none)
        if N == 1:
            ivs = radii + [(-b, -a) for a, b in radii]
            return Intervals(label, ivs, params, meta)
        return RadialShells(label, N, radii, params, meta)
    if N == 1:
        raise ValueError(f"{name} is only defined in the plane")
    if name == "cone_subgraph":
        alpha = float(params.get("alpha", 1.0))
        meta = _meta(
            lambda e: e[:, 1] <= alpha * np.abs(e[:, 0]) + 1e-12,
            lambda e: e[:, 1] > alpha * np.abs(e[:, 0]) + 1e-12,
        )
        return Wedge(label, alpha, 0.0, params, meta)
    if name == "sqrt_subgraph":
        meta = _meta(lambda e: e[:, 1] <= 1e-12, lambda e: e[:, 1] > 1e-12)
        return Band(label, lambda x: np.sqrt(np.abs(x)), None, params=params, analytic=meta)
    if name == "custom_subgraph":
        gamma = params.get("gamma")
        if not callable(gamma):
            raise ValueError("custom_subgraph needs a callable 'gamma'")
        return Band(label, gamma, None, params=params, analytic=None)
    if name == "tube_plus_parabola":
        tube = Band("tube", lambda x: np.ones_like(x), lambda x: -np.ones_like(x), 0.0, np.inf)

        def width(x):
            return np.exp(-0.5 * np.square(np.maximum(x, 0.0)))

        parab = Band(
            "parabola",
            lambda x: np.sqrt(np.maximum(x, 0.0)) + width(x),
            lambda x: np.sqrt(np.maximum(x, 0.0)) - width(x),
            0.0,
            np.inf,
        )
        axis = lambda e: (e[:, 0] > 1.0 - 1e-12) & (np.abs(e[:, 1]) < 1e-9)  # noqa: E731
        meta = _meta(axis, lambda e: ~axis(e), star_shaped=False)
        return Union(label, [tube, parab], params, meta)
    if name == "gaussian_slab":
        g = lambda x: np.exp(-np.square(x))  # noqa: E731
        meta = _meta(
            lambda e: np.abs(e[:, 1]) < 1e-12, lambda e: np.abs(e[:, 1]) >= 1e-12, U_rho=_none
        )
        return Band(label, g, lambda x: -g(x), params=params, analytic=meta)
    raise UnknownSupportError(f"unknown support {name!r}; known: {', '.join(SUPPORT_NAMES)}")


def _support_id(name, params):
    items = [(k, v) for k, v in sorted(params.items()) if isinstance(v, (int, float))]
    if not items:
        return name
    return f"{name}(" + ",".join(f"{k}={v:g}" for k, v in items) + ")"


_ID_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")


def parse_support(spec: str, N: int = 2) -> SupportSet:
    """Build a builtin from ids such as ``"cone_subgraph(alpha=-1)"``."""
    m = _ID_RE.match(spec.lower())
    if not m:
        raise UnknownSupportError(f"cannot parse support id {spec!r}")
    params = {}
    if m.group(2):
        for part in m.group(2).split(","):
            if part.strip():
                key, _, value = part.partition("=")
                params[key.strip()] = float(value)
    return builtin_support(m.group(1), params, N)


def erode(U: SupportSet, rho: float) -> SupportSet:
    """Positive-distance interior {x in U : dist(x, complement of U) >= rho}."""
    if rho <= 0.0:
        raise ValueError("erosion radius must be positive")
    return U.eroded(rho)


# ---------------------------------------------------------- direction sets

def sample_directions(N: int, M: int = DEFAULT_M):
    if N == 1:
        return np.array([[1.0], [-1.0]]), np.array([0.0, np.pi])
    angles = 2.0 * np.pi * np.arange(M) / M
    return np.column_stack([np.cos(angles), np.sin(angles)]), angles


@dataclass(frozen=True)
class DirectionSets:
    """Sampled bounded/unbounded directions of U (unbounded ones measured on U_rho)."""

    directions: np.ndarray = field(repr=False)
    angles: np.ndarray = field(repr=False)
    liminf_ratio: np.ndarray = field(repr=False)
    limsup_ratio: np.ndarray = field(repr=False)
    liminf_ratio_rho: np.ndarray = field(repr=False)
    limsup_ratio_rho: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)
    rho: float
    tau_ladder: np.ndarray = field(repr=False)
    support: str = ""
    mismatches: int = 0

    @property
    def M(self) -> int:
        return len(self.directions)

    def counts(self) -> dict:
        return {lab: int(np.sum(self.labels == lab)) for lab in (BOUNDED, UNBOUNDED, AMBIGUOUS)}

    def nearest(self, e) -> int:
        e = np.asarray(e, dtype=float).ravel()
        return int(np.argmax(self.directions @ (e / np.linalg.norm(e))))


def _ratios(U: SupportSet, dirs: np.ndarray, taus: np.ndarray) -> np.ndarray:
    if U.is_empty:
        return np.full((len(dirs), len(taus)), np.inf)
    pts = dirs[:, None, :] * taus[None, :, None]
    d = U.dist_to_U(pts.reshape(-1, dirs.shape[1])).reshape(len(dirs), len(taus))
    return d / taus[None, :]


def direction_sets(
    U: SupportSet, rho: float = 0.0, M: int = DEFAULT_M, tau_ladder=None
) -> DirectionSets:
    """Classify sampled directions by the distance ratio dist(tau xi, .)/tau.

    The liminf and limsup are proxied by the min and max over the upper half of
    the ladder.  A direction is bounded when the ratio to U stays above the
    classification tolerance, unbounded when the ratio to U_rho stays below it,
    and ambiguous otherwise.
    """
    ladder = np.asarray(DEFAULT_LADDER if tau_ladder is None else tau_ladder, dtype=float)
    if np.any(np.diff(ladder) <= 0.0) or ladder[-1] < 1e3:
        raise ValueError("tau ladder must increase and reach at least 1e3")
    if U.N == 2 and M < 64:
        raise ValueError("need at least 64 directions in the plane")
    dirs, angles = sample_directions(U.N, M)
    upper = ladder[len(ladder) // 2:]
    r = _ratios(U, dirs, upper)
    Ur = U if rho <= 0.0 else erode(U, rho)
    rr = r if rho <= 0.0 else _ratios(Ur, dirs, upper)
    liminf, limsup = r.min(axis=1), r.max(axis=1)
    liminf_r, limsup_r = rr.min(axis=1), rr.max(axis=1)
    labels = np.full(len(dirs), AMBIGUOUS, dtype=object)
    labels[liminf > CLASSIFY_TOL] = BOUNDED
    labels[limsup_r < CLASSIFY_TOL] = UNBOUNDED
    mismatches = _crosscheck(U, dirs, labels, rho)
    return DirectionSets(
        dirs, angles, liminf, limsup, liminf_r, limsup_r, labels.astype(str), float(rho),
        ladder, U.name, mismatches,
    )


def _crosscheck(U, dirs, labels, rho):
    """Count labels contradicting the analytic direction sets away from their edges."""
    meta = U.analytic
    if not meta:
        return 0
    want_u = meta["U_rho_set"](dirs) if rho > 0.0 else meta["U_set"](dirs)
    want_b = meta["B_set"](dirs)
    expected = np.where(want_b, 0, np.where(want_u, 1, 2))
    got = np.where(labels == BOUNDED, 0, np.where(labels == UNBOUNDED, 1, 2))
    bad = expected != got
    if len(dirs) > 2:
        # samples within a few spacings of an analytic edge are excused
        k = int(math.ceil(math.asin(CROSSCHECK_TOL) / (2.0 * np.pi / len(dirs))))
        near_edge = np.zeros(len(dirs), dtype=bool)
        for s in range(1, k + 1):
            near_edge |= expected != np.roll(expected, s)
            near_edge |= expected != np.roll(expected, -s)
        bad &= ~near_edge
    return int(bad.sum())


def check_hyp_U(dirs: DirectionSets) -> bool:
    """Every sampled direction is either bounded for U or unbounded for U_rho."""
    return bool(np.all(dirs.labels != AMBIGUOUS))


def check_dUrho(U: SupportSet, rho: float, probe_radius: float):
    """Estimate sup over U within the probe ball of dist(x, U_rho); finite if doubling the ball barely moves it."""
    Ur = erode(U, rho)
    if Ur.is_empty:
        return False, math.inf

    def bound(R):
        P = U.probe_points(R)
        if len(P) == 0:
            return 0.0
        return float(np.max(Ur.dist_to_U(P)))

    b1 = bound(probe_radius)
    b2 = bound(2.0 * probe_radius)
    finite = bool(np.isfinite(b2) and b2 < 1.1 * b1 + 1e-9)
    return finite, b1


# ------------------------------------------------------ spreading prediction

def ray_distance(P, xi, block: int = 2**20) -> np.ndarray:
    """dist(p, R+ xi_1 ∪ ... ∪ R+ xi_k ∪ {0}) for unit vectors xi, in memory-bounded blocks."""
    P = np.asarray(P, dtype=float)
    xi = np.asarray(xi, dtype=float).reshape(-1, P.shape[1])
    d = np.linalg.norm(P, axis=1)
    if len(xi) == 0:
        return d
    rows = max(1, block // len(xi))
    for i in range(0, len(P), rows):
        p, r2 = P[i:i + rows], d[i:i + rows] ** 2
        dots = np.maximum(p @ xi.T, 0.0)
        ray = np.sqrt(np.maximum(r2[:, None] - dots**2, 0.0)).min(axis=1)
        d[i:i + rows] = np.minimum(d[i:i + rows], ray)
    return d


def _wrap(a):
    return (a + np.pi) % (2.0 * np.pi) - np.pi


def _unbounded_arcs(dirs: DirectionSets):
    """Arcs (start, end) of unbounded angles, with edges refined from neighbour ratios."""
    lab = dirs.labels == UNBOUNDED
    M = len(lab)
    if lab.all():
        return [(0.0, 2.0 * np.pi)]
    if not lab.any():
        return []
    step = 2.0 * np.pi / M
    start = int(np.argmin(lab))  # a non-unbounded index to anchor run detection
    arcs = []
    i = 0
    while i < M:
        k = (start + i) % M
        if not lab[k]:
            i += 1
            continue
        j = i
        while j + 1 < M and lab[(start + j + 1) % M]:
            j += 1
        first, last = (start + i) % M, (start + j) % M
        a0 = dirs.angles[first] + 0.0
        a1 = a0 + (j - i) * step
        half = 0.5 * (a1 - a0)

        def shift(idx):
            r = dirs.liminf_ratio_rho[idx]
            if not np.isfinite(r) or dirs.labels[idx] == AMBIGUOUS:
                return None
            return math.asin(min(r, 1.0))

        left = shift((first - 1) % M)
        right = shift((last + 1) % M)
        lo = a0 - step + left if left is not None else a0
        hi = a1 + step - right if right is not None else a1
        lo = min(max(lo, a0 - step), a0 + half)
        hi = max(min(hi, a1 + step), a1 - half)
        if hi < lo:
            lo = hi = 0.5 * (a0 + a1)
        arcs.append((lo, hi))
        i = j + 1
    return arcs


def _angle_to_arcs(phi, arcs):
    phi = np.asarray(phi, dtype=float)
    best = np.full(phi.shape, np.inf)
    for lo, hi in arcs:
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        off = np.abs(_wrap(phi - mid))
        best = np.minimum(best, np.maximum(off - half, 0.0))
    return best


@dataclass(frozen=True)
class SpreadingPrediction:
    c_star: float
    dirs: DirectionSets = field(repr=False)
    arcs: tuple = ()
    xi: np.ndarray = field(default=None, repr=False)

    @property
    def N(self):
        return self.dirs.directions.shape[1]

    def w_of_e(self, e):
        """Spreading speed from c*/min(1, dist(e, R+ U)), with +inf inside U."""
        E, shape = _as_points(e, self.N)
        E = E / np.linalg.norm(E, axis=1, keepdims=True)
        idx = np.argmax(E @ self.dirs.directions.T, axis=1)
        unbounded = self.dirs.labels[idx] == UNBOUNDED
        if self.N == 1:
            out = np.where(unbounded, np.inf, self.c_star)
        else:
            if self.arcs:
                delta = _angle_to_arcs(np.arctan2(E[:, 1], E[:, 0]), self.arcs)
            else:
                delta = np.full(len(E), np.inf)
            dist = np.where(delta < np.pi / 2.0, np.sin(np.minimum(delta, np.pi / 2.0)), 1.0)
            with np.errstate(divide="ignore"):
                out = self.c_star / np.minimum(1.0, dist)
            # inside a refined arc means unbounded; sample labels are only used without arcs
            out = np.where(delta <= _ARC_SNAP, np.inf, out) if self.arcs else np.where(unbounded, np.inf, out)
        if shape == ():
            return float(out[0])
        return out.reshape(shape)

    def W_contains(self, x):
        """Minkowski test: dist(x, R+ U ∪ {0}) < c*, over sampled unbounded directions."""
        P, shape = _as_points(x, self.N)
        out = ray_distance(P, self.xi) < self.c_star
        if shape == ():
            return bool(out[0])
        return out.reshape(shape)

    def radial_contains(self, x):
        """Envelope test |x| < w(x/|x|), with the origin always inside."""
        P, shape = _as_points(x, self.N)
        r = np.linalg.norm(P, axis=1)
        out = np.ones(len(P), dtype=bool)
        nz = r > 0
        if nz.any():
            out[nz] = r[nz] < self.w_of_e(P[nz])
        if shape == ():
            return bool(out[0])
        return out.reshape(shape)

    def boundary(self, R: float, n: int = 2000) -> np.ndarray:
        """Samples of the boundary of W inside the closed ball of radius R."""
        if self.N == 1:
            pts = [s * min(self.w_of_e(np.array([s])), np.inf) for s in (1.0, -1.0)]
            pts = [p for p in pts if abs(p) <= R]
            return np.array(pts, dtype=float).reshape(-1, 1)
        a = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        e = np.column_stack([np.cos(a), np.sin(a)])
        w = self.w_of_e(e)
        keep = w <= R
        return e[keep] * w[keep, None]


def predict(dirs: DirectionSets, c_star: float) -> SpreadingPrediction:
    arcs = tuple(_unbounded_arcs(dirs)) if dirs.directions.shape[1] == 2 else ()
    unb = dirs.directions[dirs.labels == UNBOUNDED]
    if dirs.directions.shape[1] == 2 and arcs:
        # unbounded samples inside the refined arcs, plus the arc edges themselves
        theta = np.arctan2(unb[:, 1], unb[:, 0]) if len(unb) else np.zeros(0)
        inside = _angle_to_arcs(theta, arcs) == 0.0 if len(unb) else np.zeros(0, dtype=bool)
        edges = np.array([a for arc in arcs for a in arc])
        xi = np.vstack([unb[inside], np.column_stack([np.cos(edges), np.sin(edges)])])
    else:
        xi = unb
    return SpreadingPrediction(float(c_star), dirs, arcs, xi)


def spreading_speed(dirs: DirectionSets, c_star: float, e) -> float:
    return predict(dirs, c_star).w_of_e(e)


def spreading_set_contains(dirs: DirectionSets, c_star: float, x):
    return predict(dirs, c_star).W_contains(x)


def hausdorff(A, B) -> float:
    """Discrete Hausdorff distance, with d(empty, empty) = 0 and d(A, empty) = inf."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if B.ndim == 1:
        B = B[:, None]
    if len(A) == 0 and len(B) == 0:
        return 0.0
    if len(A) == 0 or len(B) == 0:
        return math.inf
    d_ab = cKDTree(B).query(A)[0].max()
    d_ba = cKDTree(A).query(B)[0].max()
    return float(max(d_ab, d_ba))


def check_eB_identity(U: SupportSet, dirs: DirectionSets, e, tau_ladder=None):
    """Compare the distance ratio along e with the infimum of sqrt(1-(xi.e)^2) over unbounded xi."""
    if not check_hyp_U(dirs):
        raise PreconditionError("direction sets contain ambiguous labels")
    e = np.asarray(e, dtype=float).ravel()
    e = e / np.linalg.norm(e)
    if dirs.labels[dirs.nearest(e)] != BOUNDED:
        raise PreconditionError("direction is not labelled bounded")
    ladder = np.asarray(DEFAULT_LADDER if tau_ladder is None else tau_ladder, dtype=float)
    upper = ladder[len(ladder) // 2:]
    lhs = float(_ratios(U, e[None, :], upper).min())
    xi = predict(dirs, 1.0).xi
    dots = xi @ e if len(xi) else np.zeros(0)
    admissible = dots >= 0.0
    if not admissible.any():
        return lhs, 1.0
    rhs = float(np.min(np.sqrt(np.maximum(1.0 - dots[admissible] ** 2, 0.0))))
    return lhs, rhs
