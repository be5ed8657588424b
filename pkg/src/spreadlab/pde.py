"""Explicit finite differences for u_t = Laplacian(u) + f(u) on line, plane and radial grids."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import SupportSet
from .reaction import ReactionTerm

CFL_SAFETY = 0.9
CLAMP_TOL = 1e-9
MARGIN_EXTRA = 20.0

BOUNDARIES = ("dirichlet_far_field", "neumann_zero")


class StabilityError(ValueError):
    pass


class RangeViolationError(RuntimeError):
    pass


class MarginError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform grid; nodes sit at lo + i*h on each axis.

    ``kind`` is "line", "plane" or "radial"; radial grids start at r = 0 and
    carry the dimension N of the rotation-invariant problem.
    """

    kind: str
    h: float
    extent: tuple
    boundary: str = "dirichlet_far_field"
    N: int = 1

    def __post_init__(self):
        if self.kind not in ("line", "plane", "radial"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.h <= 0.0:
            raise ValueError("grid spacing must be positive")
        ext = tuple(tuple(float(v) for v in ax) for ax in self.extent)
        object.__setattr__(self, "extent", ext)
        want = 2 if self.kind == "plane" else 1
        if len(ext) != want:
            raise ValueError(f"{self.kind} grid needs {want} axis bounds")
        if self.kind == "radial" and ext[0][0] != 0.0:
            raise ValueError("radial grids start at r = 0")

    @classmethod
    def line(cls, lo, hi, h, boundary="dirichlet_far_field"):
        return cls("line", h, ((lo, hi),), boundary)

    @classmethod
    def plane(cls, xlim, ylim, h, boundary="dirichlet_far_field"):
        return cls("plane", h, (tuple(xlim), tuple(ylim)), boundary)

    @classmethod
    def radial(cls, rmax, h, N, boundary="dirichlet_far_field"):
        return cls("radial", h, ((0.0, rmax),), boundary, int(N))

    @property
    def space_dim(self) -> int:
        return 2 if self.kind == "plane" else 1

    @property
    def axes(self):
        out = []
        for lo, hi in self.extent:
            n = int(round((hi - lo) / self.h))
            out.append(lo + self.h * np.arange(n + 1))
        return out

    @property
    def shape(self):
        return tuple(len(a) for a in self.axes)

    def coordinates(self) -> np.ndarray:
        """Node coordinates, shape (*shape, dim)."""
        ax = self.axes
        if len(ax) == 1:
            return ax[0][:, None]
        X, Y = np.meshgrid(ax[0], ax[1], indexing="ij")
        return np.stack([X, Y], axis=-1)

    def ghost_coordinates(self):
        """Coordinates of the ghost layer around the box, in the order used by the stepper."""
        ax = self.axes
        h = self.h
        if len(ax) == 1:
            return np.array([[ax[0][0] - h], [ax[0][-1] + h]])
        x, y = ax
        xg = np.concatenate([[x[0] - h], x, [x[-1] + h]])
        yg = np.concatenate([[y[0] - h], y, [y[-1] + h]])
        X, Y = np.meshgrid(xg, yg, indexing="ij")
        return np.stack([X, Y], axis=-1)

    def distance_to_boundary(self, points) -> np.ndarray:
        """Distance from points to the truncation boundary (r = 0 is not one)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "radial":
            r = np.abs(pts[:, 0])
            return self.extent[0][1] - r
        d = np.full(len(pts), np.inf)
        for k, (lo, hi) in enumerate(self.extent):
            d = np.minimum(d, np.minimum(pts[:, k] - lo, hi - pts[:, k]))
        return d

    def to_dict(self):
        return {"kind": self.kind, "h": self.h, "extent": [list(a) for a in self.extent],
                "boundary": self.boundary, "N": self.N}


@dataclass(frozen=True)
class Field:
    grid: Grid
    time: float
    values: np.ndarray = field(repr=False)
    max_excursion: float = 0.0

    def __post_init__(self):
        self.values.setflags(write=False)


@dataclass(frozen=True)
class LevelSet:
    lam: float
    time: float
    points: np.ndarray = field(repr=False)
    upper_region_mask: np.ndarray = field(repr=False)
    segments: np.ndarray | None = field(default=None, repr=False)


def _u0_values(grid: Grid, U: SupportSet, coords: np.ndarray) -> np.ndarray:
    if grid.kind == "radial":
        # a rotation-invariant support is sampled along the first axis
        pts = coords[..., :1]
        if U.N == 2:
            pts = np.concatenate([pts, np.zeros_like(pts)], axis=-1)
        return U.contains(pts).astype(float)
    return U.contains(coords).astype(float)


def initial_field(grid: Grid, U: SupportSet) -> Field:
    """Indicator of U at the node centres."""
    return Field(grid, 0.0, _u0_values(grid, U, grid.coordinates()))


def _coefficients(grid: Grid):
    """Neighbour weights of the discrete Laplacian (times h^2) and the largest diagonal."""
    h2 = grid.h * grid.h
    if grid.kind == "line":
        return None, 2.0 / h2
    if grid.kind == "plane":
        return None, 4.0 / h2
    # conservative radial form r^{1-N} d/dr (r^{N-1} du/dr): monotone for every N
    n = grid.shape[0]
    i = np.arange(n, dtype=float)
    N = grid.N
    with np.errstate(divide="ignore", invalid="ignore"):
        up = np.where(i > 0, ((i + 0.5) / i) ** (N - 1), 2.0 * N)
        down = np.where(i > 0, ((i - 0.5) / i) ** (N - 1), 0.0)
    return (up / h2, down / h2), float(np.max(up + down) / h2)


def stable_dt(grid: Grid, f: ReactionTerm) -> float:
    """Largest step keeping explicit Euler monotone: CFL with safety and room for f'."""
    _, diag = _coefficients(grid)
    lip = max(0.0, -min(float(np.min(f.derivative(np.linspace(0.0, 1.0, 2001)))), 0.0))
    return min(CFL_SAFETY / diag, 1.0 / (diag + lip))


class _Stepper:
    def __init__(self, grid: Grid, f: ReactionTerm, ghosts: np.ndarray | None):
        self.grid = grid
        self.f = f
        self.coef, self.diag = _coefficients(grid)
        self.h2 = grid.h * grid.h
        self.ghosts = ghosts
        self._pad = None
        if grid.kind == "plane":
            # persistent padded buffer; the frozen far field stays in its border
            if ghosts is not None:
                self._pad = np.array(ghosts, dtype=float)
            else:
                self._pad = np.zeros(tuple(n + 2 for n in grid.shape))

    def laplacian(self, u):
        g = self.grid
        if g.kind == "radial":
            up, down = self.coef
            right = np.empty_like(u)
            right[:-1] = u[1:]
            right[-1] = self.ghosts[1] if g.boundary == "dirichlet_far_field" else u[-2]
            left = np.empty_like(u)
            left[1:] = u[:-1]
            left[0] = u[0]
            return up * (right - u) + down * (left - u)
        if g.kind == "line":
            pad = np.empty(len(u) + 2)
            pad[1:-1] = u
            if g.boundary == "dirichlet_far_field":
                pad[0], pad[-1] = self.ghosts
            else:
                pad[0], pad[-1] = u[1], u[-2]
            return (pad[2:] - 2.0 * u + pad[:-2]) / self.h2
        pad = self._pad
        pad[1:-1, 1:-1] = u
        if g.boundary == "neumann_zero":
            pad[0, 1:-1], pad[-1, 1:-1] = u[1], u[-2]
            pad[1:-1, 0], pad[1:-1, -1] = u[:, 1], u[:, -2]
        return (pad[2:, 1:-1] + pad[:-2, 1:-1] + pad[1:-1, 2:] + pad[1:-1, :-2] - 4.0 * u) / self.h2

    def __call__(self, u, dt):
        new = u + dt * (self.laplacian(u) + self.f.evaluate(u))
        lo, hi = float(new.min()), float(new.max())
        excursion = max(0.0, -lo, hi - 1.0)
        if excursion > CLAMP_TOL:
            raise RangeViolationError(f"solution left [0,1] by {excursion:.3g}")
        if excursion > 0.0:
            np.clip(new, 0.0, 1.0, out=new)
        return new, excursion


def _ghost_values(grid: Grid, U: SupportSet | None, u0: np.ndarray):
    if grid.boundary != "dirichlet_far_field":
        return None
    if grid.kind == "radial":
        rmax = grid.axes[0][-1] + grid.h
        if U is None:
            return np.array([u0[0], u0[-1]])
        pt = np.array([[rmax] + [0.0] * (U.N - 1)])
        return np.array([u0[0], float(U.contains(pt)[0])])
    gc = grid.ghost_coordinates()
    if U is None:
        # frozen far field continues the data at the edge
        if grid.kind == "line":
            return np.array([u0[0], u0[-1]])
        return np.pad(u0, 1, mode="edge")
    return U.contains(gc).astype(float)


def step(field: Field, f: ReactionTerm, dt: float, U: SupportSet | None = None) -> Field:
    """One explicit Euler step; the far field is frozen at the indicator of U (or the edge values)."""
    limit = stable_dt(field.grid, f)
    if dt > limit * (1.0 + 1e-12):
        raise StabilityError(f"dt={dt:.4g} exceeds the monotone step bound {limit:.4g}")
    stepper = _Stepper(field.grid, f, _ghost_values(field.grid, U, field.values))
    new, exc = stepper(np.array(field.values, dtype=float), dt)
    return Field(field.grid, field.time + dt, new, max(field.max_excursion, exc))


def check_margin(grid: Grid, metrology_points, c_max: float, T: float):
    need = c_max * T + MARGIN_EXTRA
    have = float(np.min(grid.distance_to_boundary(metrology_points)))
    if have < need:
        raise MarginError(
            f"metrology region is {have:.4g} from the boundary; need c_max*T + {MARGIN_EXTRA:g} = {need:.4g}"
        )
    return have


def simulate(
    grid: Grid,
    U: SupportSet | None,
    f: ReactionTerm,
    T_final: float,
    snapshot_times,
    u0: np.ndarray | None = None,
    metrology_points=None,
    c_max: float | None = None,
    dt: float | None = None,
) -> list[Field]:
    """Run explicit Euler to T_final and return fields at the requested times.

    Snapshots between two steps are linear interpolations in time; the final
    step is shortened to land on T_final.  When ``metrology_points`` is given,
    the grid must leave c_max*T_final + 20 between them and the box.
    """
    times = sorted(float(t) for t in snapshot_times)
    if times and (times[0] < 0.0 or times[-1] > T_final + 1e-12):
        raise ValueError("snapshot times must lie in [0, T_final]")
    if metrology_points is not None:
        if c_max is None:
            raise ValueError("c_max is required with metrology points")
        check_margin(grid, metrology_points, c_max, T_final)
    if u0 is None:
        if U is None:
            raise ValueError("need a support or explicit initial values")
        u = initial_field(grid, U).values.astype(float)
    else:
        u = np.array(u0, dtype=float)
        if u.shape != grid.shape:
            raise ValueError("initial values do not match the grid")
    limit = stable_dt(grid, f)
    dt = limit if dt is None else dt
    if dt > limit * (1.0 + 1e-12):
        raise StabilityError(f"dt={dt:.4g} exceeds the monotone step bound {limit:.4g}")
    stepper = _Stepper(grid, f, _ghost_values(grid, U, u))
    out = []
    t = 0.0
    k = 0
    worst = 0.0
    while k < len(times) and times[k] <= 0.0:
        out.append(Field(grid, 0.0, u.copy()))
        k += 1
    n_steps = int(math.ceil(T_final / dt - 1e-9))
    for i in range(n_steps):
        tau = min(dt, T_final - t)
        new, exc = stepper(u, tau)
        worst = max(worst, exc)
        t_new = T_final if i == n_steps - 1 else t + tau
        while k < len(times) and times[k] <= t_new + 1e-12:
            w = (times[k] - t) / (t_new - t)
            w = min(max(w, 0.0), 1.0)
            out.append(Field(grid, times[k], (1.0 - w) * u + w * new, worst))
            k += 1
        u, t = new, t_new
    return out


def _crossings(x, v, lam):
    """Linear-interpolated crossings of v - lam between consecutive samples."""
    a, b = v[:-1] - lam, v[1:] - lam
    idx = np.nonzero((a > 0) != (b > 0))[0]
    w = a[idx] / (a[idx] - b[idx])
    return x[idx] + w * (x[idx + 1] - x[idx])


def contour_points(grid: Grid, values: np.ndarray, lam: float):
    """Points and segments of the lam-contour: 1D crossings or marching squares."""
    values = np.asarray(values, dtype=float)
    if grid.space_dim == 1:
        pts = _crossings(grid.axes[0], values, lam)
        return pts[:, None], None
    x, y = grid.axes
    up = values > lam
    # edge crossings: along x (i,j)-(i+1,j) and along y (i,j)-(i,j+1)
    a, b = values[:-1, :] - lam, values[1:, :] - lam
    hx = (a > 0) != (b > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        wx = np.where(hx, a / (a - b), 0.0)
    a, b = values[:, :-1] - lam, values[:, 1:] - lam
    hy = (a > 0) != (b > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        wy = np.where(hy, a / (a - b), 0.0)
    X = x[:-1, None] + wx * grid.h
    Yx = np.broadcast_to(y[None, :], hx.shape)
    Xy = np.broadcast_to(x[:, None], hy.shape)
    Y = y[None, :-1] + wy * grid.h
    pts = np.vstack([
        np.column_stack([X[hx], Yx[hx]]),
        np.column_stack([Xy[hy], Y[hy]]),
    ])
    segments = _marching_squares(values, lam, up, hx, hy, X, Yx, Xy, Y)
    return pts, segments


def _marching_squares(values, lam, up, hx, hy, X, Yx, Xy, Y):
    # cell (i,j) has edges: bottom = x-edge (i,j), top = x-edge (i,j+1),
    # left = y-edge (i,j), right = y-edge (i+1,j)
    bottom = hx[:, :-1]
    top = hx[:, 1:]
    left = hy[:-1, :]
    right = hy[1:, :]
    ends = {
        "b": np.stack([X[:, :-1], Yx[:, :-1]], axis=-1),
        "t": np.stack([X[:, 1:], Yx[:, 1:]], axis=-1),
        "l": np.stack([Xy[:-1, :], Y[:-1, :]], axis=-1),
        "r": np.stack([Xy[1:, :], Y[1:, :]], axis=-1),
    }
    flags = {"b": bottom, "t": top, "l": left, "r": right}
    count = bottom.astype(int) + top + left + right
    segs = []
    pairs = [("b", "t"), ("b", "l"), ("b", "r"), ("t", "l"), ("t", "r"), ("l", "r")]
    two = count == 2
    for p, q in pairs:
        m = two & flags[p] & flags[q]
        if m.any():
            segs.append(np.stack([ends[p][m], ends[q][m]], axis=1))
    four = count == 4
    if four.any():
        centre = 0.25 * (values[:-1, :-1] + values[1:, :-1] + values[:-1, 1:] + values[1:, 1:])
        corner = up[:-1, :-1]
        # join the edges so that the centre value decides which corners connect
        same = (centre > lam) == corner
        m1 = four & same
        m2 = four & ~same
        for m, (p, q), (r, s) in ((m1, ("b", "r"), ("l", "t")), (m2, ("b", "l"), ("r", "t"))):
            if m.any():
                segs.append(np.stack([ends[p][m], ends[q][m]], axis=1))
                segs.append(np.stack([ends[r][m], ends[s][m]], axis=1))
    if not segs:
        return np.zeros((0, 2, 2))
    return np.concatenate(segs, axis=0)


def extract_level_set(field: Field, lam: float) -> LevelSet:
    if not 0.0 < lam < 1.0:
        raise ValueError("level must lie in (0, 1)")
    pts, segs = contour_points(field.grid, field.values, lam)
    return LevelSet(lam, field.time, pts, np.asarray(field.values) > lam, segs)


def write_snapshots(fields, outdir, reaction_id: str, support_id: str, dt: float | None = None):
    """One CSV per snapshot (coordinates, u) plus a JSON manifest."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = []
    for k, fld in enumerate(fields):
        coords = fld.grid.coordinates().reshape(-1, fld.grid.space_dim)
        data = np.column_stack([coords, np.asarray(fld.values).reshape(-1)])
        name = f"snapshot_{k:03d}.csv"
        header = ",".join(["r"] if fld.grid.kind == "radial" else ["x", "y"][: fld.grid.space_dim]) + ",u"
        np.savetxt(outdir / name, data, delimiter=",", header=header, comments="", fmt="%.10g")
        files.append({"file": name, "time": fld.time})
    grid = fields[0].grid if fields else None
    manifest = {
        "grid": grid.to_dict() if grid else None,
        "times": [fld.time for fld in fields],
        "reaction": reaction_id,
        "support": support_id,
        "dt": dt,
        "h": grid.h if grid else None,
        "snapshots": files,
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest


def write_level_set(level: LevelSet, path):
    pts = np.asarray(level.points)
    cols = "x" if pts.shape[1] == 1 else "x,y"
    np.savetxt(path, pts, delimiter=",", header=cols, comments="", fmt="%.10g")
