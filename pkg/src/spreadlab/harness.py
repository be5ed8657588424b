"""Scenario files: load, validate, run the pipeline and judge expectations."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import geometry, metrics, pde
from .front import (
    NoPositiveFrontError,
    build_retracting_supersolution,
    minimal_speed,
    tristable_terrace_speeds,
)
from .reaction import integral_sign, parse_reaction

OUT_ENV = "SPREADLAB_OUT"
DEFAULT_OUT = "spreadlab-out"

FRONT_KINDS = ("minimal_speed", "terrace_speeds", "direction_sets", "dUrho", "retracting_supersolution")
FIELD_KINDS = (
    "directional_speed", "dilated_probe", "radial_extent", "hausdorff",
    "shell_oscillation", "plateau",
)


class ScenarioError(ValueError):
    pass


# parameters each metric kind cannot run without
REQUIRED_PARAMS = {
    "dUrho": ("rho", "probe_radius"),
    "retracting_supersolution": ("c", "lam", "T", "N"),
    "directional_speed": ("direction",),
    "dilated_probe": ("time", "points"),
    "radial_extent": ("time", "inner", "outer"),
    "shell_oscillation": ("n_min", "n_max"),
    "plateau": ("time", "inner_factor", "outer_factor"),
}


@dataclass
class Report:
    id: str
    results: dict
    expectations: list
    traces: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(e["passed"] for e in self.expectations)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "verdict": "pass" if self.passed else "fail",
            "results": {k: _jsonable(v) for k, v in sorted(self.results.items())},
            "expectations": self.expectations,
        }


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else ("inf" if v > 0 else ("-inf" if v < 0 else "nan"))
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _data(name: str) -> str:
    return resources.files("spreadlab").joinpath("scenarios", name).read_text()


def schema() -> dict:
    return json.loads(_data("schema.json"))


def claims() -> dict:
    return json.loads(_data("claims.json"))


def catalog() -> list[dict]:
    folder = resources.files("spreadlab").joinpath("scenarios")
    out = []
    for item in sorted(folder.iterdir(), key=lambda p: p.name):
        if item.name.endswith(".json") and item.name not in ("schema.json", "claims.json"):
            out.append(json.loads(item.read_text()))
    return out


def validate(sc: dict) -> dict:
    try:
        jsonschema.validate(sc, schema())
    except jsonschema.ValidationError as exc:
        raise ScenarioError(f"scenario {sc.get('id', '?')}: {exc.message}") from exc
    known = claims()
    for c in sc["claims"]:
        if c not in known:
            raise ScenarioError(f"scenario {sc['id']}: unregistered claim {c!r}")
    for e in sc.get("expectations", []):
        if e["claim"] not in known:
            raise ScenarioError(f"scenario {sc['id']}: unregistered claim {e['claim']!r}")
    for m in sc.get("metrics", []):
        missing = [k for k in REQUIRED_PARAMS.get(m["kind"], ()) if k not in m]
        if m["kind"] == "hausdorff" and m.get("against") == "minkowski" and "directions" not in m:
            missing.append("directions")
        if missing:
            raise ScenarioError(f"scenario {sc['id']}: metric {m['name']} lacks {', '.join(missing)}")
        if m["kind"] in FIELD_KINDS and "simulation" not in sc:
            raise ScenarioError(f"scenario {sc['id']}: metric {m['name']} needs a simulation block")
    names = [m["name"] for m in sc.get("metrics", [])]
    if len(set(names)) != len(names):
        raise ScenarioError(f"scenario {sc['id']}: duplicate metric names")
    return sc


def load(ref) -> dict:
    """A scenario from a catalog id, a path to a JSON file, or a dict."""
    if isinstance(ref, dict):
        return validate(ref)
    p = Path(str(ref))
    if p.suffix == ".json" and p.exists():
        return validate(json.loads(p.read_text()))
    for sc in catalog():
        if sc["id"] == str(ref):
            return validate(sc)
    raise ScenarioError(f"no scenario file or catalog id {ref!r}")


def output_root(out=None) -> Path:
    return Path(out or os.environ.get(OUT_ENV) or DEFAULT_OUT)


# ---------------------------------------------------------------- building blocks


def _support(spec: dict) -> geometry.SupportSet:
    return geometry.builtin_support(spec["name"], spec.get("params", {}), int(spec.get("N", 2)))


def _grid(spec: dict) -> pde.Grid:
    h = float(spec["h"])
    boundary = spec.get("boundary", "dirichlet_far_field")
    ext = spec["extent"]
    if spec["kind"] == "line":
        return pde.Grid.line(ext[0][0], ext[0][1], h, boundary)
    if spec["kind"] == "radial":
        return pde.Grid.radial(ext[0][1], h, int(spec["N"]), boundary)
    return pde.Grid.plane(tuple(ext[0]), tuple(ext[1]), h, boundary)


def _snapshot_at(fields, t):
    for s in fields:
        if abs(s.time - t) < 1e-9:
            return s
    raise ScenarioError(f"no snapshot at t={t}")


class _Context:
    def __init__(self, sc: dict):
        self.sc = sc
        self.f = parse_reaction(sc["reaction"]) if sc.get("reaction") else None
        self.U = _support(sc["support"]) if sc.get("support") else None
        self._c_star = None
        self._dirs = {}
        self.fields = None
        self.dt = None

    @property
    def c_star(self) -> float:
        if self._c_star is None:
            self._c_star = minimal_speed(self.f).c_star
        return self._c_star

    def dirs(self, rho: float, M: int = geometry.DEFAULT_M):
        key = (float(rho), int(M))
        if key not in self._dirs:
            self._dirs[key] = geometry.direction_sets(self.U, rho, M)
        return self._dirs[key]

    def simulate(self):
        sim = self.sc["simulation"]
        grid = _grid(sim["grid"])
        T = float(sim["T"])
        times = sorted(set(float(t) for t in sim["times"]) | {T})
        limit = pde.stable_dt(grid, self.f)
        self.dt = limit * float(sim.get("dt_fraction", 1.0))
        met = sim.get("metrology")
        self.fields = pde.simulate(
            grid, self.U, self.f, T, times,
            metrology_points=None if met is None else np.asarray(met["points"], dtype=float),
            c_max=None if met is None else float(met["c_max"]),
            dt=self.dt,
        )
        self.grid = grid


# ---------------------------------------------------------------- metric kinds


def _m_minimal_speed(ctx, m):
    f = parse_reaction(m["reaction"]) if "reaction" in m else ctx.f
    out = {"integral_sign": integral_sign(f)}
    try:
        res = minimal_speed(f, float(m.get("tol", 1e-3)))
        out.update(c_star=res.c_star, no_positive_front=False)
    except NoPositiveFrontError:
        out.update(c_star=math.nan, no_positive_front=True)
    return out


def _m_terrace_speeds(ctx, m):
    f = parse_reaction(m["reaction"]) if "reaction" in m else ctx.f
    c1, c2 = tristable_terrace_speeds(f, float(m.get("tol", 1e-3)))
    return {"c1": c1, "c2": c2, "ratio": c1 / c2}


def _m_direction_sets(ctx, m):
    d = ctx.dirs(float(m.get("rho", 0.5)), int(m.get("M", geometry.DEFAULT_M)))
    counts = d.counts()
    out = {
        "hyp_U": geometry.check_hyp_U(d),
        "bounded": counts[geometry.BOUNDED],
        "unbounded": counts[geometry.UNBOUNDED],
        "ambiguous": counts[geometry.AMBIGUOUS],
    }
    pred = geometry.predict(d, ctx.c_star)
    for i, e in enumerate(m.get("speeds", [])):
        out[f"w_{i}"] = pred.w_of_e(np.asarray(e, dtype=float))
    for i, e in enumerate(m.get("inspect", [])):
        k = d.nearest(e)
        out[f"ratio_U_{i}"] = d.liminf_ratio[k]
        out[f"ratio_Urho_{i}"] = d.liminf_ratio_rho[k]
        out[f"label_{i}"] = str(d.labels[k])
    for i, x in enumerate(m.get("contains", [])):
        out[f"in_W_{i}"] = bool(pred.W_contains(np.asarray(x, dtype=float)))
    return out


def _m_dUrho(ctx, m):
    ok, ratio = geometry.check_dUrho(ctx.U, float(m["rho"]), float(m["probe_radius"]))
    return {"holds": ok, "ratio": ratio}


def _m_retracting(ctx, m):
    sup = build_retracting_supersolution(
        ctx.f, float(m["c"]), float(m["lam"]), float(m["T"]), int(m["N"])
    )
    out = {k: v for k, v in sup.checks.items()}
    out.update(R=sup.R, R_prime=sup.R_prime, L=sup.L, Z=sup.Z, beta=sup.beta, s0=sup.s0)
    if "h" in m:
        # u0 = 1 outside B_{R + cT}: the supersolution keeps the centre below lam until T
        r0 = sup.R + sup.c * sup.T
        U = geometry.RadialShells("outside_ball", sup.N, [(r0, math.inf)])
        grid = pde.Grid.radial(r0 + float(m.get("pad", 60.0)), float(m["h"]), sup.N)
        times = np.linspace(0.0, sup.T, int(m.get("samples", 101)))
        fields = pde.simulate(grid, U, ctx.f, sup.T, times)
        centre = np.array([float(np.asarray(s.values)[0]) for s in fields])
        ctx.traces[m["name"]] = (["t", "u_origin"], np.column_stack([times, centre]))
        out.update(start_radius=r0, origin_max=float(centre.max()))
    return out


def _m_directional_speed(ctx, m):
    r = metrics.directional_speed(ctx.fields, m["direction"], float(m.get("lam", 0.5)))
    ctx.traces[m["name"]] = (["t", "position"], np.column_stack([r.times, r.level_positions]))
    return {
        "fitted_speed": r.fitted_speed,
        "min_probe": r.min_probe,
        "sup_probe": r.sup_probe,
        "saturated": r.saturated,
    }


def _m_dilated_probe(ctx, m):
    snap = _snapshot_at(ctx.fields, float(m["time"]))
    lo, hi = metrics.dilated_probe(snap, m["points"])
    return {"min": lo, "max": hi}


def _m_radial_extent(ctx, m):
    snap = _snapshot_at(ctx.fields, float(m["time"]))
    lo, hi = metrics.radial_extent(snap, float(m.get("lam", 0.5)), float(m["inner"]), float(m["outer"]))
    return {"inner_min": lo, "outer_max": hi}


def _m_hausdorff(ctx, m):
    lam = float(m.get("lam", 0.5))
    R = float(m.get("R", 3.0 * ctx.c_star))
    against = m.get("against", "prediction")
    start = float(m.get("from", 0.0))
    snaps = [s for s in ctx.fields if s.time > 0.0 and s.time >= start - 1e-9]
    pred = contains = boundary = None
    if against == "prediction":
        pred = geometry.predict(ctx.dirs(float(m.get("rho", 0.5))), ctx.c_star)
    elif against == "ball":
        contains, bfun = metrics.ball_predicate(ctx.c_star)
        boundary = bfun(ctx.grid.space_dim)
    elif against == "minkowski":
        contains, bfun = metrics.minkowski_predicate(m["directions"], ctx.c_star)
        boundary = bfun(ctx.grid.space_dim, R)
    U = ctx.U if m.get("global", False) else None
    local = against != "none"
    tr = metrics.hausdorff_trace(
        snaps, pred if local else None, U, lam, R, c_star=ctx.c_star,
        W_contains=contains, W_boundary=boundary, global_region=m.get("region"),
    )
    ctx.traces[m["name"]] = (
        ["t", "local_dH", "global_dH_over_t"],
        np.column_stack([tr.times, tr.local_dH, tr.global_dH_over_t]),
    )
    out = {"local_final": tr.local_dH[-1], "global_final": tr.global_dH_over_t[-1]}
    out["local_min"] = float(np.min(tr.local_dH))
    out["global_max"] = float(np.max(tr.global_dH_over_t))
    if "ratio_times" in m:
        a, b = (float(v) for v in m["ratio_times"])
        ia = int(np.argmin(np.abs(tr.times - a)))
        ib = int(np.argmin(np.abs(tr.times - b)))
        out["local_ratio"] = tr.local_dH[ia] / tr.local_dH[ib]
    return out


def _m_shell_oscillation(ctx, m):
    c = float(m.get("c", ctx.c_star))
    lam = float(m.get("lam", 0.5))
    out = {}
    hits = []
    for n in range(int(m["n_min"]), int(m["n_max"]) + 1):
        tau = 2.0 ** (n - 2) / c
        far = float(metrics.sample(_snapshot_at(ctx.fields, tau), [[12.0 * c * tau]])[0])
        near = float(metrics.sample(_snapshot_at(ctx.fields, 2.0**n / 4.0), [[2.0**n]])[0])
        out[f"far_{n}"] = far
        out[f"near_{n}"] = near
        hits.append(far < lam and near > float(m.get("high", 0.99)))
    out["detected"] = any(hits)
    return out


def _m_plateau(ctx, m):
    snap = _snapshot_at(ctx.fields, float(m["time"]))
    c1, c2 = tristable_terrace_speeds(ctx.f)
    beta = ctx.f.params["beta"]
    t = snap.time
    lo, hi = float(m["inner_factor"]) * c2 * t, float(m["outer_factor"]) * c1 * t
    x = np.abs(snap.grid.coordinates().reshape(-1))
    sel = (x >= lo) & (x <= hi)
    dev = float(np.max(np.abs(np.asarray(snap.values)[sel] - beta))) if sel.any() else math.inf
    return {"max_deviation": dev, "inner": lo, "outer": hi, "c1": c1, "c2": c2}


_KINDS = {
    "minimal_speed": _m_minimal_speed,
    "terrace_speeds": _m_terrace_speeds,
    "direction_sets": _m_direction_sets,
    "dUrho": _m_dUrho,
    "retracting_supersolution": _m_retracting,
    "directional_speed": _m_directional_speed,
    "dilated_probe": _m_dilated_probe,
    "radial_extent": _m_radial_extent,
    "hausdorff": _m_hausdorff,
    "shell_oscillation": _m_shell_oscillation,
    "plateau": _m_plateau,
}


# ---------------------------------------------------------------- judging


def _resolve(value, results):
    if isinstance(value, str) and value.startswith("@"):
        if value[1:] not in results:
            raise ScenarioError(f"expectation refers to unknown result {value[1:]!r}")
        return results[value[1:]]
    return value


def judge(exp: dict, results: dict) -> dict:
    key = exp["key"]
    if key not in results:
        raise ScenarioError(f"expectation refers to unknown result {key!r}")
    obs = results[key]
    val = _resolve(exp.get("value"), results)
    op = exp["op"]
    tol = float(exp.get("tol", 0.0))
    if op == "<":
        ok = obs < val
    elif op == "<=":
        ok = obs <= val
    elif op == ">":
        ok = obs > val
    elif op == ">=":
        ok = obs >= val
    elif op == "within":
        ok = abs(obs - val) <= tol
    elif op == "within_rel":
        ok = abs(obs - val) <= tol * abs(val)
    elif op == "is":
        ok = obs == val
    else:
        raise ScenarioError(f"unknown comparator {op!r}")
    return {
        "key": key, "op": op, "value": _jsonable(val), "tol": tol,
        "observed": _jsonable(obs), "passed": bool(ok), "claim": exp["claim"],
    }


def run_scenario(ref, out=None, write: bool = True) -> Report:
    sc = load(ref)
    ctx = _Context(sc)
    ctx.traces = {}
    results = {}
    mlist = sc.get("metrics", [])
    if "simulation" in sc:
        ctx.simulate()
        results["simulation.dt"] = ctx.dt
        results["simulation.max_excursion"] = max(s.max_excursion for s in ctx.fields)
    for m in mlist:
        if m["kind"] in FIELD_KINDS and ctx.fields is None:
            raise ScenarioError(f"metric {m['name']} needs a simulation block")
        for k, v in _KINDS[m["kind"]](ctx, m).items():
            results[f"{m['name']}.{k}"] = v
    verdicts = [judge(e, results) for e in sc.get("expectations", [])]
    report = Report(sc["id"], results, verdicts, ctx.traces)
    if write:
        _write(report, ctx, output_root(out) / sc["id"])
    return report


def _write(report: Report, ctx: _Context, folder: Path):
    folder.mkdir(parents=True, exist_ok=True)
    (folder / "report.json").write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    for name, (cols, data) in report.traces.items():
        with open(folder / f"{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for row in data:
                w.writerow([repr(float(v)) for v in row])
    sim = ctx.sc.get("simulation")
    if ctx.fields is None:
        return
    if sim.get("write_snapshots", ctx.grid.space_dim == 1):
        pde.write_snapshots(ctx.fields, folder / "snapshots", ctx.f.id, ctx.U.name, ctx.dt)
    lam = float(sim.get("level", 0.5))
    levels = folder / "levels"
    levels.mkdir(exist_ok=True)
    for s in ctx.fields:
        if s.time > 0.0:
            pde.write_level_set(pde.extract_level_set(s, lam), levels / f"level_{lam:g}_t{s.time:g}.csv")
