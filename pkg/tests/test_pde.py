import math

import numpy as np
import pytest

from spreadlab.geometry import builtin_support
from spreadlab.pde import (
    Grid,
    MarginError,
    RangeViolationError,
    StabilityError,
    contour_points,
    extract_level_set,
    initial_field,
    simulate,
    stable_dt,
    step,
    write_level_set,
    write_snapshots,
)
from spreadlab.reaction import make_builtin

# Frozen from tests/oracles/reference_runs.py (plain numpy loops, h = 0.025 or 0.05)
ORACLE_KPP_CENTRE_T30 = 0.9999999998
ORACLE_BISTABLE_MAX_T20 = 1.019e-4
ORACLE_RADIAL_LEVEL_T10 = 15.2599
ORACLE_RADIAL_LEVEL_T20 = 33.8713

KPP = make_builtin("kpp")


def test_initial_field_whole_space():
    g = Grid.plane((-5, 5), (-5, 5), 0.5)
    assert np.all(initial_field(g, builtin_support("whole_space")).values == 1.0)


def test_initial_field_tiny_off_lattice_ball():
    g = Grid.plane((-5, 5), (-5, 5), 0.5)
    U = builtin_support("ball", {"radius": 0.1, "center": [0.25, 0.25]})
    assert np.all(initial_field(g, U).values == 0.0)


def test_initial_field_halfspace():
    g = Grid.plane((-5, 5), (-5, 5), 0.5)
    y = g.coordinates()[..., 1]
    u = initial_field(g, builtin_support("halfspace")).values
    assert np.array_equal(u, (y <= 0).astype(float))


@pytest.mark.parametrize("value", [0.0, 1.0])
def test_equilibria_are_preserved(value):
    g = Grid.plane((-5, 5), (-5, 5), 0.5)
    U = builtin_support("whole_space") if value == 1.0 else builtin_support("ball", {"radius": 0.01, "center": [0.2, 0.2]})
    f0 = initial_field(g, U)
    dt = stable_dt(g, KPP)
    for _ in range(5):
        f0 = step(f0, KPP, dt, U)
    assert np.all(f0.values == value)


def test_step_rejects_unstable_dt():
    g = Grid.line(-5, 5, 0.1)
    f0 = initial_field(g, builtin_support("ball", {"radius": 1.0}, N=1))
    with pytest.raises(StabilityError):
        step(f0, KPP, 2 * stable_dt(g, KPP))


def test_stable_dt_accounts_for_negative_slope():
    g = Grid.line(-5, 5, 0.1)
    f = make_builtin("bistable", {"a": 0.25})
    assert stable_dt(g, f) <= 1.0 / (2.0 / 0.01 + f.max_abs_derivative()) + 1e-15


def test_radial_grid_validation():
    with pytest.raises(ValueError):
        Grid("radial", 0.1, ((1.0, 5.0),))
    with pytest.raises(ValueError):
        Grid.line(0, 1, -0.1)


def test_kpp_local_invasion_matches_reference():
    g = Grid.line(-100, 100, 0.1)
    (snap,) = simulate(g, builtin_support("ball", {"radius": 1.0}, N=1), KPP, 30.0, [30.0])
    centre = snap.values[np.argmin(np.abs(g.axes[0]))]
    assert centre > 0.99
    assert centre == pytest.approx(ORACLE_KPP_CENTRE_T30, abs=1e-6)


def test_small_bistable_seed_dies_out():
    g = Grid.line(-60, 60, 0.025)
    f = make_builtin("bistable", {"a": 0.25})
    (snap,) = simulate(g, builtin_support("ball", {"radius": 0.1}, N=1), f, 20.0, [20.0])
    assert snap.values.max() < 0.01
    assert snap.values.max() == pytest.approx(ORACLE_BISTABLE_MAX_T20, rel=0.1)


def test_radial_ball_level_radius_matches_reference():
    g = Grid.radial(120.0, 0.05, 2)
    snaps = simulate(g, builtin_support("ball", {"radius": 2.0}), KPP, 20.0, [10.0, 20.0])
    r = g.axes[0]
    for snap, ref in zip(snaps, (ORACLE_RADIAL_LEVEL_T10, ORACLE_RADIAL_LEVEL_T20)):
        pts, _ = contour_points(g, snap.values, 0.5)
        assert pts.max() == pytest.approx(ref, abs=0.02)
    assert r[-1] == pytest.approx(120.0)


def test_first_snapshot_is_initial_field():
    g = Grid.line(-20, 20, 0.1)
    U = builtin_support("ball", {"radius": 2.0}, N=1)
    snaps = simulate(g, U, KPP, 1.0, [0.0, 1.0])
    assert np.array_equal(snaps[0].values, initial_field(g, U).values)
    assert snaps[0].time == 0.0 and snaps[1].time == 1.0


def test_margin_check():
    g = Grid.line(-50, 50, 0.1)
    with pytest.raises(MarginError):
        simulate(g, builtin_support("ball", {"radius": 1.0}, N=1), KPP, 20.0, [20.0],
                 metrology_points=np.array([[0.0]]), c_max=2.4)


def test_range_violation_detected():
    g = Grid.line(-5, 5, 0.1)
    u0 = np.full(g.shape, 1.5)
    with pytest.raises(RangeViolationError):
        simulate(g, None, KPP, 0.1, [0.1], u0=u0)


def test_level_crossing_of_translated_front():
    # bistable profile 1/(1+exp((x-s)/sqrt2)) crosses 1/2 exactly at x = s
    g = Grid.line(-30, 30, 0.1)
    x = g.axes[0]
    for s in (0.0, 0.037, 3.21):
        u = 1 / (1 + np.exp((x - s) / math.sqrt(2)))
        pts, _ = contour_points(g, u, 0.5)
        assert len(pts) == 1
        assert pts[0, 0] == pytest.approx(s, abs=0.1**2)


def test_level_set_of_constant_one_is_empty():
    g = Grid.plane((-5, 5), (-5, 5), 0.5)
    from spreadlab.pde import Field
    lev = extract_level_set(Field(g, 1.0, np.ones(g.shape)), 0.5)
    assert len(lev.points) == 0
    assert lev.upper_region_mask.all()


def test_radial_contour_on_plane_is_circular():
    g = Grid.plane((-10, 10), (-10, 10), 0.25)
    X = g.coordinates()
    u = np.exp(-np.sum(X**2, axis=-1) / 20.0)
    pts, segs = contour_points(g, u, 0.5)
    rad = np.linalg.norm(pts, axis=1)
    ref = math.sqrt(20.0 * math.log(2.0))
    assert len(pts) > 50
    assert np.all(np.abs(rad - ref) < 2 * g.h)
    # a closed curve: every segment endpoint is shared by exactly two segments
    ends = np.round(segs.reshape(-1, 2), 9)
    _, counts = np.unique(ends, axis=0, return_counts=True)
    assert np.all(counts == 2)


def test_snapshot_and_level_csv_are_deterministic(tmp_path):
    g = Grid.line(-20, 20, 0.1)
    U = builtin_support("ball", {"radius": 2.0}, N=1)
    for run in ("a", "b"):
        snaps = simulate(g, U, KPP, 2.0, [1.0, 2.0])
        write_snapshots(snaps, tmp_path / run, KPP.id, U.name)
        write_level_set(extract_level_set(snaps[-1], 0.5), tmp_path / run / "level.csv")
    for p in sorted((tmp_path / "a").rglob("*")):
        if p.is_file():
            assert p.read_bytes() == (tmp_path / "b" / p.relative_to(tmp_path / "a")).read_bytes()
