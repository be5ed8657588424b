import math

import numpy as np
import pytest

from spreadlab.geometry import builtin_support, direction_sets, predict
from spreadlab.metrics import (
    DomainExitError,
    ball_predicate,
    dilated_probe,
    directional_speed,
    global_dH,
    hausdorff_trace,
    local_dH,
    minkowski_predicate,
    radial_extent,
    sample,
)
from spreadlab.pde import Field, Grid, simulate
from spreadlab.reaction import make_builtin

KPP = make_builtin("kpp")
# Frozen from tests/oracles/reference_runs.py: |s/t - 2| of the radial level at t = 40 (N = 2, h = 0.05)
ORACLE_RADIAL_GAP_T40 = 0.186


@pytest.fixture(scope="module")
def line_run():
    g = Grid.line(-150, 150, 0.1)
    U = builtin_support("ball", {"radius": 2.0}, N=1)
    return simulate(g, U, KPP, 40.0, np.arange(5.0, 40.01, 5.0))


@pytest.fixture(scope="module")
def radial_run():
    g = Grid.radial(200.0, 0.1, 2)
    return simulate(g, builtin_support("ball", {"radius": 2.0}), KPP, 40.0, [10.0, 20.0, 40.0])


def test_sample_is_exact_for_affine_fields():
    g = Grid.plane((-3, 3), (-2, 4), 0.5)
    X = g.coordinates()
    f = Field(g, 1.0, 0.3 * X[..., 0] - 0.2 * X[..., 1] + 0.1)
    P = np.random.default_rng(0).uniform([-3, -2], [3, 4], (100, 2))
    assert np.allclose(sample(f, P), 0.3 * P[:, 0] - 0.2 * P[:, 1] + 0.1)
    with pytest.raises(DomainExitError):
        sample(f, np.array([[3.5, 0.0]]))


def test_kpp_directional_speed(line_run):
    m = directional_speed(line_run, [1.0], 0.5)
    assert m.fitted_speed == pytest.approx(2.0, abs=0.1)
    assert not m.saturated
    assert m.min_probe > 0.99 and m.sup_probe < 0.01
    assert np.all(np.diff(m.level_positions) > 0)


def test_directional_speed_is_symmetric(line_run):
    right = directional_speed(line_run, [1.0]).fitted_speed
    left = directional_speed(line_run, [-1.0]).fitted_speed
    assert left == pytest.approx(right, rel=1e-9)


def test_saturated_when_everything_invaded():
    g = Grid.line(-20, 20, 0.1)
    snaps = [Field(g, t, np.ones(g.shape)) for t in (1.0, 2.0, 3.0)]
    m = directional_speed(snaps, [1.0])
    assert m.saturated
    assert np.allclose(m.level_positions, 20.0)


def test_dilated_probe_at_origin_late(line_run):
    lo, hi = dilated_probe(line_run[-1], np.array([[0.0]]))
    assert lo > 0.99


def test_dilated_probe_at_time_zero():
    g = Grid.line(-10, 10, 0.1)
    U = builtin_support("ball", {"radius": 2.0}, N=1)
    (snap,) = simulate(g, U, KPP, 1.0, [0.0])
    lo, hi = dilated_probe(snap, np.array([[1.0]]))
    assert lo == 1.0 and hi == 1.0


def test_radial_extent(line_run):
    inner, outer = radial_extent(line_run[-1], 0.5, 1.5, 2.3)
    assert inner > 0.99 and outer < 0.01


def test_ball_local_gap_matches_reference(radial_run):
    contains, boundary = ball_predicate(2.0)
    gaps = [local_dH(s, contains, boundary(1), 0.5, 4.0) for s in radial_run]
    assert gaps[-1] < 0.2 * 2.0
    assert gaps[-1] == pytest.approx(ORACLE_RADIAL_GAP_T40, abs=0.02)
    assert gaps[0] > gaps[1] > gaps[2]


def test_local_gap_needs_room(radial_run):
    contains, boundary = ball_predicate(2.0)
    with pytest.raises(DomainExitError):
        local_dH(radial_run[-1], contains, boundary(1), 0.5, 10.0)


def test_local_gap_infinite_at_time_zero():
    g = Grid.line(-10, 10, 0.1)
    contains, boundary = ball_predicate(2.0)
    f = Field(g, 0.0, np.zeros(g.shape))
    assert local_dH(f, contains, boundary(1), 0.5, 1.0) == math.inf


def test_global_gap_of_exact_thickening_is_small():
    # u is the indicator of U + B_{2t}: the gap is a grid-scale quantity
    g = Grid.line(-100, 100, 0.1)
    U = builtin_support("intervals", {"bounds": [[-20, -10], [10, 20]]}, N=1)
    t = 5.0
    x = g.coordinates()
    u = (U.dist_to_U(x).reshape(-1) <= 2.0 * t).astype(float)
    assert global_dH(Field(g, t, u), U, 2.0, 0.5) <= g.h


def test_hausdorff_trace_ball(radial_run):
    contains, boundary = ball_predicate(2.0)
    tr = hausdorff_trace(radial_run, None, builtin_support("ball", {"radius": 2.0}), 0.5, 4.0,
                         c_star=2.0, W_contains=contains, W_boundary=boundary(1))
    assert list(tr.times) == [10.0, 20.0, 40.0]
    assert tr.local_dH[-1] < 0.4
    # for a ball of radius 2 both sets are balls: the global gap is the local one plus 2/t
    assert np.allclose(tr.global_dH_over_t, tr.local_dH + 2.0 / tr.times, atol=0.1 / 10.0)


def test_minkowski_predicate_agrees_with_prediction():
    d = direction_sets(builtin_support("halfspace"), 0.5)
    pred = predict(d, 2.0)
    contains, boundary = minkowski_predicate(pred.xi, 2.0)
    P = np.random.default_rng(5).uniform(-6, 6, (2000, 2))
    assert np.array_equal(contains(P), pred.W_contains(P))
    edge = boundary(2, 5.0)
    # the boundary of the thickened lower half plane is the line x2 = 2
    assert np.allclose(edge[:, 1], 2.0, atol=0.05)
