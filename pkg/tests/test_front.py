import math
import time

import numpy as np
import pytest

from spreadlab.front import (
    NoPositiveFrontError,
    SubsolutionNotFoundError,
    build_retracting_supersolution,
    compact_subsolution,
    exponential_supersolution,
    minimal_speed,
    radial_residual,
    shoot,
    tristable_terrace_speeds,
)
from spreadlab.reaction import make_builtin

# Frozen from tests/oracles/phase_plane.py (RK4 in the profile variable, ds = 1e-3)
ORACLE_W1_C3 = 7.9170170563
ORACLE_QV_C1 = 3.3508e-8
ORACLE_W1_C25_EPS05 = 8.3428137587
# Frozen from tests/oracles/eps_scan.py: largest turning point at c = 0.1 over eps in [1e-12, 0.05]
ORACLE_MAX_TURN_C01 = 0.05533


@pytest.fixture(scope="module")
def kpp():
    return make_builtin("kpp")


@pytest.fixture(scope="module")
def kpp_front(kpp):
    return minimal_speed(kpp)


def test_shoot_fast_orbit_reaches_one(kpp):
    tr = shoot(kpp, 3.0, 1e-8)
    assert tr.reached_one and not tr.vanished
    assert tr.w_1 == pytest.approx(ORACLE_W1_C3, rel=1e-5)


def test_shoot_slow_orbit_vanishes(kpp):
    tr = shoot(kpp, 1.0, 1e-8)
    assert tr.vanished
    assert tr.q_v == pytest.approx(ORACLE_QV_C1, rel=5e-3)


def test_shoot_large_speed_stays_above_diagonal(kpp):
    # c > 1 + max|f'| with eps = 0.5: sqrt(w(q)) >= q along the whole orbit
    tr = shoot(kpp, 2.5, 0.5)
    assert tr.reached_one
    assert tr.w_1 == pytest.approx(ORACLE_W1_C25_EPS05, rel=1e-6)
    q = np.asarray(tr.q_samples)
    assert np.all(np.sqrt(np.asarray(tr.w_samples)) >= q - 1e-12)


def test_kpp_minimal_speed(kpp):
    t0 = time.perf_counter()
    res = minimal_speed(kpp, 1e-3)
    assert time.perf_counter() - t0 < 1.0
    assert res.c_star == pytest.approx(2.0, abs=1e-3)
    assert res.bracket[0] <= res.c_star <= res.bracket[1]


def _exact_profile_residual(a):
    # phi(z) = 1/(1 + exp(z/sqrt2)) solves phi'' + c phi' + f(phi) = 0 at c = (1-2a)/sqrt2
    c = (1 - 2 * a) / math.sqrt(2)
    z = np.linspace(-15, 15, 3001)
    dz = z[1] - z[0]
    phi = 1 / (1 + np.exp(z / math.sqrt(2)))
    d2 = (phi[2:] - 2 * phi[1:-1] + phi[:-2]) / dz**2
    d1 = (phi[2:] - phi[:-2]) / (2 * dz)
    p = phi[1:-1]
    return np.abs(d2 + c * d1 + p * (1 - p) * (p - a)).max()


@pytest.mark.parametrize("a", [0.1, 0.25, 0.4])
def test_bistable_minimal_speed_matches_exact_profile(a):
    assert _exact_profile_residual(a) < 1e-5
    res = minimal_speed(make_builtin("bistable", {"a": a}), 1e-3)
    assert res.c_star == pytest.approx((1 - 2 * a) / math.sqrt(2), abs=1e-3)


def test_bistable_minimal_speed_profile_residual():
    f = make_builtin("bistable", {"a": 0.25})
    res = minimal_speed(f)
    assert np.abs(res.residual(f)).max() < 1e-4
    assert np.all(np.diff(res.profile_phi) < 0)


def test_backward_bistable_has_no_positive_front():
    with pytest.raises(NoPositiveFrontError):
        minimal_speed(make_builtin("bistable", {"a": 0.75}))


def test_ignition_speed_positive():
    assert minimal_speed(make_builtin("ignition", {"alpha": 0.3})).c_star > 0.0


@pytest.mark.parametrize(
    "amps, relation",
    [((1.0, 30.0), "lt"), ((30.0, 1.0), "gt"), ((1.0, 1.0), "eq")],
)
def test_tristable_terrace_speed_ordering(amps, relation):
    f = make_builtin("tristable", {"alpha": 0.2, "beta": 0.5, "gamma": 0.7, "amp1": amps[0], "amp2": amps[1]})
    c1, c2 = tristable_terrace_speeds(f)
    if relation == "lt":
        assert c1 < c2
    elif relation == "gt":
        assert c1 > c2
    else:
        # mirror-symmetric bumps give the same rescaled reaction twice
        assert c1 == pytest.approx(c2, abs=1e-3)


def test_compact_subsolution_near_critical_speed(kpp, kpp_front):
    sub = compact_subsolution(kpp, 1.99, kpp_front)
    assert sub.phi[0] > sub.theta
    assert sub.phi[-1] == 0.0
    assert np.abs(sub.residual(kpp)).max() < 1e-6
    assert np.all(np.diff(sub.phi) <= 0)


def test_compact_subsolution_fails_far_below(kpp, kpp_front):
    # the dense launch-height scan never turns back above theta = 0.5
    assert ORACLE_MAX_TURN_C01 < 0.5
    with pytest.raises(SubsolutionNotFoundError):
        compact_subsolution(kpp, 0.1, kpp_front)


def test_compact_subsolution_rejects_speed_in_bracket(kpp, kpp_front):
    with pytest.raises(ValueError):
        compact_subsolution(kpp, 2.1, kpp_front)


def test_exponential_supersolution_log_slope_bounds(kpp):
    sup = exponential_supersolution(kpp, 3.0)
    z = np.linspace(-20.0, 50.0, 2001)
    ratio = -sup.dphi(z) / sup.phi(z)
    assert np.all(ratio >= 1.0 / sup.m - 1e-9)
    assert np.all(ratio <= sup.m + 1e-9)


def test_retracting_supersolution_checks(kpp, kpp_front):
    sup = build_retracting_supersolution(kpp, 3.0, 0.1, 10.0, 2, kpp_front)
    assert sup.checks["all_ok"]
    assert sup.c > sup.c_prime > sup.c_second > kpp_front.c_star
    assert 0 < sup.beta < sup.c_prime - sup.c_second
    assert sup.R == pytest.approx(sup.R_prime + sup.L)
    t = np.linspace(0.0, 10.0, 21)
    r = np.linspace(sup.R_prime + 0.01, sup.R + 3.0 * 10.0 + 5.0, 301)
    T, Rr = np.meshgrid(t, r, indexing="ij")
    assert np.all(sup.evaluator(T, Rr) > 0)
    res = radial_residual(sup, kpp, T, Rr)
    assert np.all(res >= -1e-9)
    assert sup.evaluator(10.0, 0.0) < 0.1


def test_retracting_supersolution_residual_by_finite_differences(kpp, kpp_front):
    sup = build_retracting_supersolution(kpp, 3.0, 0.1, 10.0, 2, kpp_front)
    rng = np.random.default_rng(3)
    t = rng.uniform(0.5, 9.5, 200)
    r = rng.uniform(sup.R_prime + 1.0, sup.R + 25.0, 200)
    ht, hr = 1e-4, 1e-3
    v = sup.evaluator(t, r)
    vt = (sup.evaluator(t + ht, r) - sup.evaluator(t - ht, r)) / (2 * ht)
    vr = (sup.evaluator(t, r + hr) - sup.evaluator(t, r - hr)) / (2 * hr)
    vrr = (sup.evaluator(t, r + hr) - 2 * v + sup.evaluator(t, r - hr)) / hr**2
    fd = vt - vrr - (sup.N - 1) / r * vr - kpp(v)
    closed = radial_residual(sup, kpp, t, r)
    # the two branches meet at a kink; compare only where both routes are smooth
    smooth = np.abs(fd - closed) < 1e-3 * (1 + np.abs(closed))
    assert smooth.mean() > 0.9
    assert np.all(fd[smooth] >= -1e-4)
