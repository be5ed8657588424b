"""One test per acceptance criterion; tolerances are the contractual ones."""

import math
import time

import numpy as np
import pytest
from scipy.spatial.distance import directed_hausdorff

from spreadlab import geometry as G
from spreadlab import harness
from spreadlab.front import NoPositiveFrontError, minimal_speed, shoot
from spreadlab.pde import Grid, simulate
from spreadlab.reaction import integral_sign, make_builtin

_CACHE = {}


def run(sid, tmp_path_factory):
    """Run a catalog scenario once per session and remember its wall time."""
    if sid not in _CACHE:
        t0 = time.perf_counter()
        rep = harness.run_scenario(sid, out=tmp_path_factory.mktemp("acceptance"))
        _CACHE[sid] = (rep.results, time.perf_counter() - t0)
    return _CACHE[sid]


def test_c01_kpp_minimal_speed():
    t0 = time.perf_counter()
    c = minimal_speed(make_builtin("kpp"), 1e-3).c_star
    assert time.perf_counter() - t0 < 1.0
    assert abs(c - 2.0) <= 1e-3


def test_c02_bistable_minimal_speed():
    t0 = time.perf_counter()
    for a in (0.1, 0.25, 0.4):
        c = minimal_speed(make_builtin("bistable", {"a": a}), 1e-3).c_star
        assert abs(c - (1 - 2 * a) / math.sqrt(2)) <= 1e-3
    assert time.perf_counter() - t0 < 5.0


def test_c03_speed_sign_law():
    f = make_builtin("bistable", {"a": 0.75})
    with pytest.raises(NoPositiveFrontError):
        minimal_speed(f)
    assert integral_sign(f) == -1


def test_c04_one_dimensional_spreading(tmp_path_factory):
    r, wall = run("kpp-compact-1d", tmp_path_factory)
    assert wall < 120.0
    assert abs(r["right.fitted_speed"] - 2.0) <= 0.05 * 2.0
    assert r["spread.outer_max"] < 0.01
    assert r["spread.inner_min"] > 0.99


def test_c05_freidlin_gartner_cone(tmp_path_factory):
    r, wall = run("cone-fg-2d", tmp_path_factory)
    assert wall < 600.0
    assert abs(r["geom.w_1"] - 2 * math.sqrt(2)) <= 0.01 * 2 * math.sqrt(2)
    assert abs(r["up.fitted_speed"] - 2.0) <= 0.1 * 2.0
    assert abs(r["side.fitted_speed"] - 2 * math.sqrt(2)) <= 0.1 * 2 * math.sqrt(2)


def test_c06_local_set_convergence_cone(tmp_path_factory):
    r, _ = run("cone-fg-2d", tmp_path_factory)
    c_star = 2.0
    assert r["local.local_final"] < 0.25 * c_star
    assert r["local.local_ratio"] >= 3.0


def test_c07_global_set_convergence(tmp_path_factory):
    r, _ = run("theorem4-global-1d", tmp_path_factory)
    assert r["global.global_final"] < 0.15 * 2.0


def test_c08_shell_oscillation(tmp_path_factory):
    r, _ = run("ce1-shells-1d", tmp_path_factory)
    hits = [r[f"osc.far_{n}"] < 0.5 and r[f"osc.near_{n}"] > 0.99 for n in range(5, 9)]
    assert any(hits) and r["osc.detected"]


def test_c09_gaussian_slab(tmp_path_factory):
    r, _ = run("ce2-gaussian-slab-2d", tmp_path_factory)
    assert r["geom.hyp_U"] is False
    # the equator is unbounded for U but not for U_rho
    assert r["geom.ratio_U_0"] < G.CLASSIFY_TOL < r["geom.ratio_Urho_0"]
    # the slab prediction stays far off while the ball of radius c* is approached
    assert r["slab.local_min"] >= 1.8 and r["slab.local_ratio"] < 1.5
    assert r["ball.local_ratio"] >= 2.0


def test_c10_retracting_supersolution(tmp_path_factory):
    r, _ = run("retracting-supersolution-check", tmp_path_factory)
    assert r["sup.initial_above_one"] and r["sup.centre_below_lambda"] and r["sup.residual_ok"]
    assert r["sup.all_ok"]
    assert r["sup.origin_max"] < 0.15


def test_c11_tristable_terrace(tmp_path_factory):
    r, _ = run("tristable-terrace-1d", tmp_path_factory)
    print(f"terrace speeds c1 = {r['speeds.c1']:.6f}, c2 = {r['speeds.c2']:.6f}")
    assert r["speeds.c1"] > r["speeds.c2"]
    assert r["plateau.inner"] < r["plateau.outer"]
    assert r["plateau.max_deviation"] < 0.05


def test_c12_property_suites():
    rng = np.random.default_rng(2024)
    kpp = make_builtin("kpp")

    # discrete comparison principle on 20 random ordered pairs
    grid = Grid.line(-5, 5, 0.25)
    for _ in range(20):
        u0 = rng.uniform(0, 1, grid.shape)
        v0 = np.minimum(1.0, u0 + rng.uniform(0, 0.5, grid.shape))
        us = simulate(grid, None, kpp, 0.5, [0.25, 0.5], u0=u0)
        vs = simulate(grid, None, kpp, 0.5, [0.25, 0.5], u0=v0)
        assert all(np.all(a.values <= b.values) for a, b in zip(us, vs))

    # trajectory comparison on 10 random (c, c') pairs
    for _ in range(10):
        c, cp = np.sort(rng.uniform(0.2, 4.0, 2))
        lo, hi = shoot(kpp, c, 1e-3), shoot(kpp, cp, 1e-3)
        q = np.linspace(0.0, min(lo.q_samples[-1], hi.q_samples[-1]), 300)
        assert np.all(np.interp(q, lo.q_samples, lo.w_samples) <= np.interp(q, hi.q_samples, hi.w_samples) + 1e-12)

    # Hausdorff metric axioms on 100 random clouds
    clouds = [rng.normal(size=(rng.integers(1, 30), 2)) * rng.uniform(0.1, 5) for _ in range(100)]
    for i in range(100):
        A, B, C = clouds[i], clouds[(i + 1) % 100], clouds[(i + 2) % 100]
        dab = G.hausdorff(A, B)
        assert G.hausdorff(A, A) == 0.0 and dab == G.hausdorff(B, A)
        assert dab <= G.hausdorff(A, C) + G.hausdorff(C, B) + 1e-12
        assert dab == pytest.approx(max(directed_hausdorff(A, B)[0], directed_hausdorff(B, A)[0]), rel=1e-12)

    # envelope and Minkowski descriptions of W on 10^4 points for 5 supports
    c = 2.0
    supports = [("ball", {"radius": 3.0}), ("halfspace", {}), ("cone_subgraph", {"alpha": -1.0}),
                ("cone_subgraph", {"alpha": 1.0}), ("sqrt_subgraph", {})]
    preds = {}
    for name, params in supports:
        pred = G.predict(G.direction_sets(G.builtin_support(name, params), 0.5), c)
        preds[G.builtin_support(name, params).name] = pred
        P = rng.uniform(-10 * c, 10 * c, (14000, 2))
        P = P[np.linalg.norm(P, axis=1) <= 10 * c][:10000]
        r = np.linalg.norm(P, axis=1)
        spacing = 2 * math.pi / pred.dirs.M
        near = (np.abs(G.ray_distance(P, pred.xi) - c) < spacing * r) | (np.abs(r - pred.w_of_e(P)) < spacing * r)
        assert len(P) == 10000
        assert np.array_equal(pred.W_contains(P)[~near], pred.radial_contains(P)[~near])

    # dist(tau e, U)/tau against the admissible unbounded directions
    for name, params in (("halfspace", {}), ("cone_subgraph", {"alpha": -1.0})):
        U = G.builtin_support(name, params)
        d = preds[U.name].dirs
        for e in d.directions[d.labels == "bounded"][::25]:
            lhs, rhs = G.check_eB_identity(U, d, e)
            assert abs(lhs - rhs) <= 0.05
