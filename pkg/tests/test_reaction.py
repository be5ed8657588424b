import math
from fractions import Fraction

import numpy as np
import pytest

from oracles.quadrature import integral as exact_integral
from spreadlab.reaction import (
    InvalidParameterError,
    check_hypotheses,
    integral,
    integral_sign,
    make_builtin,
    make_custom,
    parse_reaction,
    rescaled,
)


def test_kpp_value_at_half():
    assert make_builtin("kpp")(0.5) == pytest.approx(0.25)


def test_bistable_root_at_threshold():
    assert make_builtin("bistable", {"a": 0.25})(0.25) == pytest.approx(0.0, abs=1e-15)


def test_tristable_sign_pattern():
    f = make_builtin("tristable", {"alpha": 0.2, "beta": 0.5, "gamma": 0.8})
    mids = [0.1, 0.35, 0.65, 0.9]
    assert [np.sign(f(s)) for s in mids] == [-1, 1, -1, 1]
    for s in (0.2, 0.5, 0.8):
        assert f(s) == pytest.approx(0.0, abs=1e-14)


def test_tristable_derivative_matches_finite_difference():
    f = make_builtin("tristable", {"alpha": 0.2, "beta": 0.5, "gamma": 0.8, "amp1": 5.0, "amp2": 3.0})
    s = np.linspace(0.01, 0.99, 97)
    h = 1e-6
    fd = (f(s + h) - f(s - h)) / (2 * h)
    # f is C1 but f'' jumps at the nodes, so the centred difference is O(h) there
    assert np.allclose(f.derivative(s), fd, atol=1e-4)


def test_zero_extension_outside_unit_interval():
    f = make_builtin("kpp")
    assert f(-0.3) == 0.0 and f(1.7) == 0.0
    assert np.all(f(np.array([-1.0, 0.0, 1.0, 2.0])) == 0.0)


@pytest.mark.parametrize(
    "kind, params",
    [("bistable", {"a": 0.0}), ("bistable", {"a": 1.2}), ("tristable", {"alpha": 0.5, "beta": 0.4, "gamma": 0.8})],
)
def test_invalid_parameters_rejected(kind, params):
    with pytest.raises(InvalidParameterError):
        make_builtin(kind, params)


def test_parse_reaction_round_trip():
    f = parse_reaction("bistable(a=0.3)")
    assert f.kind == "bistable" and f.params == {"a": 0.3}
    assert parse_reaction(f.id).params == f.params
    with pytest.raises(InvalidParameterError):
        parse_reaction("bistable(a)")


def test_custom_reaction_is_vectorised():
    f = make_custom(lambda s: s * (1 - s) * (1 + s), name="cubic")
    s = np.linspace(0, 1, 11)
    assert np.allclose(f(s), s * (1 - s) * (1 + s))
    assert f.id == "cubic"


@pytest.mark.parametrize("a", [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)])
def test_integral_against_exact_quadrature(a):
    # exact rational values: 1/24, 0, -1/24
    f = make_builtin("bistable", {"a": float(a)})
    assert integral(f) == pytest.approx(float(exact_integral(a)), abs=1e-12)


def test_integral_sign_examples():
    assert integral_sign(make_builtin("kpp")) == 1
    assert integral_sign(make_builtin("bistable", {"a": 0.5})) == 0
    assert integral_sign(make_builtin("bistable", {"a": 0.75})) == -1


def test_hypotheses_examples():
    assert check_hypotheses(make_builtin("kpp")).invasion_property
    assert not check_hypotheses(make_builtin("bistable", {"a": 0.75})).invasion_property
    rep = check_hypotheses(make_builtin("bistable", {"a": 0.25}))
    assert rep.invasion_property
    assert rep.theta == pytest.approx(0.25, abs=1e-9)
    # exact: min over t of the tail integral is 1/24 at t = 0 for a = 1/4
    assert rep.integral_0_1 == pytest.approx(1 / 24, abs=1e-12)


def test_rescaled_reaction_sees_upper_front():
    f = make_builtin("tristable", {"alpha": 0.2, "beta": 0.5, "gamma": 0.8})
    g = rescaled(f, 0.5, 1.0)
    assert g(0.3) == pytest.approx(f(0.65) / 0.5)
    assert g(0.0) == 0.0 and g(1.0) == 0.0


def test_ignition_vanishes_below_threshold():
    f = make_builtin("ignition", {"alpha": 0.3})
    assert f(0.2) == 0.0 and f(0.5) > 0.0
    assert math.isclose(check_hypotheses(f).theta, 0.3, abs_tol=1e-6)
