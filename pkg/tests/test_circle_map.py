import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ergolab.circle_map import (
    GenericPoint,
    circle_distance,
    lebesgue_points,
    make_map,
    map_from_spec,
    orbit,
    orbits,
)
from ergolab.errors import BadParams, DomainError, NotExpanding


def test_linear_maps_have_constant_derivative(doubling, tripling):
    x = np.linspace(0, 1, 17, endpoint=False)
    assert np.all(doubling.derivative(x) == 2.0)
    assert np.all(tripling.derivative(x) == 3.0)
    assert doubling.min_derivative == 2.0


def test_smooth_perturbed_min_derivative(smooth):
    assert smooth.min_derivative == pytest.approx(1.9, abs=1e-6)
    assert smooth.validate_expanding(10**5) == pytest.approx(1.9, abs=1e-6)


def test_nonhoelder_is_expanding(nonhoelder):
    m = nonhoelder.validate_expanding(10**5)
    grid_min = float(np.min(nonhoelder.derivative(np.arange(10**5) / 10**5)))
    assert m == grid_min and m > 1.0


@pytest.mark.parametrize("x, expected", [(0.25, 0.5), (0.75, 0.5), (0.0, 0.0), (0.5, 0.0)])
def test_doubling_eval(doubling, x, expected):
    assert doubling.eval(x) == expected


def test_smooth_eval_matches_closed_form(smooth):
    assert smooth.eval(0.25) == pytest.approx(0.5 + 0.1 / (2 * math.pi), abs=1e-15)


@pytest.mark.parametrize("x", [-0.1, 1.0, 1.5, float("nan")])
def test_eval_rejects_points_outside_domain(doubling, x):
    with pytest.raises(DomainError):
        doubling.eval(x)


def test_inverse_branches_linear(doubling, tripling):
    np.testing.assert_array_equal(doubling.inverse_branches(0.5).points, [0.25, 0.75])
    np.testing.assert_allclose(tripling.inverse_branches(0.0).points, [0.0, 1 / 3, 2 / 3], atol=1e-15)


def test_inverse_branches_round_trip_smooth(smooth):
    pre = smooth.inverse_branches(0.5)
    assert pre.points.size == 2
    assert np.all(np.abs(smooth.lift(pre.points) - (0.5 + np.arange(2))) < 1e-12)
    assert np.all(pre.residuals < 1e-12)


def test_preimage_round_trip_on_grid(all_maps):
    y = np.arange(10**4) / 10**4
    for fmap in all_maps:
        pre = fmap.preimages(y)
        assert pre.shape == (y.size, fmap.degree)
        err = circle_distance(fmap.eval(pre.ravel()), np.repeat(y, fmap.degree))
        assert err.max() <= 1e-10, fmap.tag
        assert np.all(np.diff(pre, axis=1) > 0), fmap.tag


def test_lift_increment_equals_degree(all_maps):
    for fmap in all_maps:
        assert abs(fmap.lift(1.0) - fmap.lift(0.0) - fmap.degree) <= 1e-9


def test_branches_are_monotone(all_maps):
    for fmap in all_maps:
        ends = np.concatenate(([0.0], np.sort(fmap.preimages([0.0])[0][1:]), [1.0]))
        for a, b in zip(ends[:-1], ends[1:]):
            x = np.linspace(a, b, 1000, endpoint=False)
            assert np.all(np.diff(fmap.lift(x)) > 0), fmap.tag


@pytest.mark.parametrize("alpha", [0.5, 0.25, 0.1])
def test_nonhoelder_derivative_has_no_hoelder_modulus(nonhoelder, alpha):
    # difference quotients against the singular point 0 on dyadic scales 2^-20 .. 2^-29
    f0 = nonhoelder.derivative(0.0)
    ratios = [abs(nonhoelder.derivative(2.0**-j) - f0) / (2.0**-j) ** alpha for j in range(20, 30)]
    assert all(b > a for a, b in zip(ratios, ratios[1:]))


def test_smooth_family_is_hoelder(smooth):
    # control: the smooth map's quotients shrink at the same scales
    f0 = smooth.derivative(0.25)
    ratios = [abs(smooth.derivative(0.25 + 2.0**-j) - f0) / (2.0**-j) ** 0.5 for j in range(20, 30)]
    assert all(b < a for a, b in zip(ratios, ratios[1:]))


def test_orbit_examples(doubling):
    np.testing.assert_array_equal(orbit(doubling, 0.0, 3), [0.0, 0.0, 0.0])
    np.testing.assert_array_equal(orbit(doubling, 0.1, 4), [0.1, 0.2, 0.4, 0.8])
    np.testing.assert_allclose(orbit(doubling, Fraction(1, 3), 2), [1 / 3, 2 / 3], rtol=0, atol=1e-16)


def test_orbit_burn_in_shifts(smooth):
    full = orbit(smooth, 0.3, 20)
    np.testing.assert_array_equal(orbit(smooth, 0.3, 15, burn_in=5), full[5:])


def test_rational_orbit_is_eventually_periodic(doubling, tripling):
    xs = orbit(doubling, Fraction(1, 12), 8)
    np.testing.assert_allclose(xs, [1 / 12, 1 / 6, 1 / 3, 2 / 3, 1 / 3, 2 / 3, 1 / 3, 2 / 3])
    np.testing.assert_allclose(orbit(tripling, Fraction(1, 4), 4), [0.25, 0.75, 0.25, 0.75])


def test_generic_point_orbit_is_shift_of_digits(doubling):
    p = GenericPoint(0.3, 11)
    xs = orbit(doubling, p, 200)
    digits = p.digits(2, 300)
    for j in (0, 57, 199):
        expected = sum(int(digits[j + i]) * 2.0 ** -(i + 1) for i in range(60))
        assert xs[j] == pytest.approx(expected, abs=1e-15)
    assert xs[0] == pytest.approx(0.3, abs=1e-15)
    # consecutive points obey the map up to rounding
    np.testing.assert_allclose(doubling.eval(xs[:-1]), xs[1:], atol=1e-13)


def test_generic_orbit_does_not_collapse(doubling):
    xs = orbit(doubling, lebesgue_points(1, 42)[0], 10**5)
    assert np.count_nonzero(xs == 0.0) == 0
    hist = np.histogram(xs, bins=16, range=(0, 1))[0] / xs.size
    assert np.abs(hist - 1 / 16).max() < 0.01


def test_orbits_match_single_orbits(smooth, doubling):
    starts = lebesgue_points(5, 3)
    for fmap in (smooth, doubling):
        block = orbits(fmap, starts, 50, 7)
        for i, s in enumerate(starts):
            np.testing.assert_array_equal(block[:, i], orbit(fmap, s, 50, 7))


def test_lebesgue_points_deterministic():
    a, b = lebesgue_points(50, 9), lebesgue_points(50, 9)
    assert a == b
    heads = np.array([p.head for p in a])
    assert np.all((heads >= 0) & (heads < 1))
    assert np.histogram(heads, bins=5, range=(0, 1))[0].min() >= 8


@given(st.floats(min_value=0.0, max_value=1.0, exclude_max=True))
def test_eval_lands_in_domain(x):
    for fmap in (make_map("linear", 2), make_map("smooth_perturbed", 2, 0.1)):
        y = fmap.eval(x)
        assert 0.0 <= y < 1.0


@given(st.floats(min_value=0.0, max_value=1.0, exclude_max=True), st.integers(0, 1))
def test_preimage_round_trip_property(y, which):
    fmap = make_map("smooth_perturbed", 2, 0.3)
    pts = fmap.inverse_branches(y).points
    assert circle_distance(fmap.eval(pts[which]), y) < 1e-12


def test_bad_params():
    with pytest.raises(BadParams):
        make_map("logistic", 2)
    with pytest.raises(BadParams):
        make_map("linear", 1)
    with pytest.raises(BadParams):
        make_map("linear", 2, c=0.3)
    with pytest.raises(NotExpanding):
        make_map("smooth_perturbed", 2, 1.0)


def test_map_spec_round_trip(nonhoelder):
    again = map_from_spec(nonhoelder.spec())
    x = np.linspace(0, 1, 101, endpoint=False)
    np.testing.assert_array_equal(again.eval(x), nonhoelder.eval(x))
    with pytest.raises(BadParams):
        map_from_spec({"family": "linear", "degree": 2, "amplitude": 1})
