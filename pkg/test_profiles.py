"""
Tests for radial profiles
"""

import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings as hsettings, strategies as st

import profiles as pr
from conftest import CORPUS_TEXTS
from errors import EvaluationFault, ProfileError
from grammar import parse_profile


def test_eval_outside_support_is_zero():
    assert pr.profile_eval(pr.bump(1, 2), 3.0) == 0.0
    assert pr.profile_eval(pr.bump(1, 2), 0.5) == 0.0


def test_eval_closed_form():
    assert pr.profile_eval(pr.power(-2), 2.0) == pytest.approx(0.25, rel=1e-15)


def test_eval_rejects_nonpositive_radius():
    with pytest.raises(ValueError):
        pr.profile_eval(pr.bump(1, 2), 0.0)


def test_bump_peak_is_height():
    assert pr.bump(1, 3)(2.0) == pytest.approx(1.0, rel=1e-14)
    assert pr.bump(1, 3, 5)(2.0) == pytest.approx(5.0, rel=1e-14)


def test_log_hardy_profile_pieces():
    f = pr.log_hardy_profile(10, 2, 2, 1)
    assert f(0.05) == pytest.approx(math.sqrt(math.log(10)), rel=1e-14)
    assert f(0.05) == pytest.approx(1.51743, abs=1e-5)
    assert f(1.0) == 0.0
    left = float(sp.N(f.pieces[1].subs(pr.r, sp.Rational(1, 2))))
    right = float(sp.N(f.pieces[2].subs(pr.r, sp.Rational(1, 2))))
    assert left == pytest.approx(math.sqrt(math.log(2)), rel=1e-14)
    assert right == pytest.approx(left, rel=1e-14)


def test_log_hardy_profile_rejects_overlap():
    with pytest.raises(ProfileError):
        pr.log_hardy_profile(2, 2, 2, 1)


def test_power_derivative_is_exact():
    C = sp.Rational(3, 2)
    d = pr.profile_derivative(pr.power(C), 1)
    assert sp.simplify(d.pieces[0] - C * pr.r ** (C - 1)) == 0


def test_log_power_derivative_is_exact():
    C = sp.Rational(-1, 3)
    d = pr.log_power(C).derivative()
    assert sp.simplify(d.pieces[0] - C * sp.log(pr.r) ** (C - 1) / pr.r) == 0


def test_log_hardy_middle_derivative():
    f = pr.log_hardy_profile(10, 2, 2, 1)
    x = 0.2
    expected = -0.5 / x * math.log(1 / x) ** (-0.5)
    assert f.derivative()(x) == pytest.approx(expected, rel=1e-13)


def test_euler_operator():
    C = sp.Rational(5, 2)
    assert sp.simplify(pr.euler_apply(pr.power(C)).pieces[0] - C * pr.r ** C) == 0
    assert pr.euler_apply(pr.constant(1)).is_zero
    h = pr.euler_apply(pr.log_power(C))
    assert sp.simplify(h.pieces[0] - C * sp.log(pr.r) ** (C - 1)) == 0


@pytest.mark.parametrize("text", CORPUS_TEXTS)
def test_euler_is_radius_times_derivative(text):
    f = parse_profile(text)
    e, d = f.euler(), f.derivative()
    for pe, pd in zip(e.pieces, d.pieces):
        assert sp.simplify(pe - pr.r * pd) == 0


@hsettings(deadline=None, max_examples=40)
@given(
    index=st.integers(min_value=0, max_value=len(CORPUS_TEXTS) - 1),
    fraction=st.floats(min_value=0.2, max_value=0.8),
    order=st.integers(min_value=1, max_value=3),
)
def test_derivative_matches_finite_difference(index, fraction, order):
    f = parse_profile(CORPUS_TEXTS[index])
    lo, hi = f.support
    x = lo + fraction * (hi - lo)
    h = 1e-5 * (hi - lo)
    if any(abs(x - b) < 10 * h for b in f.breaks):
        return
    lower = f.derivative(order - 1) if order > 1 else f
    exact = f.derivative(order)(x)
    fd = (lower(x + h) - lower(x - h)) / (2 * h)
    scale = f.derivative(order).magnitude()
    assert abs(fd - exact) <= 1e-6 * (abs(exact) + scale)


def test_distributional_edges_of_a_kink():
    f = pr.RadialProfile((pr.r, 2 - pr.r), (1.0,), (0.5, 1.5))
    assert 1.0 not in f.derivative(1).distributional_edges
    assert 1.0 in f.derivative(2).distributional_edges
    assert 0.5 in f.derivative(1).distributional_edges


def test_breakpoint_belongs_to_right_piece():
    f = pr.RadialProfile((sp.S.One, sp.Integer(2)), (1.0,), (0.5, 1.5))
    assert f(1.0) == 2.0
    assert f(0.99) == 1.0


def test_undeclared_singularity_is_a_fault():
    f = pr.from_expr(1 / (pr.r - 1), (0.5, 2.0))
    with pytest.raises(EvaluationFault) as info:
        f(1.0)
    assert info.value.radius == 1.0


def test_dilation_divides_support():
    f = pr.bump(1, 2)
    g = f.dilate(4)
    assert g.support == (0.25, 0.5)
    for x in (0.3, 0.375, 0.45):
        assert g(x) == pytest.approx(f(4 * x), rel=1e-13)


def test_window_breaks_are_divided_by_the_factor():
    f = pr.window(1, 4)
    g = f.dilate(2)
    assert g.breaks == pytest.approx(tuple(b / 2 for b in f.breaks))


def test_algebra(bump12):
    other = pr.bump(1.5, 3)
    total = bump12 + other
    product = bump12 * other
    assert total.support == (1.0, 3.0)
    assert product.support == (1.5, 2.0)
    for x in (1.2, 1.7, 2.5):
        assert total(x) == pytest.approx(bump12(x) + other(x), rel=1e-13)
        assert product(x) == pytest.approx(bump12(x) * other(x), rel=1e-13, abs=1e-300)
    assert (bump12 * 3)(1.5) == pytest.approx(3.0, rel=1e-14)
    assert (bump12 / 4)(1.5) == pytest.approx(0.25, rel=1e-14)
    assert (bump12 ** 2)(1.25) == pytest.approx(bump12(1.25) ** 2, rel=1e-13)
    assert (bump12 - bump12).is_zero


def test_division_by_a_profile_is_rejected(bump12):
    with pytest.raises(ProfileError):
        bump12 / bump12


def test_restrict(bump12):
    part = bump12.restrict(1.2, 1.8)
    assert part.support == (1.2, 1.8)
    assert part(1.5) == pytest.approx(1.0)
    assert part(1.1) == 0.0
    assert bump12.restrict(3, 4).is_zero


def test_truncated_power_equals_power_on_plateau():
    f = pr.truncated_power(sp.Rational(-3, 2), sp.Rational(1, 10), 10)
    for x in (0.2, 1.0, 5.0):
        assert f(x) == pytest.approx(x ** -1.5, rel=1e-13)
    assert f.support == (0.1, 10.0)


def test_truncated_log_power_window():
    f = pr.truncated_log_power(sp.Rational(-1, 2), sp.exp(sp.Rational(1, 10)), sp.E)
    x = math.exp(0.35)
    assert f(x) == pytest.approx(0.35 ** -0.5, rel=1e-13)
    with pytest.raises(ProfileError):
        pr.truncated_log_power(-1, sp.Rational(1, 2), sp.E)


def test_window_too_narrow():
    with pytest.raises(ProfileError):
        pr.window(1, sp.Rational(11, 10))


def test_invalid_profiles():
    with pytest.raises(ProfileError):
        pr.RadialProfile((pr.r,), (1.0,), (0.5, 2.0))
    with pytest.raises(ProfileError):
        pr.RadialProfile((pr.r, pr.r), (3.0,), (0.5, 2.0))
    with pytest.raises(ProfileError):
        pr.from_expr(sp.Symbol("x") * pr.r)
    with pytest.raises(ProfileError):
        pr.bump(2, 1)


def test_difference_from_value_is_exact_at_R():
    f = pr.bump(sp.Rational(1, 2), 2)
    d = pr.difference_from_value(f, 1.0)
    assert d(1.0) == 0.0
    assert d(0.9) == pytest.approx(f(0.9) - f(1.0), rel=1e-12)
    near = 1.0 + 5e-4
    assert d(near) == pytest.approx(f(near) - f(1.0), abs=1e-12)
    assert d.vanishing_order(1.0) == 1


def test_difference_from_value_outside_support_is_identity(bump12):
    assert pr.difference_from_value(bump12, 5.0) is bump12


def test_vanishing_order(bump12):
    assert bump12.vanishing_order(1.5) == 0
    assert bump12.vanishing_order(3.0) is None
    g = pr.from_expr((pr.r - 1) ** 2, (0.5, 2.0))
    assert g.vanishing_order(1.0) == 2


def test_sample_minimum():
    assert pr.sample_minimum(pr.bump(1, 2)) >= 0.0
    assert pr.sample_minimum(-pr.bump(1, 2)) < 0.0
    assert pr.sample_minimum(pr.zero()) == 0.0


def test_piecewise_minimum():
    assert pr.piecewise_minimum(pr.bump(1, 2)) >= 0.0
    assert pr.piecewise_minimum(-pr.bump(1, 2)) < 0.0
    assert pr.piecewise_minimum(pr.zero()) == 0.0


def test_piecewise_minimum_finds_a_dip_between_samples():
    dip = pr.RadialProfile(((pr.r - sp.Rational(5003, 10000)) ** 2 - sp.Rational(1, 10 ** 10),), (),
                           (0.25, 0.75))
    assert pr.sample_minimum(dip) > 0.0
    assert pr.piecewise_minimum(dip) == pytest.approx(-1e-10, rel=1e-6)


def test_snap():
    assert pr.snap(2.0000000000000004) == 2.0
    assert pr.snap(-0.9999999999999998) == -1.0
    assert pr.snap(2.5) == 2.5


def test_snap_exponents():
    near = pr.r ** (sp.Rational(-1) + sp.Rational(1, 10 ** 16))
    assert pr.snap_exponents(near) == pr.r ** -1
    assert pr.snap_exponents(pr.r ** sp.Rational(1, 2)) == pr.r ** sp.Rational(1, 2)



def test_linear_combination():
    f = pr.linear_combination([(2, pr.bump(1, 2)), (-1, pr.bump(1, 2))])
    assert f(1.5) == pytest.approx(1.0, rel=1e-14)


def test_evaluate_is_vectorised():
    f = pr.bump(1, 2)
    x = np.linspace(0.5, 2.5, 11)
    values = f.evaluate(x)
    assert values.shape == x.shape
    assert values[0] == 0.0 and values[-1] == 0.0
