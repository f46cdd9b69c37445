"""
Tests for the ground-state and critical/subcritical transforms
"""

import math

import numpy as np
import pytest
import sympy as sp
from pydantic import ValidationError

import profiles as pr
from errors import InadmissibleError, ProfileError
from models import CritSubcritContext, HomogeneousSetting, Verdict
from transforms import (
    crit_subcrit_identity_check,
    crit_subcrit_map,
    ground_state,
    ground_state_lower_bound_check,
    inverse_radius_map,
    radius_map,
)

QUARTER = pr.bump(sp.Rational(1, 4), sp.Rational(1, 2))


def test_ground_state_pointwise(g4, bump12):
    g = ground_state(bump12, 0, 2, g4)
    for x in np.linspace(1.0, 2.0, 100)[1:-1]:
        assert g(x) == pytest.approx(x * bump12(x), rel=1e-12)


def test_ground_state_with_alpha(g4, bump12):
    g = ground_state(bump12, -0.5, 2, g4)
    # (Q - p - alpha p)/p = 1.5
    assert g(1.5) == pytest.approx(1.5 ** 1.5 * bump12(1.5), rel=1e-12)


def test_ground_state_rejects(g4, bump12):
    with pytest.raises(InadmissibleError):
        ground_state(bump12, 1, 2, g4)
    with pytest.raises(ProfileError):
        ground_state(pr.power(-1), 0, 2, g4)


def test_ground_state_lower_bound(g4, bump12):
    report = ground_state_lower_bound_check(bump12, 0, 2, g4)
    assert report.verdict == Verdict.HOLDS
    assert report.details["ground_state_integral"] > 0
    # for p = 2 the deficit equals the ground-state integral
    assert report.lhs == pytest.approx(report.rhs, rel=1e-7)


def test_ground_state_lower_bound_p3(bump12):
    report = ground_state_lower_bound_check(bump12, 0, 3, HomogeneousSetting(Q=5))
    assert report.verdict == Verdict.HOLDS


CTX = CritSubcritContext(Q=3, m=2, R=1)


def test_radius_map_round_trip():
    for x in (0.3, 0.7, 0.95):
        assert inverse_radius_map(radius_map(x, CTX), CTX) == pytest.approx(x, rel=1e-13)
    assert radius_map(1.0, CTX) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        inverse_radius_map(2.0, CTX)


def test_crit_subcrit_map_composes():
    f = crit_subcrit_map(QUARTER, CTX)
    assert f.support[0] == pytest.approx(inverse_radius_map(0.25, CTX))
    assert f.support[1] == pytest.approx(inverse_radius_map(0.5, CTX))
    x = inverse_radius_map(0.375, CTX)
    assert f(x) == pytest.approx(1.0, rel=1e-10)
    y = inverse_radius_map(0.3, CTX)
    assert f(y) == pytest.approx(QUARTER(0.3), rel=1e-10)


def test_crit_subcrit_map_rejects():
    with pytest.raises(ProfileError):
        crit_subcrit_map(pr.bump(sp.Rational(1, 2), 2), CTX)
    with pytest.raises(ProfileError):
        crit_subcrit_map(-QUARTER, CTX)


def test_crit_subcrit_map_rejects_a_narrow_dip():
    dip = pr.RadialProfile(((pr.r - sp.Rational(5003, 10000)) ** 2 - sp.Rational(1, 10 ** 10),), (),
                           (0.25, 0.75))
    with pytest.raises(ProfileError):
        crit_subcrit_map(dip, CTX)


def test_context_needs_a_dimension_gap():
    with pytest.raises(ValidationError):
        CritSubcritContext(Q=2.5, m=2, R=1)
    assert CritSubcritContext(Q=5, m=3, R=4).kappa == pytest.approx(1.0)


def test_identity_q3_m2():
    report = crit_subcrit_identity_check(QUARTER, CTX)
    assert report.verdict == Verdict.HOLDS
    assert report.relative_gap < 1e-8
    assert report.lhs > 0


def test_identity_q5_m3():
    ctx = CritSubcritContext(Q=5, m=3, R=4)
    report = crit_subcrit_identity_check(pr.bump(sp.Rational(1, 2), 3), ctx)
    assert report.verdict == Verdict.HOLDS
    assert report.relative_gap < 1e-8


def test_identity_with_sphere_measures():
    ctx = CritSubcritContext(Q=3, m=2, R=1, sigma_Q=4 * math.pi, sigma_m=2 * math.pi)
    report = crit_subcrit_identity_check(QUARTER, ctx)
    assert report.relative_gap < 1e-8


def test_identity_of_zero_profile():
    report = crit_subcrit_identity_check(pr.zero(), CTX)
    assert report.lhs == report.rhs == 0.0
    assert report.verdict == Verdict.HOLDS
