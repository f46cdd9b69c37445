"""
End-to-end acceptance checks for the Hardy inequality laboratory
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest
import sympy as sp

import catalog
import profiles as pr
import runner
import sharpness as sh
from config import settings
from conftest import make
from models import CritSubcritContext, Family, HomogeneousSetting, Verdict
from runconfig import parse_config
from transforms import crit_subcrit_identity_check

SUITES = Path(__file__).parent / "suites"

SLACK = 1 + 1e-6


# -- c_p ---------------------------------------------------------------------

def test_frs_constant_against_a_grid():
    assert sh.frs_constant(2) == pytest.approx(1.0, abs=1e-12)
    t = np.linspace(0.0, 0.5, 1_000_001)[1:]
    oracle = float(np.min((1 - t) ** 3 - t ** 3 + 3 * t ** 2))
    assert sh.frs_constant(3) == pytest.approx(oracle, abs=1e-8)
    assert sh.frs_constant(3) == pytest.approx(2 - math.sqrt(2), abs=1e-8)


# -- random admissible corpus -------------------------------------------------

def _sample(family: Family, rng: np.random.Generator):
    """(Q, sigma, params) drawn from inside the family's admissible region."""

    def u(lo, hi):
        return float(rng.uniform(lo, hi))

    Q, sigma = u(2.5, 9.0), u(0.5, 4.0)
    if family in (Family.EXTENDED_CKN, Family.EXTENDED_CKN_CRITICAL):
        p, q, delta = u(1.2, 4.0), u(1.2, 4.0), u(0.1, 0.9)
        r = 1 / (delta / p + (1 - delta) / q)
        if family == Family.EXTENDED_CKN_CRITICAL:
            a = 1 - Q / p
        else:
            a = u(-1.0, 1.0)
            while abs(Q - p * (1 - a)) < 0.5:
                a = u(-1.0, 1.0)
        params = dict(p=p, q=q, r=r, delta=delta, a=a, b=u(-1.0, 1.0))
    elif family == Family.EULER_HARDY:
        p, alpha = u(1.2, 4.0), u(-1.0, 2.0)
        while abs(Q - alpha * p) < 0.5:
            alpha = u(-1.0, 2.0)
        params = dict(p=p, alpha=alpha)
    elif family == Family.EULER_HARDY_CRITICAL:
        p = u(1.2, 4.0)
        params = dict(p=p, alpha=Q / p)
    elif family == Family.ANISOTROPIC_CKN:
        params = dict(p=u(1.2, 4.0), a=u(-1.0, 1.0), b=u(-1.0, 1.0))
    elif family in (Family.REMAINDER_HARDY, Family.STABILITY_HARDY):
        p = u(2.0, min(4.0, Q - 0.5))
        top = (Q - p) / p
        params = dict(p=p, alpha=u(top - 2.0, top - 0.2))
        if family == Family.REMAINDER_HARDY:
            params["b"] = float(rng.choice([0.0, Q * (p - 1) / p, -1.0, 2.0]))
    elif family == Family.CRITICAL_LOG_HARDY:
        gamma = u(1.2, 4.0)
        floor = max(1.0, gamma - 1)
        params = dict(gamma=gamma, p=u(floor + 0.3, floor + 3.0), R=u(0.5, 3.0))
    elif family == Family.UNCERTAINTY_A:
        gamma = u(1.2, 3.0)
        p = u(max(2.0, gamma - 1) + 0.3, 8.0)
        params = dict(gamma=gamma, p=p, q=2 * p / (p - 2), R=u(0.5, 3.0))
    elif family == Family.UNCERTAINTY_B:
        gamma = u(1.2, 3.0)
        p = u(max(1.0, gamma - 1) + 0.3, 5.0)
        params = dict(gamma=gamma, p=p, q=p / (p - 1), R=u(0.5, 3.0))
    else:
        p = u(1.5, 3.0)
        a, b = u(0.5, 2.0), u(0.5, 2.0)
        alpha, beta = u(0.5, 2.0), u(0.5, 2.0)
        if family == Family.SUPERWEIGHT_HIGHER_ORDER:
            top = (Q - p) / p - 1
            params = dict(p=p, k=2, a=a, b=b, alpha=alpha, beta=beta, m=u(top - 2.0, top - 0.3))
        else:
            if rng.random() < 0.5:
                beta = -beta
            ab = alpha * beta
            top = (Q - p + min(ab, 0.0)) / p
            params = dict(p=p, a=a, b=b, alpha=alpha, beta=beta, m=u(top - 2.0, top - 0.3))
    return Q, sigma, params


def _random_corpus(per_family: int = 5, seed: int = 20240617):
    rng = np.random.default_rng(seed)
    cases = []
    for family in Family:
        for i in range(per_family):
            Q, sigma, params = _sample(family, rng)
            cases.append(pytest.param(family, Q, sigma, params, id=f"{family.value}-{i}"))
    return cases


RANDOM_CORPUS = _random_corpus()


def test_random_corpus_size():
    assert len(RANDOM_CORPUS) >= 50
    assert {case.values[0] for case in RANDOM_CORPUS} == set(Family)


@pytest.mark.parametrize("family, Q, sigma, params", RANDOM_CORPUS)
def test_random_instances_hold(corpus, family, Q, sigma, params):
    instance = make(family.value, Q, sigma, **params)
    for f in corpus:
        report = catalog.evaluate_sides(instance, f)
        assert report.verdict == Verdict.HOLDS, (f, report)
        assert report.ratio <= SLACK, (f, report)


def test_random_corpus_wall_clock(corpus):
    start = time.perf_counter()
    for case in RANDOM_CORPUS:
        family, Q, sigma, params = case.values
        instance = make(family.value, Q, sigma, **params)
        for f in corpus:
            catalog.evaluate_sides(instance, f)
    assert time.perf_counter() - start < 30.0


# -- scaling ------------------------------------------------------------------

def test_extended_ckn_scaling_invariance(bump12):
    rng = np.random.default_rng(3)
    for _ in range(20):
        Q, sigma, params = _sample(Family.EXTENDED_CKN, rng)
        instance = make("ExtendedCKN", Q, sigma, **params)
        assert catalog.scaling_ratio_drift(instance, bump12) < 1e-8


# -- critical log-Hardy sharpness ----------------------------------------------

@pytest.mark.parametrize("k", [1e2, 1e4, 1e6, 1e8])
def test_log_hardy_closed_forms(g3, k):
    instance = make("CriticalLogHardy", Q=3, gamma=2, p=2, R=1)
    function_side, derivative_side = sh.log_hardy_closed_forms(k, 2, 2, 1, g3)
    D, F = sh.pair_integrals(catalog.hardy_pair(instance), sh.log_hardy_family(2, 2, 1).profile(k))
    assert F.value == pytest.approx(function_side, rel=1e-6)
    assert D.value == pytest.approx(derivative_side, rel=1e-6)


# -- remainder ------------------------------------------------------------------

@pytest.mark.parametrize("Q, p, alpha", [(4, 2, 0.0), (5, 3, 0.1)])
def test_remainder_on_the_corpus(corpus, Q, p, alpha):
    setting = HomogeneousSetting(Q=Q)
    pure = Q * (p - 1) / p
    for b in (0.0, pure, -1.0, 2.0):
        for f in corpus:
            report = catalog.remainder_check(p, alpha, b, f, setting)
            assert report.verdict != Verdict.VIOLATED, (b, f, report)
            if b == pure:
                assert report.rhs == 0.0


# -- stability ------------------------------------------------------------------

def test_stability_on_the_corpus(corpus, g4):
    instance = make("StabilityHardy", Q=4, p=2, alpha=0)
    for f in corpus:
        report = catalog.evaluate_sides(instance, f)
        assert report.details["grid_points"] == settings.STABILITY_GRID_POINTS
        assert report.verdict != Verdict.VIOLATED, (f, report)


def test_stability_distance_shrinks_with_the_window(g4):
    f_alpha = catalog.extremal_profile(0, 2, g4)
    distances = []
    for width in (10 ** 2, 10 ** 4, 10 ** 8):
        f = pr.truncated_power(-1, sp.Rational(1, width), width)
        distances.append(catalog.stability_distance(f, f_alpha, 1.0, 0, 2, g4))
    assert distances[0] > distances[1] > distances[2] > 0
    # the tails contribute about 2 / log(width)
    assert distances[2] ** 2 < 0.13


# -- critical / subcritical identity ----------------------------------------------

BUMP_FRACTIONS = [(1, 4, 1, 2), (1, 8, 1, 2), (1, 2, 3, 4), (1, 3, 2, 3), (1, 5, 3, 5)]


@pytest.mark.parametrize("Q, m, R", [(3, 2, 1), (5, 3, 2)])
def test_crit_subcrit_identity_on_bumps(Q, m, R):
    ctx = CritSubcritContext(Q=Q, m=m, R=R)
    for n0, d0, n1, d1 in BUMP_FRACTIONS:
        g = pr.bump(sp.Rational(n0 * R, d0), sp.Rational(n1 * R, d1))
        report = crit_subcrit_identity_check(g, ctx)
        assert report.relative_gap < 1e-8, (g, report)


# -- uncertainty -----------------------------------------------------------------

@pytest.mark.parametrize("p, q", [(4, 4), (3, 6)])
def test_uncertainty_on_the_corpus(corpus, g3, p, q):
    for f in corpus:
        first = catalog.uncertainty_check("A", p, q, 2, 1, f, g3)
        second = catalog.uncertainty_check("B", p, p / (p - 1), 2, 1, f, g3)
        for report in (first, second):
            assert report.verdict != Verdict.VIOLATED, (f, report)
            assert report.ratio <= SLACK


# -- batch isolation and the full run ---------------------------------------------

ISOLATED = """
[setting G3]
Q = 3

[profile b12]
text = (bump 1 2)

[profile whole]
text = (pow r 2)

[instance euler]
family = EulerHardy
setting = G3
p = 2
alpha = 0
profiles = {profiles}
"""


def test_faulty_item_leaves_the_others_alone():
    clean = runner.run(parse_config(ISOLATED.format(profiles="b12")), "verify", workers=1)
    mixed = runner.run(parse_config(ISOLATED.format(profiles="whole, b12")), "verify", workers=2)
    assert mixed.items[0].verdict == runner.ERROR
    strip = {"index", "wall_time"}
    assert mixed.items[1].model_dump(exclude=strip) == clean.items[0].model_dump(exclude=strip)


@pytest.fixture(scope="module")
def acceptance_report():
    config = parse_config((SUITES / "acceptance.cfg").read_text(encoding="utf-8"))
    return runner.run(config, "report", workers=2)


def test_acceptance_suite_holds(acceptance_report):
    failing = [(item.name, item.verdict, item.error) for item in acceptance_report.items
               if item.verdict not in ("holds", runner.ADMISSIBLE)]
    assert failing == []
    assert acceptance_report.exit_code() == settings.EXIT_OK


def test_acceptance_probes_land_near_their_targets(acceptance_report):
    probes = [item for item in acceptance_report.items if item.kind == "probe"]
    assert len(probes) == 5
    for item in probes:
        assert item.result["relative_gap"] <= 0.02, item.name
        assert item.result["sound"], item.name


def test_acceptance_identities(acceptance_report):
    identities = [item for item in acceptance_report.items if item.kind == "identity"]
    assert [item.name for item in identities] == ["crit-3-2", "crit-5-3"]
    assert all(item.result["relative_gap"] < 1e-8 for item in identities)
