"""
Change-of-variable constructions for the Hardy inequality laboratory

The ground-state substitution g = r^((Q-p-alpha p)/p) f behind the
remainder estimate, and the map s(r) = R exp(1 - r^-kappa) carrying
critical Hardy deficits in dimension m to subcritical ones in dimension Q.
"""

import logging
import math
from typing import Optional

import sympy as sp

import profiles as pr
from catalog import EXACT_ZERO, compare, hardy_deficit, measured_integral, require_test_function
from config import settings
from errors import InadmissibleError, ProfileError
from models import (
    CritSubcritContext,
    EqualityReport,
    HomogeneousSetting,
    LogKind,
    Verdict,
    VerificationReport,
    WeightSpec,
)
from sharpness import frs_constant

logger = logging.getLogger(__name__)


def _ground_exponent(alpha: float, p: float, Q: float) -> sp.Expr:
    P = pr.exact(p)
    return (pr.exact(Q) - P - pr.exact(alpha) * P) / P


def ground_state(f: pr.RadialProfile, alpha: float, p: float, setting: HomogeneousSetting) -> pr.RadialProfile:
    """g = r^((Q - p - alpha p)/p) f."""
    Q = setting.Q
    if not alpha < (Q - p) / p:
        raise InadmissibleError("ground_state", [f"alpha < (Q - p)/p, got alpha={alpha}"])
    require_test_function(f)
    if f.is_zero:
        return f
    return pr.power(_ground_exponent(alpha, p, Q)) * f


def ground_state_lower_bound_check(f: pr.RadialProfile, alpha: float, p: float, setting: HomogeneousSetting,
                                   tol: Optional[float] = None) -> VerificationReport:
    """J(f) >= c_p sigma integral of |g'|^p r^(p-1) dr."""
    Q = setting.Q
    if not 2 <= p < Q:
        raise InadmissibleError("ground_state", [f"2 <= p < Q, got p={p}, Q={Q}"])
    g = ground_state(f, alpha, p, setting)
    J, _, _ = hardy_deficit(f, alpha, p, setting, tol)
    c_p = frs_constant(p)
    if g.is_zero:
        bound = EXACT_ZERO
    else:
        # r^(p-1) is the radial measure of a setting with Q = p
        flat = HomogeneousSetting(Q=p, sigma=setting.sigma)
        bound = measured_integral(g.derivative(), WeightSpec(), p, flat, tol)
    rhs = c_p * bound
    return compare("GroundState", J.value, rhs.value, c_p, rhs, J, {"ground_state_integral": bound.value})


# -- critical <-> subcritical -----------------------------------------------

def radius_map(r: float, ctx: CritSubcritContext) -> float:
    """s(r) = R exp(1 - r^-kappa)."""
    return ctx.R * math.exp(1.0 - r ** (-ctx.kappa))


def inverse_radius_map(s: float, ctx: CritSubcritContext) -> float:
    """r(s) = (1 - log(s/R))^(-(m-1)/(Q-m))."""
    if not 0 < s <= ctx.R:
        raise ValueError(f"s must lie in (0, R], got {s}")
    return (1.0 - math.log(s / ctx.R)) ** (-1.0 / ctx.kappa)


def crit_subcrit_map(g: pr.RadialProfile, ctx: CritSubcritContext) -> pr.RadialProfile:
    """f(r) = g(s(r)) on (0, 1) for g compactly supported in (0, R)."""
    if g.is_zero:
        return pr.zero()
    lo, hi = g.support
    if not (0 < lo and hi < ctx.R):
        raise ProfileError(f"g must be supported strictly inside (0, {ctx.R}), got [{lo}, {hi}]")
    if pr.piecewise_minimum(g) < 0:
        raise ProfileError("g must be nonnegative")
    R = pr.exact(ctx.R)
    kappa = (pr.exact(ctx.Q) - pr.exact(ctx.m)) / (pr.exact(ctx.m) - 1)
    inner = R * sp.exp(1 - pr.r ** (-kappa))
    return g.compose(inner, lambda s: inverse_radius_map(s, ctx))


def crit_subcrit_identity_check(g: pr.RadialProfile, ctx: CritSubcritContext,
                                tol: float = 1e-8, quad_tol: Optional[float] = None) -> EqualityReport:
    """Subcritical deficit of f = g o s in dimension Q against the critical deficit of g in dimension m."""
    m, Q = ctx.m, ctx.Q
    f = crit_subcrit_map(g, ctx)
    if f.is_zero:
        return EqualityReport(lhs=0.0, rhs=0.0, relative_gap=0.0, tol=tol, verdict=Verdict.HOLDS)

    big = HomogeneousSetting(Q=Q, sigma=ctx.sigma_Q)
    small = HomogeneousSetting(Q=m, sigma=ctx.sigma_m)
    left = (measured_integral(f.derivative(), WeightSpec(), m, big, quad_tol)
            - ((Q - m) / m) ** m * measured_integral(f, WeightSpec(power=-1.0), m, big, quad_tol))
    log_weight = WeightSpec(power=-1.0, log_power=-1.0, log_kind=LogKind.LOG_RATIO, log_radius=ctx.R * math.e)
    deficit = (measured_integral(g.derivative(), WeightSpec(), m, small, quad_tol)
               - ((m - 1) / m) ** m * measured_integral(g, log_weight, m, small, quad_tol))
    right = (ctx.sigma_Q / ctx.sigma_m) * ctx.kappa ** (m - 1) * deficit

    scale = max(abs(left.value), abs(right.value), settings.EQUALITY_FLOOR)
    gap = abs(left.value - right.value) / scale
    if not (left.converged and right.converged):
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.HOLDS if gap <= tol else Verdict.VIOLATED
    if verdict != Verdict.HOLDS:
        logger.warning(f"critical/subcritical identity: gap {gap!r} ({verdict.value})")
    return EqualityReport(lhs=left.value, rhs=right.value, relative_gap=gap, tol=tol,
                          quadrature_errors=list(left.errors + right.errors), verdict=verdict)
