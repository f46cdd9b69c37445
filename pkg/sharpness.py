"""
Sharpness probes for the Hardy inequality laboratory

c_p of the p-th power inequality, the extremizer sequences that approach the
sharp constants, and the ratio probes that extrapolate them numerically.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
import sympy as sp
from scipy.optimize import minimize_scalar

import profiles as pr
from catalog import HardyPair, hardy_pair, sharp_constant
from config import settings
from errors import BranchMismatchError, InadmissibleError, ProbeError
from models import (
    Family,
    HomogeneousSetting,
    InequalityInstance,
    IntegralResult,
    ProbeResult,
    SharpnessClaim,
    SingularityAnnotation,
)
from quadrature import integrate, weighted_integral

logger = logging.getLogger(__name__)


# -- c_p --------------------------------------------------------------------

def _phi(t, p: float):
    return (1 - t) ** p - t ** p + p * t ** (p - 1)


@lru_cache(maxsize=64)
def frs_constant(p: float) -> float:
    """min over 0 < t <= 1/2 of (1-t)^p - t^p + p t^(p-1)."""
    p = float(p)
    if not p >= 2:
        raise ValueError(f"c_p is defined for p >= 2, got {p}")
    if p == 2.0:
        return 1.0
    n = settings.FRS_GRID_POINTS
    grid = np.linspace(0.5 / n, 0.5, n)
    values = _phi(grid, p)
    i = int(np.argmin(values))
    best = float(values[i])
    if 0 < i < n - 1:
        res = minimize_scalar(lambda t: _phi(t, p), bracket=(grid[i - 1], grid[i], grid[i + 1]), method="golden")
        if res.success and 0 < res.x <= 0.5:
            best = min(best, float(res.fun))
    logger.debug(f"c_{p} = {best!r} (grid index {i})")
    return best


def frs_monotone(ps: Sequence[float] = (2, 2.5, 3, 4, 6)) -> bool:
    """Whether c_p is non-increasing along ps; a violation is logged, not raised."""
    values = [frs_constant(p) for p in ps]
    monotone = all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    if not monotone:
        logger.warning(f"c_p not monotone on {list(ps)}: {values}")
    return monotone


# -- extremizer families ----------------------------------------------------

class ExtremizerKind(str, Enum):
    LOG_HARDY_FK = "LogHardy_fk"
    TRUNCATED_POWER = "TruncatedPower"
    TRUNCATED_LOG_POWER = "TruncatedLogPower"


class Placement(str, Enum):
    CENTERED = "centered"  # [a/W, aW]
    BELOW = "below"        # [a/W^2, a]
    ABOVE = "above"        # [a, aW^2]


@dataclass(frozen=True)
class ExtremizerFamily:
    """Index -> profile map of one extremizer sequence."""

    kind: ExtremizerKind
    exponent: sp.Expr = sp.S.Zero
    anchor: float = 1.0
    placement: Placement = Placement.CENTERED
    gamma: Optional[float] = None
    p: Optional[float] = None
    R: Optional[float] = None

    def profile(self, index: float) -> pr.RadialProfile:
        if self.kind == ExtremizerKind.LOG_HARDY_FK:
            return pr.log_hardy_profile(index, self.gamma, self.p, self.R)
        if self.kind == ExtremizerKind.TRUNCATED_LOG_POWER:
            W = pr.exact(index)
            return pr.truncated_log_power(self.exponent, sp.exp(1 / W), sp.E)
        a, W = pr.exact(self.anchor), pr.exact(index)
        if self.placement == Placement.CENTERED:
            lo, hi = a / W, a * W
        elif self.placement == Placement.BELOW:
            lo, hi = a / W ** 2, a
        else:
            lo, hi = a, a * W ** 2
        return pr.truncated_power(self.exponent, lo, hi)

    def slow_variable(self, index: float) -> float:
        if self.kind == ExtremizerKind.LOG_HARDY_FK:
            return math.log(math.log(index * self.R)) - math.log(math.log(2.0))
        return math.log(index)


def log_hardy_family(gamma: float, p: float, R: float) -> ExtremizerFamily:
    failed = []
    if not gamma > 1:
        failed.append("1 < gamma < inf")
    if not p > max(1.0, gamma - 1):
        failed.append("max(1, gamma - 1) < p < inf")
    if not R > 0:
        failed.append("R > 0")
    if failed:
        raise InadmissibleError(ExtremizerKind.LOG_HARDY_FK.value, failed)
    return ExtremizerFamily(kind=ExtremizerKind.LOG_HARDY_FK, gamma=gamma, p=p, R=R)


def truncated_power_family(exponent, anchor: float = 1.0, placement: Placement = Placement.CENTERED) -> ExtremizerFamily:
    return ExtremizerFamily(kind=ExtremizerKind.TRUNCATED_POWER, exponent=pr.exact(exponent),
                            anchor=anchor, placement=Placement(placement))


def truncated_log_power_family(exponent) -> ExtremizerFamily:
    return ExtremizerFamily(kind=ExtremizerKind.TRUNCATED_LOG_POWER, exponent=pr.exact(exponent))


def _pair(instance: InequalityInstance) -> HardyPair:
    try:
        return hardy_pair(instance)
    except BranchMismatchError as exc:
        raise ProbeError(str(exc)) from exc


def truncation_family_for(instance: InequalityInstance) -> ExtremizerFamily:
    """Extremizer sequence on which the instance's sharp ratio is approached."""
    pair = _pair(instance)
    v = instance.params
    if instance.family == Family.CRITICAL_LOG_HARDY:
        return log_hardy_family(v.gamma, v.p, v.R)
    P = pr.exact(pair.p)
    Q = pr.exact(pair.setting.Q)
    if pair.derivative_weight.log_power != 0:
        return truncated_log_power_family(-1 / P)
    weight = pair.function_weight
    power = pr.exact(weight.power)
    sw = weight.superweight
    if sw is None:
        return truncated_power_family(-(Q / P + power))
    # pure-power regime of (a + b r^alpha)^beta: r^alpha small when alpha beta > 0, large otherwise
    small_side = sw.alpha * sw.beta > 0
    rises = sw.alpha > 0
    goes_up = rises != small_side
    anchor = sw.crossover_radius * 10.0 ** ((2.0 if goes_up else -2.0) / abs(sw.alpha))
    placement = Placement.ABOVE if goes_up else Placement.BELOW
    if not small_side:
        power = power + pr.exact(sw.alpha) * pr.exact(sw.beta) / P
    return truncated_power_family(-(Q / P + power), anchor, placement)


# -- closed forms for f_k ---------------------------------------------------

def log_hardy_closed_forms(k: float, gamma: float, p: float, R: float, setting: HomogeneousSetting,
                           tol: Optional[float] = None) -> Tuple[float, float]:
    """(function-side, derivative-side) integrals of f_k on B(0, R) in closed form."""
    log_hardy_family(gamma, p, R)
    if not (k * R > math.e and 1 / k < R / 2):
        raise ValueError(f"need log(kR) > 1 and 1/k < R/2, got k={k}, R={R}")
    sigma = setting.sigma
    P, G, Rx = pr.exact(p), pr.exact(gamma), pr.exact(R)
    s = pr.r
    inner = integrate(s ** (P - G) * sp.exp(-P * s), (0.0, math.log(2.0)),
                      [SingularityAnnotation(location=0.0, algebraic_exponent=p - gamma)], tol)
    C_gp = 2 ** p * math.log(2.0) ** (gamma - 1) * sigma * inner.value
    ramp = integrate((Rx - s) ** P * (sp.log(Rx) - sp.log(s)) ** (-G) / s, (R / 2, R),
                     [SingularityAnnotation(location=float(R), algebraic_exponent=p - gamma)], tol)
    C_R = math.log(2.0) ** (gamma - 1) * (2 / R) ** p * sigma * ramp.value
    L = math.log(math.log(k * R)) - math.log(math.log(2.0))
    derivative_side = sigma * ((gamma - 1) / p) ** p * L + C_gp
    function_side = sigma / (gamma - 1) + sigma * L + C_R
    return function_side, derivative_side


# -- probes -----------------------------------------------------------------

def pair_integrals(pair: HardyPair, f: pr.RadialProfile, tol: Optional[float] = None) -> Tuple[IntegralResult, IntegralResult]:
    """(derivative-side, function-side) p-th power integrals of a Hardy pair."""
    derivative = weighted_integral(f.derivative(pair.order), pair.derivative_weight, pair.p, pair.setting, tol, pair.interval)
    function = weighted_integral(f, pair.function_weight, pair.p, pair.setting, tol, pair.interval)
    return derivative, function


def fit_ratio_model(L: Sequence[float], y: Sequence[float]) -> Tuple[float, float, float, float]:
    """Least-squares fit of y = c (L + A) / (L + B); returns (c, A, B, residual).

    Linear in (c, u = cA, B) through y L = c L + u - B y. Degenerate data
    falls back to y = c + d / L.
    """
    L, y = np.asarray(L, dtype=float), np.asarray(y, dtype=float)
    design = np.column_stack([L, np.ones_like(L), -y])
    solution, _, rank, _ = np.linalg.lstsq(design, y * L, rcond=None)
    c, u, B = (float(x) for x in solution)
    if rank < 3 or c == 0 or not np.all(np.isfinite(solution)) or np.any(np.abs(L + B) < 1e-12):
        simple, *_ = np.linalg.lstsq(np.column_stack([np.ones_like(L), 1 / L]), y, rcond=None)
        c, d = (float(x) for x in simple)
        model = c + d / L
        A, B = d / c if c else 0.0, 0.0
    else:
        model = (c * L + u) / (L + B)
        A = u / c
    scale = max(float(np.max(np.abs(y))), settings.EQUALITY_FLOOR)
    residual = float(np.max(np.abs(model - y))) / scale
    return c, A, B, residual


def probe(instance: InequalityInstance, family: ExtremizerFamily, indices: Sequence[float],
          tol: Optional[float] = None, workers: int = 1) -> ProbeResult:
    """Ratio D/F of the instance's Hardy pair along an extremizer sequence, extrapolated in L."""
    indices = [float(k) for k in indices]
    if len(indices) < settings.PROBE_MIN_INDICES:
        raise ProbeError(f"need at least {settings.PROBE_MIN_INDICES} indices to fit, got {len(indices)}")
    if any(b <= a for a, b in zip(indices, indices[1:])):
        raise ProbeError(f"indices must increase strictly: {indices}")
    constant = sharp_constant(instance)
    if constant.claim != SharpnessClaim.SHARP:
        raise ProbeError(f"{instance.family.value} is not claimed sharp for these parameters")
    pair = _pair(instance)
    if (instance.family == Family.CRITICAL_LOG_HARDY) != (family.kind == ExtremizerKind.LOG_HARDY_FK):
        raise ProbeError(f"{family.kind.value} sequences do not pair with {instance.family.value}")

    def ratio_at(index: float) -> float:
        derivative, function = pair_integrals(pair, family.profile(index), tol)
        if not (derivative.converged and function.converged):
            logger.warning(f"probe index {index}: quadrature missed tolerance")
        if function.value <= 0:
            raise ProbeError(f"function-side integral vanished at index {index}")
        return derivative.value / function.value

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            ratios = list(pool.map(ratio_at, indices))
    else:
        ratios = [ratio_at(k) for k in indices]

    L = [family.slow_variable(k) for k in indices]
    c, A, B, residual = fit_ratio_model(L, ratios)
    target = pair.kappa ** pair.p
    gap = abs(c - target) / abs(target)
    root = max(c, 0.0) ** (1.0 / pair.p)
    constant_limit = root if pair.constant_on_left else (1.0 / root if root > 0 else math.inf)
    normalized = [target / ratio for ratio in ratios]
    margin = 1.0 + (tol if tol is not None else settings.DEFAULT_REL_TOL) + 1e-9
    sound = all(x <= margin for x in normalized)
    if not sound:
        logger.warning(f"probe of {instance.family.value}: a ratio fell below the sharp bound {target!r}")
    logger.info(f"probe {instance.family.value}/{family.kind.value}: limit {c!r} vs target {target!r} (gap {gap:.3e})")
    return ProbeResult(
        family_kind=family.kind.value,
        ratios=list(zip(indices, ratios)),
        slow_variable=L,
        extrapolated_limit=c,
        target=target,
        relative_gap=gap,
        constant_limit=constant_limit,
        sharp_constant=constant.value,
        fit_residual=residual,
        normalized_ratios=normalized,
        sound=sound,
    )
