"""
Inequality catalog for the Hardy inequality laboratory

Every family is a validated, evaluable instance: admissibility checks,
closed-form constants with their sharpness claim, and evaluators that
reduce each inequality to a comparison small <= big between quadratures.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import sympy as sp
from scipy.integrate import quad

import profiles as pr
from config import settings
from errors import BranchMismatchError, InadmissibleError, ProfileError
from models import (
    AdmissibilityVerdict,
    ClassicalStatus,
    Family,
    HomogeneousSetting,
    InequalityInstance,
    InequalityParams,
    IntegralResult,
    LogKind,
    SharpConstant,
    SharpnessClaim,
    Superweight,
    Verdict,
    VerificationReport,
    WeightSpec,
)
from quadrature import weighted_integral

logger = logging.getLogger(__name__)

_EQ_TOL = 1e-12

CKN_FAMILIES = (Family.EXTENDED_CKN, Family.EXTENDED_CKN_CRITICAL)
SUPERWEIGHT_FAMILIES = (Family.SUPERWEIGHT, Family.SUPERWEIGHT_HIGHER_ORDER)

_REQUIRED: Dict[Family, Tuple[str, ...]] = {
    Family.EXTENDED_CKN: ("p", "q", "r", "delta", "a", "b"),
    Family.EXTENDED_CKN_CRITICAL: ("p", "q", "r", "delta", "a", "b"),
    Family.EULER_HARDY: ("p", "alpha"),
    Family.EULER_HARDY_CRITICAL: ("p",),
    Family.ANISOTROPIC_CKN: ("p", "a", "b"),
    Family.REMAINDER_HARDY: ("p", "alpha", "b"),
    Family.STABILITY_HARDY: ("p", "alpha"),
    Family.CRITICAL_LOG_HARDY: ("gamma", "p", "R"),
    Family.UNCERTAINTY_A: ("gamma", "p", "q", "R"),
    Family.UNCERTAINTY_B: ("gamma", "p", "q", "R"),
    Family.SUPERWEIGHT: ("p", "a", "b", "alpha", "beta", "m"),
    Family.SUPERWEIGHT_HIGHER_ORDER: ("p", "a", "b", "alpha", "beta", "m", "k"),
}


def _close(x: float, y: float) -> bool:
    return abs(x - y) <= _EQ_TOL * max(1.0, abs(x), abs(y))


# -- measured quantities ----------------------------------------------------

@dataclass(frozen=True)
class Measured:
    """A value with a propagated absolute error and the raw quadrature errors behind it."""

    value: float
    error: float = 0.0
    errors: Tuple[float, ...] = ()
    converged: bool = True
    fragile: bool = False

    @classmethod
    def from_integral(cls, result: IntegralResult) -> "Measured":
        return cls(result.value, result.abs_error_estimate, (result.abs_error_estimate,),
                   result.converged, result.fragile)

    def _merged(self, other: "Measured", value: float, error: float) -> "Measured":
        return Measured(value, error, self.errors + other.errors,
                        self.converged and other.converged, self.fragile or other.fragile)

    def __mul__(self, other) -> "Measured":
        if isinstance(other, Measured):
            value = self.value * other.value
            error = abs(self.value) * other.error + abs(other.value) * self.error
            return self._merged(other, value, error)
        factor = float(other)
        return Measured(self.value * factor, abs(factor) * self.error, self.errors, self.converged, self.fragile)

    __rmul__ = __mul__

    def __add__(self, other: "Measured") -> "Measured":
        return self._merged(other, self.value + other.value, self.error + other.error)

    def __sub__(self, other: "Measured") -> "Measured":
        return self._merged(other, self.value - other.value, self.error + other.error)

    def __pow__(self, exponent: float) -> "Measured":
        exponent = float(exponent)
        base = max(self.value, 0.0)
        if exponent == 0.0:
            return Measured(1.0, 0.0, self.errors, self.converged, self.fragile)
        if base == 0.0:
            value = 0.0 if exponent > 0 else math.inf
            error = self.error ** exponent if exponent > 0 else math.inf
        else:
            value = base ** exponent
            error = abs(exponent) * value * self.error / base
        return Measured(value, error, self.errors, self.converged, self.fragile)

    def root(self, p: float) -> "Measured":
        return self ** (1.0 / p)


EXACT_ONE = Measured(1.0)
EXACT_ZERO = Measured(0.0)


def measured_integral(f: pr.RadialProfile, weight: WeightSpec, p: float, setting: HomogeneousSetting,
              tol: Optional[float] = None, interval: Optional[Tuple[float, float]] = None) -> Measured:
    return Measured.from_integral(weighted_integral(f, weight, p, setting, tol, interval))


def _norm(f: pr.RadialProfile, weight: WeightSpec, p: float, setting: HomogeneousSetting,
          tol: Optional[float] = None, interval: Optional[Tuple[float, float]] = None) -> Measured:
    return measured_integral(f, weight, p, setting, tol, interval).root(p)


def require_test_function(f: pr.RadialProfile) -> None:
    if f.is_zero:
        return
    if not (f.is_compact and f.avoids_origin):
        raise ProfileError(
            f"profile must be compactly supported away from 0, got support [{f.support[0]}, {f.support[1]}]"
        )


def compare(family: str, lhs: float, rhs: float, constant: float, small: Measured, big: Measured,
            details: Optional[Dict[str, float]] = None) -> VerificationReport:
    """Report for the check small <= big."""
    budget = small.error + big.error + settings.ROUNDOFF_FLOOR * (abs(small.value) + abs(big.value))
    margin = big.value - small.value
    if small.value == 0.0 and big.value == 0.0:
        ratio = 0.0
    elif big.value == 0.0:
        ratio = math.inf
    else:
        ratio = small.value / big.value
    if not (small.converged and big.converged):
        verdict = Verdict.INCONCLUSIVE
    elif margin >= -budget:
        verdict = Verdict.HOLDS
    else:
        verdict = Verdict.VIOLATED
    if verdict != Verdict.HOLDS:
        logger.warning(f"{family}: verdict {verdict.value} (margin={margin!r}, budget={budget!r})")
    return VerificationReport(
        family=family,
        lhs=lhs,
        rhs=rhs,
        constant=constant,
        ratio=ratio,
        margin=margin,
        error_budget=budget,
        quadrature_errors=list(small.errors + big.errors),
        verdict=verdict,
        fragile=small.fragile or big.fragile,
        details=details or {},
    )


# -- admissibility ----------------------------------------------------------

def classical_ckn_conditions(p: float, q: float, r: float, a: float, b: float, delta: float, n: float) -> List[str]:
    """Failed conditions of the classical CKN range, with d = a - 1."""
    d = a - 1.0
    c = delta * d + (1.0 - delta) * b
    failed = []
    checks = [
        ("p >= 1", p >= 1),
        ("q >= 1", q >= 1),
        ("r > 0", r > 0),
        ("0 <= delta <= 1", 0 <= delta <= 1),
        ("1/p + a/n > 0", 1 / p + a / n > 0),
        ("1/q + b/n > 0", 1 / q + b / n > 0),
        ("1/r + c/n > 0", r > 0 and 1 / r + c / n > 0),
    ]
    if r > 0:
        balance = delta * (1 / p + (a - 1) / n) + (1 - delta) * (1 / q + b / n)
        checks.append(("1/r + c/n = delta*(1/p + (a - 1)/n) + (1 - delta)*(1/q + b/n)", _close(1 / r + c / n, balance)))
        if delta > 0:
            checks.append(("a - d >= 0", a - d >= 0))
            if _close(1 / r + c / n, 1 / p + (a - 1) / n):
                checks.append(("a - d <= 1", a - d <= 1 + _EQ_TOL))
    for name, ok in checks:
        if not ok:
            failed.append(name)
    return failed


_CLASSICAL_RANGE = {"1/p + a/n > 0", "1/q + b/n > 0", "1/r + c/n > 0"}


def classical_status(params: InequalityParams, Q: float) -> ClassicalStatus:
    failed = classical_ckn_conditions(params.p, params.q, params.r, params.a, params.b, params.delta, Q)
    if _CLASSICAL_RANGE & set(failed):
        return ClassicalStatus.VIOLATES
    return ClassicalStatus.SATISFIES


def ckn_example_params(n: float, p: float, delta: float) -> InequalityParams:
    """p = q = r with a = -(n-2p)/p, b = -n/p, c = -(n - delta p)/p: outside the classical range."""
    return InequalityParams(
        p=p, q=p, r=p, delta=delta,
        a=-(n - 2 * p) / p, b=-n / p, c=-(n - delta * p) / p,
    )


def _effective_Q(params: InequalityParams, setting: HomogeneousSetting) -> float:
    return params.Q if params.Q is not None else setting.Q


def _ckn_checks(v: InequalityParams, Q: float, critical: bool) -> List[Tuple[str, bool]]:
    p, q, r, delta, a, b = v.p, v.q, v.r, v.delta, v.a, v.b
    derived_c = delta * (a - 1) + b * (1 - delta)
    checks = [
        ("1 < p < inf", 1 < p),
        ("1 < q < inf", 1 < q),
        ("0 < r < inf", 0 < r),
        ("p + q >= r", p + q >= r),
        ("0 <= delta <= 1", 0 <= delta <= 1),
    ]
    if r > 0:
        checks.append(("(r - q)/r <= delta <= p/r", (r - q) / r - _EQ_TOL <= delta <= p / r + _EQ_TOL))
        checks.append(("delta*r/p + (1 - delta)*r/q = 1", p > 0 and q > 0 and _close(delta * r / p + (1 - delta) * r / q, 1.0)))
    if v.c is not None:
        checks.append(("c = delta*(a - 1) + b*(1 - delta)", _close(v.c, derived_c)))
    on_critical_line = _close(Q, p * (1 - a))
    if critical:
        checks.append(("Q = p*(1 - a)", on_critical_line))
    else:
        checks.append(("Q != p*(1 - a)", not on_critical_line))
    return checks


def _superweight_checks(v: InequalityParams, Q: float, order: int) -> List[Tuple[str, bool]]:
    p, m, ab = v.p, v.m, v.alpha * v.beta
    top = p * (m + order - 1)
    checks = [
        ("1 < p < inf", 1 < p),
        ("a > 0", v.a > 0),
        ("b > 0", v.b > 0),
        ("alpha*beta != 0", ab != 0),
    ]
    label = "p*m" if order == 1 else "p*(m + k - 1)"
    if ab > 0:
        checks.append((f"{label} <= Q - p", top <= Q - p + _EQ_TOL))
    elif ab < 0:
        checks.append((f"{label} - alpha*beta <= Q - p", top - ab <= Q - p + _EQ_TOL))
    return checks


def _log_hardy_checks(v: InequalityParams) -> List[Tuple[str, bool]]:
    return [
        ("1 < gamma < inf", v.gamma > 1),
        ("max(1, gamma - 1) < p < inf", v.p > max(1.0, v.gamma - 1)),
        ("R > 0", v.R > 0),
    ]


def validate(family: Family, params: InequalityParams, setting: HomogeneousSetting) -> AdmissibilityVerdict:
    """Admissibility of a parameter record; never raises for mathematical reasons."""
    family = Family(family)
    given = params.given()
    missing = [name for name in _REQUIRED[family] if name not in given]
    bad = [
        name for name, value in given.items()
        if name != "R_grid" and not (isinstance(value, (int, float)) and math.isfinite(value))
    ]
    if params.R_grid is not None and not all(math.isfinite(x) and x > 0 for x in params.R_grid):
        bad.append("R_grid")
    failed = [f"missing parameter '{name}'" for name in missing] + [f"parameter '{name}' must be finite" for name in bad]
    if failed:
        return AdmissibilityVerdict(family=family, admissible=False, failed_conditions=failed)

    v = params
    Q = _effective_Q(params, setting)
    checks: List[Tuple[str, bool]] = [("Q > 1", Q > 1)]
    status = ClassicalStatus.NOT_APPLICABLE

    if family in CKN_FAMILIES:
        checks += _ckn_checks(v, Q, critical=family == Family.EXTENDED_CKN_CRITICAL)
        if v.p >= 1 and v.q >= 1 and v.r > 0:
            status = classical_status(v, Q)
    elif family == Family.EULER_HARDY:
        checks += [("1 < p < inf", v.p > 1), ("alpha*p != Q", not _close(v.alpha * v.p, Q))]
    elif family == Family.EULER_HARDY_CRITICAL:
        checks.append(("1 < p < inf", v.p > 1))
        if v.alpha is not None:
            checks.append(("alpha*p = Q", _close(v.alpha * v.p, Q)))
    elif family == Family.ANISOTROPIC_CKN:
        checks.append(("1 < p < inf", v.p > 1))
    elif family in (Family.REMAINDER_HARDY, Family.STABILITY_HARDY):
        checks += [("2 <= p < Q", 2 <= v.p < Q), ("alpha < (Q - p)/p", v.alpha < (Q - v.p) / v.p)]
    elif family == Family.CRITICAL_LOG_HARDY:
        checks += _log_hardy_checks(v)
    elif family == Family.UNCERTAINTY_A:
        checks += _log_hardy_checks(v)
        checks += [("q > 1", v.q > 1), ("1/p + 1/q = 1/2", _close(1 / v.p + 1 / v.q, 0.5))]
    elif family == Family.UNCERTAINTY_B:
        checks += _log_hardy_checks(v)
        checks.append(("1/p + 1/p' = 1", v.q > 1 and _close(1 / v.p + 1 / v.q, 1.0)))
    elif family == Family.SUPERWEIGHT:
        checks += _superweight_checks(v, Q, 1)
    elif family == Family.SUPERWEIGHT_HIGHER_ORDER:
        checks.append(("k >= 1", v.k >= 1))
        checks += _superweight_checks(v, Q, max(v.k, 1))

    failed = [name for name, ok in checks if not ok]
    return AdmissibilityVerdict(family=family, admissible=not failed, failed_conditions=failed,
                                classical_ckn_status=status)


def make_instance(family: Family, params: InequalityParams, setting: HomogeneousSetting) -> InequalityInstance:
    verdict = validate(family, params, setting)
    if not verdict.admissible:
        raise InadmissibleError(Family(family).value, verdict.failed_conditions)
    return InequalityInstance(family=Family(family), params=params, setting=setting)


# -- constants --------------------------------------------------------------

def _check_branch(instance: InequalityInstance) -> None:
    v, Q = instance.params, instance.effective_setting.Q
    family = instance.family
    if family in CKN_FAMILIES:
        critical = _close(Q, v.p * (1 - v.a))
        if critical != (family == Family.EXTENDED_CKN_CRITICAL):
            raise BranchMismatchError(
                f"{family.value} used with Q={Q}, p(1-a)={v.p * (1 - v.a)}; "
                f"use {'ExtendedCKNCritical' if critical else 'ExtendedCKN'}"
            )
    elif family in (Family.EULER_HARDY, Family.EULER_HARDY_CRITICAL) and v.alpha is not None:
        critical = _close(v.alpha * v.p, Q)
        if critical != (family == Family.EULER_HARDY_CRITICAL):
            raise BranchMismatchError(
                f"{family.value} used with alpha*p={v.alpha * v.p}, Q={Q}; "
                f"use {'EulerHardyCritical' if critical else 'EulerHardy'}"
            )


def superweight_kappa(p: float, m: float, alpha: float, beta: float, Q: float, order: int = 1) -> float:
    """Product over j < order of ((Q - p [+ alpha beta]) / p - (m + j))."""
    shift = alpha * beta if alpha * beta < 0 else 0.0
    return math.prod((Q - p + shift) / p - (m + j) for j in range(order))


def remainder_kappa(p: float, alpha: float, Q: float) -> float:
    return (Q - p - alpha * p) / p


def sharp_constant(instance: InequalityInstance) -> SharpConstant:
    """Closed-form constant of the instance with the sharpness claim attached."""
    _check_branch(instance)
    v, Q = instance.params, instance.effective_setting.Q
    family = instance.family
    sharp = SharpnessClaim.SHARP
    not_claimed = SharpnessClaim.NOT_CLAIMED

    if family == Family.EXTENDED_CKN:
        value = abs(v.p / (Q - v.p * (1 - v.a))) ** v.delta
        endpoint = v.delta in (0.0, 1.0)
        if _close(v.p, v.q):
            claimed = _close(v.a - v.b, 1.0)
        else:
            claimed = not _close(v.p * (1 - v.a) + v.b * v.q, 0.0)
        return SharpConstant(value=value, claim=sharp if claimed or endpoint else not_claimed)
    if family == Family.EXTENDED_CKN_CRITICAL:
        return SharpConstant(value=v.p ** v.delta, claim=sharp if v.delta in (0.0, 1.0) else not_claimed)
    if family == Family.EULER_HARDY:
        return SharpConstant(value=abs(v.p / (Q - v.alpha * v.p)), claim=sharp)
    if family == Family.EULER_HARDY_CRITICAL:
        return SharpConstant(value=v.p, claim=sharp)
    if family == Family.ANISOTROPIC_CKN:
        return SharpConstant(value=abs(Q - (v.a + v.b + 1)) / v.p, claim=sharp)
    if family in (Family.REMAINDER_HARDY, Family.STABILITY_HARDY):
        return SharpConstant(value=remainder_kappa(v.p, v.alpha, Q) ** v.p, claim=not_claimed)
    if family == Family.CRITICAL_LOG_HARDY:
        return SharpConstant(value=v.p / (v.gamma - 1), claim=sharp)
    if family in (Family.UNCERTAINTY_A, Family.UNCERTAINTY_B):
        return SharpConstant(value=(v.gamma - 1) / v.p, claim=not_claimed)
    if family == Family.SUPERWEIGHT:
        value = superweight_kappa(v.p, v.m, v.alpha, v.beta, Q)
        return SharpConstant(value=value, claim=sharp if value != 0 else not_claimed)
    value = superweight_kappa(v.p, v.m, v.alpha, v.beta, Q, v.k)
    return SharpConstant(value=value, claim=not_claimed)


# -- Hardy-form view --------------------------------------------------------

@dataclass(frozen=True)
class HardyPair:
    """||w_D R^order f||_p >= kappa ||w_F f||_p in the instance's own setting."""

    derivative_weight: WeightSpec
    function_weight: WeightSpec
    order: int
    kappa: float
    p: float
    setting: HomogeneousSetting
    constant_on_left: bool
    interval: Optional[Tuple[float, float]] = None


def _superweight_spec(v: InequalityParams) -> Superweight:
    return Superweight(a=v.a, b=v.b, alpha=v.alpha, beta=v.beta)


def hardy_pair(instance: InequalityInstance) -> HardyPair:
    _check_branch(instance)
    v, setting = instance.params, instance.effective_setting
    Q = setting.Q
    family = instance.family
    K = sharp_constant(instance).value

    if family == Family.EULER_HARDY:
        return HardyPair(WeightSpec(power=1 - v.alpha), WeightSpec(power=-v.alpha), 1, 1 / K, v.p, setting, False)
    if family == Family.EULER_HARDY_CRITICAL or (family == Family.EXTENDED_CKN_CRITICAL and v.delta == 1.0):
        return HardyPair(WeightSpec(power=1 - Q / v.p, log_power=1), WeightSpec(power=-Q / v.p), 1,
                         1 / v.p, v.p, setting, False)
    if family == Family.EXTENDED_CKN and v.delta == 1.0:
        return HardyPair(WeightSpec(power=v.a), WeightSpec(power=v.a - 1), 1, 1 / K, v.p, setting, False)
    if family in (Family.REMAINDER_HARDY, Family.STABILITY_HARDY):
        return HardyPair(WeightSpec(power=-v.alpha), WeightSpec(power=-(v.alpha + 1)), 1,
                         remainder_kappa(v.p, v.alpha, Q), v.p, setting, False)
    if family == Family.CRITICAL_LOG_HARDY:
        return HardyPair(
            WeightSpec(power=(v.p - Q) / v.p, log_power=(v.p - v.gamma) / v.p, log_kind=LogKind.LOG_RATIO, log_radius=v.R),
            WeightSpec(power=-Q / v.p, log_power=-v.gamma / v.p, log_kind=LogKind.LOG_RATIO, log_radius=v.R),
            1, (v.gamma - 1) / v.p, v.p, setting, False, (0.0, v.R),
        )
    if family in SUPERWEIGHT_FAMILIES:
        order = v.k if family == Family.SUPERWEIGHT_HIGHER_ORDER else 1
        sw = _superweight_spec(v)
        return HardyPair(WeightSpec(power=-v.m, superweight=sw), WeightSpec(power=-(v.m + order), superweight=sw),
                         order, K, v.p, setting, True)
    raise BranchMismatchError(f"{family.value} with these parameters is not a Hardy-type inequality")


# -- evaluators -------------------------------------------------------------

def evaluate_sides(instance: InequalityInstance, f: pr.RadialProfile, tol: Optional[float] = None) -> VerificationReport:
    """Both sides of the instance's inequality for one profile."""
    _check_branch(instance)
    require_test_function(f)
    family = instance.family
    v = instance.params
    setting = instance.effective_setting

    if family == Family.REMAINDER_HARDY:
        return remainder_check(v.p, v.alpha, v.b, f, setting, tol)
    if family == Family.STABILITY_HARDY:
        grid = v.R_grid or default_radius_grid(f)
        return stability_check(f, v.alpha, v.p, grid, setting, tol)
    if family == Family.CRITICAL_LOG_HARDY:
        return _critical_log_hardy(f, v.p, v.gamma, v.R, setting, tol, family.value)
    if family in (Family.UNCERTAINTY_A, Family.UNCERTAINTY_B):
        return _uncertainty(family, v.p, v.q, v.gamma, v.R, f, setting, tol)

    K = sharp_constant(instance).value
    if family in CKN_FAMILIES:
        return _extended_ckn(instance, f, K, tol)
    if family in (Family.EULER_HARDY, Family.EULER_HARDY_CRITICAL):
        pair = hardy_pair(instance)
        small = _norm(f, pair.function_weight, v.p, setting, tol)
        derivative = _norm(f.derivative(), pair.derivative_weight, v.p, setting, tol)
        return compare(family.value, small.value, derivative.value, K, small, K * derivative)
    if family == Family.ANISOTROPIC_CKN:
        return _anisotropic_ckn(v, f, K, setting, tol)
    pair = hardy_pair(instance)
    lhs = _norm(f, pair.function_weight, v.p, setting, tol)
    rhs = _norm(f.derivative(pair.order), pair.derivative_weight, v.p, setting, tol)
    return compare(family.value, lhs.value, rhs.value, K, K * lhs, rhs)


def _extended_ckn(instance: InequalityInstance, f: pr.RadialProfile, K: float, tol: Optional[float]) -> VerificationReport:
    v, setting = instance.params, instance.effective_setting
    c = v.c if v.c is not None else v.delta * (v.a - 1) + v.b * (1 - v.delta)
    lhs = _norm(f, WeightSpec(power=c), v.r, setting, tol)
    if v.delta == 0.0:
        derivative = EXACT_ONE
    else:
        log_power = 1.0 if instance.family == Family.EXTENDED_CKN_CRITICAL else 0.0
        derivative = _norm(f.derivative(), WeightSpec(power=v.a, log_power=log_power), v.p, setting, tol)
    function = EXACT_ONE if v.delta == 1.0 else _norm(f, WeightSpec(power=v.b), v.q, setting, tol)
    rhs = (derivative ** v.delta) * (function ** (1 - v.delta))
    details = {"derivative_norm": derivative.value, "function_norm": function.value}
    return compare(instance.family.value, lhs.value, rhs.value, K, lhs, K * rhs, details)


def _anisotropic_ckn(v: InequalityParams, f: pr.RadialProfile, K: float, setting: HomogeneousSetting,
                     tol: Optional[float]) -> VerificationReport:
    p = v.p
    lhs = measured_integral(f, WeightSpec(power=-(v.a + v.b + 1) / p), p, setting, tol)
    derivative = _norm(f.derivative(), WeightSpec(power=-v.a), p, setting, tol)
    function = _norm(f, WeightSpec(power=-v.b / (p - 1)), p, setting, tol) ** (p - 1)
    rhs = derivative * function
    details = {"derivative_norm": derivative.value, "function_norm_power": function.value}
    return compare(Family.ANISOTROPIC_CKN.value, lhs.value, rhs.value, K, K * lhs, rhs, details)


def _log_weights(p: float, gamma: float, Q: float, R: float) -> Tuple[WeightSpec, WeightSpec]:
    difference = WeightSpec(power=-Q / p, log_power=-gamma / p, log_kind=LogKind.LOG_RATIO, log_radius=R)
    derivative = WeightSpec(power=-(Q - p) / p, log_power=-(gamma - p) / p, log_kind=LogKind.LOG_RATIO, log_radius=R)
    return difference, derivative


def _split_norm(f: pr.RadialProfile, weight: WeightSpec, p: float, setting: HomogeneousSetting, R: float,
                tol: Optional[float]) -> Tuple[Measured, Measured]:
    """p-th power integrals over B(0, R) and its complement."""
    lo, hi = f.support
    ball = measured_integral(f, weight, p, setting, tol, (lo, min(R, hi))) if lo < R else EXACT_ZERO
    outside = measured_integral(f, weight, p, setting, tol, (max(R, lo), hi)) if hi > R else EXACT_ZERO
    return ball, outside


def _log_hardy_sides(f: pr.RadialProfile, p: float, R: float, setting: HomogeneousSetting,
                     difference_weight: WeightSpec, derivative_weight: WeightSpec, K: float,
                     tol: Optional[float], family: str) -> VerificationReport:
    d = pr.difference_from_value(f, R)
    lhs_ball, lhs_out = _split_norm(d, difference_weight, p, setting, R, tol)
    rhs_ball, rhs_out = _split_norm(f.derivative(), derivative_weight, p, setting, R, tol)
    lhs = (lhs_ball + lhs_out).root(p)
    rhs = (rhs_ball + rhs_out).root(p)
    details = {
        "lhs_ball": lhs_ball.root(p).value,
        "lhs_exterior": lhs_out.root(p).value,
        "rhs_ball": rhs_ball.root(p).value,
        "rhs_exterior": rhs_out.root(p).value,
        "f_at_R": f(R),
    }
    return compare(family, lhs.value, rhs.value, K, lhs, K * rhs, details)


def _critical_log_hardy(f, p, gamma, R, setting, tol, family) -> VerificationReport:
    difference, derivative = _log_weights(p, gamma, setting.Q, R)
    return _log_hardy_sides(f, p, R, setting, difference, derivative, p / (gamma - 1), tol, family)


def critical_hardy_gamma_p_sides(f: pr.RadialProfile, p: float, R: float, setting: HomogeneousSetting,
                                 tol: Optional[float] = None) -> VerificationReport:
    """The gamma = p case written directly: ||(f - f_R)/(r^(Q/p) log(R/r))|| <= p/(p-1) ||r^((p-Q)/p) f'||.

    With the measure folded in the densities are |f - f(R)|^p / (r |log(R/r)|^p)
    and |f'|^p r^(p-1). Outside the support f - f(R) is the constant -f(R),
    so both tails are integrated in closed form.
    """
    require_test_function(f)
    epsabs, epsrel = (tol, tol) if tol else (settings.DEFAULT_ABS_TOL, settings.DEFAULT_REL_TOL)
    lo, hi = f.support
    slope = f.derivative()
    inside = lo < R < hi
    f_R = f(R) if inside else 0.0
    limit_at_R = -R * slope(R) if inside else 0.0

    def quotient(x: float) -> float:
        if abs(x - R) <= 1e-7 * R:
            return limit_at_R
        return (f(x) - f_R) / math.log(R / x)

    def lhs_density(x: float) -> float:
        return abs(quotient(x)) ** p / x

    def rhs_density(x: float) -> float:
        return abs(slope(x)) ** p * x ** (p - 1)

    cuts = sorted({lo, hi, *f.breaks, *([R] if inside else [])})
    lhs_parts = [_quad_measured(lhs_density, a, b, epsabs, epsrel) for a, b in zip(cuts, cuts[1:])]
    rhs_parts = [_quad_measured(rhs_density, a, b, epsabs, epsrel) for a, b in zip(cuts, cuts[1:])]
    if f_R != 0.0:
        tails = abs(f_R) ** p * (math.log(R / lo) ** (1 - p) + math.log(hi / R) ** (1 - p)) / (p - 1)
        lhs_parts.append(Measured(tails))
    sigma = setting.sigma
    lhs = (sigma * sum(lhs_parts[1:], lhs_parts[0])).root(p)
    rhs = (sigma * sum(rhs_parts[1:], rhs_parts[0])).root(p)
    K = p / (p - 1)
    return compare("CriticalLogHardy[gamma=p]", lhs.value, rhs.value, K, lhs, K * rhs, {"f_at_R": f_R})


def _quad_measured(density, a: float, b: float, epsabs: float, epsrel: float) -> Measured:
    out = quad(density, a, b, epsabs=epsabs, epsrel=epsrel, limit=settings.QUAD_PANEL_LIMIT, full_output=1)
    converged = len(out) == 3 and math.isfinite(out[0])
    return Measured(float(out[0]), float(out[1]), (float(out[1]),), converged)


# -- uncertainty principles -------------------------------------------------

def _uncertainty(family: Family, p: float, q: float, gamma: float, R: float, f: pr.RadialProfile,
                 setting: HomogeneousSetting, tol: Optional[float]) -> VerificationReport:
    Q = setting.Q
    K = (gamma - 1) / p
    d = pr.difference_from_value(f, R)
    _, derivative_weight = _log_weights(p, gamma, Q, R)
    derivative = _total_norm(f.derivative(), derivative_weight, p, setting, R, tol)
    if family == Family.UNCERTAINTY_A:
        product = f * d
        weight = WeightSpec(power=-Q / p, log_power=-gamma / p, log_kind=LogKind.LOG_RATIO, log_radius=R)
        lhs = _total_norm(product, weight, 2.0, setting, R, tol)
        partner = _norm(f, WeightSpec(), q, setting, tol)
    else:
        weight = WeightSpec(power=-Q / 2, log_power=-1.0, log_kind=LogKind.LOG_RATIO, log_radius=R)
        lhs = _total_norm(d, weight, 2.0, setting, R, tol) ** 2
        partner_weight = WeightSpec(power=-Q / q, log_power=-(2 - gamma / p), log_kind=LogKind.LOG_RATIO, log_radius=R)
        partner = _total_norm(d, partner_weight, q, setting, R, tol)
    rhs = derivative * partner
    details = {"derivative_norm": derivative.value, "partner_norm": partner.value}
    return compare(family.value, lhs.value, rhs.value, K, K * lhs, rhs, details)


def _total_norm(f, weight, p, setting, R, tol) -> Measured:
    ball, outside = _split_norm(f, weight, p, setting, R, tol)
    return (ball + outside).root(p)


def uncertainty_check(variant: str, p: float, q: float, gamma: float, R: float, f: pr.RadialProfile,
                      setting: HomogeneousSetting, tol: Optional[float] = None) -> VerificationReport:
    """Variant "A" pairs ||f||_q with 1/p + 1/q = 1/2; variant "B" takes q as the conjugate p'."""
    variant = variant.upper()
    if variant not in ("A", "B"):
        raise ValueError(f"uncertainty variant must be 'A' or 'B', got {variant!r}")
    family = Family.UNCERTAINTY_A if variant == "A" else Family.UNCERTAINTY_B
    instance = make_instance(family, InequalityParams(p=p, q=q, gamma=gamma, R=R), setting)
    return evaluate_sides(instance, f, tol)


# -- remainder and stability ------------------------------------------------

def remainder_quantities(p: float, alpha: float, b: float, setting: HomogeneousSetting) -> Tuple[float, float, float]:
    """(C_p, delta_1, delta_2) of the remainder estimate."""
    from sharpness import frs_constant

    Q = setting.Q
    if not (2 <= p < Q) or not alpha < (Q - p) / p:
        raise InadmissibleError(Family.REMAINDER_HARDY.value, [f"need 2 <= p < Q and alpha < (Q - p)/p, got p={p}, alpha={alpha}, Q={Q}"])
    base = Q - p - alpha * p
    delta_1 = base - (Q + p * b) / p
    delta_2 = base - b * p / (p - 1)
    numerator = Q * (p - 1) - p * b
    if _close(Q * (p - 1), p * b):
        return 0.0, delta_1, delta_2
    return frs_constant(p) * abs(numerator / p ** 2) ** p, delta_1, delta_2


def hardy_deficit(f: pr.RadialProfile, alpha: float, p: float, setting: HomogeneousSetting,
                   tol: Optional[float]) -> Tuple[Measured, Measured, Measured]:
    """J(f) together with its two integrals."""
    kappa = remainder_kappa(p, alpha, setting.Q)
    derivative = measured_integral(f.derivative(), WeightSpec(power=-alpha), p, setting, tol)
    function = measured_integral(f, WeightSpec(power=-(alpha + 1)), p, setting, tol)
    return derivative - kappa ** p * function, derivative, function


def remainder_check(p: float, alpha: float, b: float, f: pr.RadialProfile, setting: HomogeneousSetting,
                    tol: Optional[float] = None) -> VerificationReport:
    require_test_function(f)
    C_p, delta_1, delta_2 = remainder_quantities(p, alpha, b, setting)
    J, derivative, function = hardy_deficit(f, alpha, p, setting, tol)
    if C_p == 0.0 or f.is_zero:
        term = EXACT_ZERO
    else:
        top = measured_integral(f, WeightSpec(power=delta_1 / p), p, setting, tol)
        bottom = measured_integral(f, WeightSpec(power=delta_2 / p), p, setting, tol)
        term = EXACT_ZERO if bottom.value == 0.0 else C_p * (top ** p) * (bottom ** (1 - p))
    details = {"derivative_integral": derivative.value, "function_integral": function.value,
               "delta_1": delta_1, "delta_2": delta_2}
    return compare(Family.REMAINDER_HARDY.value, J.value, term.value, C_p, term, J, details)


def remainder_density(f: pr.RadialProfile, alpha: float, p: float, setting: HomogeneousSetting) -> pr.RadialProfile:
    """Pointwise integrand of J(f) (radial measure included)."""
    Q, P = pr.exact(setting.Q), pr.exact(p)
    a = pr.exact(alpha)
    kappa = (Q - P - a * P) / P
    df = f.derivative()
    first = df.map_pieces(lambda e: sp.Abs(e) ** P * pr.r ** (-a * P + Q - 1))
    second = f.map_pieces(lambda e: sp.Abs(e) ** P * pr.r ** (-(a + 1) * P + Q - 1))
    return first.map_pieces(sp.simplify) - second.map_pieces(lambda e: sp.simplify(kappa ** P * e))


def extremal_profile(alpha: float, p: float, setting: HomogeneousSetting) -> pr.RadialProfile:
    """f_alpha = r^-(Q - p - alpha p)/p on the whole half-line."""
    Q, P = pr.exact(setting.Q), pr.exact(p)
    return pr.power(-(Q - P - pr.exact(alpha) * P) / P)


def default_radius_grid(f: pr.RadialProfile, points: Optional[int] = None) -> Tuple[float, ...]:
    points = points or settings.STABILITY_GRID_POINTS
    lo, hi = f.support
    if f.is_zero or not (f.is_compact and f.avoids_origin):
        lo, hi = 1.0, 1.0
    edges = f.smoothness_breakpoints
    grid = []
    for x in np.geomspace(lo / 2, 2 * hi, points):
        near = [e for e in edges if abs(x - e) <= settings.GRID_EDGE_SNAP * e]
        grid.append(float(near[0]) if near else float(x))
    return tuple(grid)


def _stability_integral(f: pr.RadialProfile, g: pr.RadialProfile, R: float, alpha: float, p: float,
                        setting: HomogeneousSetting, tol: Optional[float]) -> Measured:
    diff = f - g
    if diff.is_zero:
        return EXACT_ZERO
    weight = WeightSpec(power=-(alpha + 1), log_power=-1.0, log_kind=LogKind.LOG_RATIO, log_radius=R)
    return measured_integral(diff, weight, p, setting, tol, diff.support)


def stability_distance(f: pr.RadialProfile, g: pr.RadialProfile, R: float, alpha: float, p: float,
                       setting: HomogeneousSetting, tol: Optional[float] = None) -> float:
    """d_R(f, g)."""
    if not R > 0:
        raise ValueError(f"R must be positive, got {R}")
    return _stability_integral(f, g, R, alpha, p, setting, tol).root(p).value


def stability_check(f: pr.RadialProfile, alpha: float, p: float, R_grid: Sequence[float],
                    setting: HomogeneousSetting, tol: Optional[float] = None) -> VerificationReport:
    """J(f) >= c_p ((p-1)/p)^p max over the grid of d_R(f, c_f(R) f_alpha)^p."""
    from sharpness import frs_constant

    require_test_function(f)
    Q = setting.Q
    if not (2 <= p < Q) or not alpha < (Q - p) / p:
        raise InadmissibleError(Family.STABILITY_HARDY.value, [f"need 2 <= p < Q and alpha < (Q - p)/p, got p={p}, alpha={alpha}"])
    if not R_grid or not all(R > 0 for R in R_grid):
        raise ValueError("R_grid must be a non-empty list of positive radii")
    kappa = remainder_kappa(p, alpha, Q)
    f_alpha = extremal_profile(alpha, p, setting)
    J, _, _ = hardy_deficit(f, alpha, p, setting, tol)

    worst, worst_R = EXACT_ZERO, float(R_grid[0])
    for R in R_grid:
        c = R ** kappa * f(R)
        g = f_alpha * c if c != 0.0 else pr.zero()
        distance = _stability_integral(f, g, R, alpha, p, setting, tol)
        if distance.value > worst.value:
            worst, worst_R = distance, float(R)
        elif not distance.converged:
            worst = Measured(worst.value, worst.error, worst.errors + distance.errors, False, worst.fragile)
    factor = frs_constant(p) * ((p - 1) / p) ** p
    term = factor * worst
    details = {"max_distance_p": worst.value, "argmax_R": worst_R, "grid_points": float(len(R_grid))}
    return compare(Family.STABILITY_HARDY.value, J.value, term.value, factor, term, J, details)


# -- identities and invariance ----------------------------------------------

def _relative(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    scale = np.maximum(np.abs(lhs), np.abs(rhs))
    return np.where(scale == 0, 0.0, np.abs(lhs - rhs) / np.where(scale == 0, 1.0, scale))


def holder_euler_residuals(C: float, p: float, alpha: float, radii: Iterable[float]) -> np.ndarray:
    """|1/C|^p (|Eg| / r^alpha)^p against (|g|^(p-1) / r^(alpha(p-1)))^(p/(p-1)) for g = r^-C."""
    x = np.asarray(list(radii), dtype=float)
    g = pr.power(-pr.exact(C))
    gv, ev = g.evaluate(x), g.euler().evaluate(x)
    lhs = abs(1 / C) ** p * (np.abs(ev) / x ** alpha) ** p
    rhs = (np.abs(gv) ** (p - 1) / x ** (alpha * (p - 1))) ** (p / (p - 1))
    return _relative(lhs, rhs)


def holder_log_residuals(C: float, p: float, Q: float, radii: Iterable[float]) -> np.ndarray:
    """Critical identity for h = (log r)^C with the |log r| factor on the Euler side."""
    x = np.asarray(list(radii), dtype=float)
    h = pr.log_power(C)
    hv, ev = h.evaluate(x), h.euler().evaluate(x)
    lhs = abs(1 / C) ** p * (np.abs(ev) * np.abs(np.log(x)) / x ** (Q / p)) ** p
    rhs = (np.abs(hv) ** (p - 1) / x ** (Q * (p - 1) / p)) ** (p / (p - 1))
    return _relative(lhs, rhs)


def mixed_holder_exponent(p: float, q: float, a: float, b: float) -> float:
    if p == q:
        raise ValueError("the mixed extremal power needs p != q")
    return (p * (1 - a) + b * q) / (p - q)


def holder_mixed_residuals(p: float, q: float, a: float, b: float, radii: Iterable[float]) -> np.ndarray:
    """|h|^p / r^(p(1-a)) against |h|^q / r^(-bq) for h = r^((p(1-a) + bq)/(p-q))."""
    x = np.asarray(list(radii), dtype=float)
    hv = pr.power(mixed_holder_exponent(p, q, a, b)).evaluate(x)
    lhs = np.abs(hv) ** p / x ** (p * (1 - a))
    rhs = np.abs(hv) ** q / x ** (-b * q)
    return _relative(lhs, rhs)


def holder_superweight_residuals(C: float, p: float, m: float, weight: Superweight, radii: Iterable[float]) -> np.ndarray:
    """Equality case of the superweight Hoelder step for g = r^C."""
    x = np.asarray(list(radii), dtype=float)
    g = pr.power(C)
    gv, dv = g.evaluate(x), g.derivative().evaluate(x)
    w = weight.a + weight.b * x ** weight.alpha
    lhs = abs(1 / C) ** p * (w ** (weight.beta / p) * np.abs(dv) / x ** m) ** p
    rhs = (w ** (weight.beta * (p - 1) / p) * np.abs(gv) ** (p - 1) / x ** ((m + 1) * (p - 1))) ** (p / (p - 1))
    return _relative(lhs, rhs)


def scaling_ratio_drift(instance: InequalityInstance, f: pr.RadialProfile,
                        lambdas: Sequence[float] = (1 / 3, 7.0), tol: Optional[float] = None) -> float:
    """Largest relative change of the verification ratio under f -> f(lambda r)."""
    base = evaluate_sides(instance, f, tol).ratio
    drift = 0.0
    for lam in lambdas:
        ratio = evaluate_sides(instance, f.dilate(lam), tol).ratio
        scale = max(abs(base), settings.EQUALITY_FLOOR)
        drift = max(drift, abs(ratio - base) / scale)
    return drift
