"""
Singularity-aware radial quadrature for the Hardy inequality laboratory

Integrals are split into panels at breakpoints. Smooth panels go to
QUADPACK (scipy.integrate.quad); panels touching an annotated endpoint
go to the tanh-sinh rule (scipy.integrate.tanhsinh); panels reaching
r = 0 or r = infinity are rewritten symbolically in t = log r first,
so log-type tails are integrated exactly rather than truncated.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy as sp
from scipy.integrate import quad, tanhsinh

import profiles as pr
from config import settings
from errors import EvaluationFault, NonIntegrableError, ProfileError
from models import HomogeneousSetting, IntegralResult, LogKind, SingularityAnnotation, WeightSpec

logger = logging.getLogger(__name__)

t = sp.Symbol("t", real=True)

_EPS = np.finfo(float).eps
_OVERFLOW_T = 700.0


@dataclass
class _Panel:
    value: float
    error: float
    subdivisions: int
    ok: bool


def _failed_panel(a: float, b: float, reason: str) -> _Panel:
    logger.warning(f"panel [{a}, {b}] abandoned: {reason}")
    return _Panel(0.0, math.inf, 0, False)


class _BudgetExhausted(Exception):
    pass


class _Budget:
    """Counts integrand evaluations of one panel."""

    def __init__(self, limit: Optional[int] = None):
        self.limit = limit or settings.PANEL_EVALUATION_BUDGET
        self.used = 0

    def spend(self, n: int) -> None:
        self.used += n
        if self.used > self.limit:
            raise _BudgetExhausted(f"more than {self.limit} integrand evaluations")


def _tolerances(tol: Optional[float]) -> Tuple[float, float]:
    if tol is None:
        return settings.DEFAULT_ABS_TOL, settings.DEFAULT_REL_TOL
    if not tol > 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    return tol, tol


def _as_profile(integrand) -> pr.RadialProfile:
    if isinstance(integrand, pr.RadialProfile):
        return integrand
    return pr.from_expr(sp.sympify(integrand))


def _collapse(x: float) -> float:
    """Distance from x inside which a non-finite value counts as the endpoint's."""
    return 8 * _EPS * max(1.0, abs(x))


# -- panel rules ------------------------------------------------------------

def _scalar(fn: Callable, x: float) -> float:
    with np.errstate(all="ignore"):
        value = float(np.real(fn(np.float64(x))))
    if not math.isfinite(value):
        raise EvaluationFault(x, "inside a smooth quadrature panel")
    return value


def _quad_panel(expr: sp.Expr, a: float, b: float, epsabs: float, epsrel: float) -> _Panel:
    fn = pr.compile_expr(expr)
    budget = _Budget()
    if b / a > 10.0:
        def integrand(s):
            budget.spend(1)
            x = math.exp(s)
            return _scalar(fn, x) * x
        lo, hi = math.log(a), math.log(b)
    else:
        def integrand(x):
            budget.spend(1)
            return _scalar(fn, x)
        lo, hi = a, b
    try:
        out = quad(integrand, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=settings.QUAD_PANEL_LIMIT, full_output=1)
    except _BudgetExhausted as e:
        return _failed_panel(a, b, str(e))
    ok = len(out) == 3
    if not ok:
        logger.warning(f"QUADPACK did not converge on [{a}, {b}]: {out[3]}")
    value, error = float(out[0]), float(out[1])
    if not (math.isfinite(value) and math.isfinite(error)):
        return _failed_panel(a, b, f"non-finite result {value!r} +- {error!r}")
    return _Panel(value, error, int(out[2]["last"]), ok)


def _vectorised(fn: Callable, tolerated: Callable[[np.ndarray], np.ndarray], to_radius: Callable,
                budget: _Budget) -> Callable:
    """Array integrand; non-finite values are allowed only where `tolerated` says so."""
    def wrapped(x):
        x = np.asarray(x, dtype=float)
        budget.spend(x.size)
        with np.errstate(all="ignore"):
            values = np.asarray(fn(x))
        if np.iscomplexobj(values):
            values = np.where(values.imag == 0, values.real, np.nan)
        values = np.broadcast_to(np.asarray(values, dtype=float), x.shape).copy()
        bad = ~np.isfinite(values)
        if bad.any():
            allowed = tolerated(x)
            if (bad & ~allowed).any():
                culprit = x[bad & ~allowed].flat[0]
                raise EvaluationFault(float(to_radius(culprit)), "inside a tanh-sinh panel")
            values[bad] = 0.0
        return values
    return wrapped


def _tanhsinh(fn: Callable, a: float, b: float, epsabs: float, epsrel: float) -> _Panel:
    try:
        res = tanhsinh(fn, a, b, atol=epsabs, rtol=epsrel, maxlevel=settings.TANHSINH_MAX_LEVEL)
    except _BudgetExhausted as e:
        return _failed_panel(a, b, str(e))
    ok = bool(np.all(res.success))
    value, error = float(res.integral), float(res.error)
    if not math.isfinite(value):
        return _failed_panel(a, b, f"tanh-sinh returned {value!r}")
    if not ok:
        logger.warning(f"tanh-sinh did not converge on [{a}, {b}] (status {int(res.status)})")
    if not math.isfinite(error):
        error, ok = abs(value), False
    return _Panel(value, error, int(res.maxlevel), ok)


def _tail_does_not_decay(fn: Callable, start: float, direction: float) -> bool:
    """True when |g| fails to decrease along t = start + direction * (40, 80, 160)."""
    points = start + direction * np.array([40.0, 80.0, 160.0])
    with np.errstate(all="ignore"):
        values = np.asarray(fn(points))
    values = np.abs(np.broadcast_to(values, points.shape))
    if not np.all(np.isfinite(values)):
        return True
    return bool(values[2] > 0 and values[0] <= values[1] <= values[2])


def _log_panel(expr: sp.Expr, a: float, b: float, epsabs: float, epsrel: float) -> _Panel:
    """Panel with a = 0 or b = inf, integrated in t = log r."""
    substituted = pr.snap_exponents(sp.expand_log(expr.subs(pr.r, sp.exp(t)) * sp.exp(t), force=True))
    fn = pr.compile_expr(substituted, t)
    lo = -math.inf if a == 0 else math.log(a)
    hi = math.inf if math.isinf(b) else math.log(b)
    for start, direction, end in ((hi, 1.0, lo), (lo, -1.0, hi)):
        if math.isinf(end) and math.isfinite(start) and _tail_does_not_decay(fn, start, direction):
            return _failed_panel(a, b, "integrand does not decay towards the unbounded end")
    finite_end = hi if math.isfinite(hi) else lo

    def tolerated(s):
        return (np.abs(s) > _OVERFLOW_T) | (np.abs(s - finite_end) <= _collapse(finite_end))

    wrapped = _vectorised(fn, tolerated, np.exp, _Budget())
    return _tanhsinh(wrapped, lo, hi, epsabs, epsrel)


def _endpoint_panel(expr: sp.Expr, a: float, b: float, annotation: SingularityAnnotation,
                    epsabs: float, epsrel: float) -> _Panel:
    """Panel with an algebraic singularity at one end."""
    fn = pr.compile_expr(expr)
    r0 = annotation.location

    # the other end may be a support edge where the piece only vanishes as a limit
    def tolerated(x):
        return (np.abs(x - a) <= _collapse(a)) | (np.abs(x - b) <= _collapse(b))

    wrapped = _vectorised(fn, tolerated, lambda x: x, _Budget())
    panel = _tanhsinh(wrapped, a, b, epsabs, epsrel)
    if not panel.ok and math.isinf(panel.error):
        return panel
    # mass of the unresolved sliver next to r0
    lam = annotation.algebraic_exponent
    offset = 64 * _collapse(r0)
    inward = r0 + offset if r0 == a else r0 - offset
    with np.errstate(all="ignore"):
        edge = abs(float(np.real(fn(np.float64(inward)))))
    if math.isfinite(edge):
        panel.error += edge * offset / (lam + 1.0)
    return panel


# -- integrate --------------------------------------------------------------

def check_annotation(annotation: SingularityAnnotation) -> bool:
    """Reject non-integrable exponents; return True when near-critical."""
    lam, mu = annotation.algebraic_exponent, annotation.log_exponent
    # r^-1 |log|^mu still converges when mu < -1
    if lam < -1.0 or (lam == -1.0 and mu >= -1.0):
        raise NonIntegrableError(annotation.location, lam)
    return lam <= -1.0 + settings.FRAGILE_MARGIN


def integrate(integrand, interval: Tuple[float, float], annotations: Sequence[SingularityAnnotation] = (),
              tol: Optional[float] = None, points: Iterable[float] = ()) -> IntegralResult:
    """Integral of a profile-expression over [lo, hi] (hi may be infinite)."""
    profile = _as_profile(integrand)
    lo, hi = float(interval[0]), float(interval[1])
    if not (0.0 <= lo < hi) or math.isnan(hi):
        raise ValueError(f"need 0 <= lo < hi, got [{lo}, {hi}]")
    abs_tol, rel_tol = _tolerances(tol)
    if _is_sliver(lo, hi):
        return IntegralResult(value=0.0, abs_error_estimate=0.0)

    fragile = False
    by_location = {}
    for annotation in annotations:
        if annotation.location not in (lo, hi):
            raise ValueError(f"annotations must sit on an endpoint of [{lo}, {hi}], got r={annotation.location}")
        fragile = check_annotation(annotation) or fragile
        by_location[annotation.location] = annotation

    cuts = {lo, hi}
    cuts.update(x for x in profile.breaks if lo < x < hi)
    cuts.update(x for x in profile.support if lo < x < hi)
    cuts.update(float(x) for x in points if lo < x < hi)
    edges, by_location = _merge_slivers(sorted(cuts), by_location)
    edges = _separate_special_ends(edges, by_location)

    spans = []
    for a, b in zip(edges, edges[1:]):
        piece = profile.piece_at(_midpoint(a, b))
        if piece != 0:
            spans.append((a, b, piece))
    if not spans:
        return IntegralResult(value=0.0, abs_error_estimate=0.0, subdivisions=0, converged=True, fragile=fragile, panels=0)

    epsabs, epsrel = abs_tol / (2 * len(spans)), rel_tol / 2
    results: List[_Panel] = []
    for a, b, piece in spans:
        if a == 0.0 or math.isinf(b):
            results.append(_log_panel(piece, a, b, epsabs, epsrel))
        elif a in by_location:
            results.append(_endpoint_panel(piece, a, b, by_location[a], epsabs, epsrel))
        elif b in by_location:
            results.append(_endpoint_panel(piece, a, b, by_location[b], epsabs, epsrel))
        else:
            results.append(_quad_panel(piece, a, b, epsabs, epsrel))

    value = math.fsum(p.value for p in results)
    error = math.fsum(p.error for p in results)
    subdivisions = sum(p.subdivisions for p in results)
    converged = all(p.ok for p in results) and error <= max(abs_tol, rel_tol * abs(value))
    if subdivisions > settings.MAX_SUBDIVISIONS:
        converged = False
    if not converged:
        logger.warning(f"integral on [{lo}, {hi}] missed tolerance: value={value!r}, error={error!r}")
    if fragile:
        logger.warning(f"integral on [{lo}, {hi}] has a near-critical endpoint exponent; result is fragile")
    return IntegralResult(value=value, abs_error_estimate=error, subdivisions=subdivisions,
                          converged=converged, fragile=fragile, panels=len(results))


def _midpoint(a: float, b: float) -> float:
    if math.isinf(b):
        return 2 * a + 1.0
    return 0.5 * (a + b)


def _is_sliver(a: float, b: float) -> bool:
    return math.isfinite(b) and b - a <= settings.SLIVER_ULPS * _EPS * b


def _merge_slivers(edges: List[float], annotated: dict) -> Tuple[List[float], dict]:
    """Drop cuts a few ulps from their left neighbour; annotations follow the surviving cut."""
    annotated = dict(annotated)
    kept = [edges[0]]
    for x in edges[1:]:
        if not _is_sliver(kept[-1], x):
            kept.append(x)
            continue
        if x == edges[-1]:
            dropped, kept[-1] = kept[-1], x
            survivor = x
        else:
            dropped, survivor = x, kept[-1]
        moved = annotated.pop(dropped, None)
        if moved is not None and survivor not in annotated:
            annotated[survivor] = moved.model_copy(update={"location": survivor})
    return kept, annotated


def _separate_special_ends(edges: List[float], annotated: dict) -> List[float]:
    """Split panels whose two ends both need special treatment."""
    out = [edges[0]]
    for a, b in zip(edges, edges[1:]):
        special_a = a == 0.0 or a in annotated
        special_b = math.isinf(b) or b in annotated
        if special_a and special_b:
            out.append(2 * a + 1.0 if math.isinf(b) else 0.5 * (a + b))
        out.append(b)
    return out


# -- weighted norms ---------------------------------------------------------

def weight_expression(weight: WeightSpec, p: float) -> sp.Expr:
    """Symbolic w(r)^p."""
    P = pr.exact(p)
    factor = pr.r ** (pr.exact(weight.power) * P)
    if weight.log_power != 0:
        if weight.log_kind == LogKind.ABS_LOG:
            base = sp.log(pr.r)
        else:
            base = sp.log(pr.exact(weight.log_radius)) - sp.log(pr.r)
        factor *= sp.Abs(base) ** (pr.exact(weight.log_power) * P)
    if weight.superweight is not None:
        sw = weight.superweight
        factor *= (pr.exact(sw.a) + pr.exact(sw.b) * pr.r ** pr.exact(sw.alpha)) ** pr.exact(sw.beta)
    return factor


def integrand_profile(f: pr.RadialProfile, weight: WeightSpec, p: float, setting: HomogeneousSetting) -> pr.RadialProfile:
    """w^p |f|^p r^(Q-1) as a profile."""
    P = pr.exact(p)
    factor = weight_expression(weight, p) * pr.r ** (pr.exact(setting.Q) - 1)
    return f.map_pieces(lambda piece: pr.snap_exponents(sp.Abs(piece) ** P * factor) if piece != 0 else sp.S.Zero)


def weighted_integral(f: pr.RadialProfile, weight: WeightSpec, p: float, setting: HomogeneousSetting,
                      tol: Optional[float] = None, interval: Optional[Tuple[float, float]] = None) -> IntegralResult:
    """sigma * integral of w^p |f|^p r^(Q-1) dr with singular radii handled."""
    if not p > 0:
        raise ValueError(f"exponent must be positive, got {p}")
    if f.is_zero:
        return IntegralResult(value=0.0, abs_error_estimate=0.0)
    if interval is None:
        if not f.is_compact:
            raise ProfileError("non-compact profile needs an explicit integration interval")
        lo, hi = f.support
    else:
        lo, hi = max(float(interval[0]), f.support[0]), min(float(interval[1]), f.support[1])
    if f.is_zero or not lo < hi:
        return IntegralResult(value=0.0, abs_error_estimate=0.0)

    integrand = integrand_profile(f, weight, p, setting)
    singular = sorted(x for x in weight.singular_radii() if lo <= x <= hi)
    edges = sorted({lo, hi, *singular})
    total, error, subdivisions, converged, fragile, panels = 0.0, 0.0, 0, True, False, 0
    for a, b in zip(edges, edges[1:]):
        annotations = []
        for end in (a, b):
            if end in singular:
                annotation = _annotate(f, weight, p, end)
                if annotation is not None:
                    annotations.append(annotation)
        part = integrate(integrand, (a, b), annotations, tol)
        total += part.value
        error += part.abs_error_estimate
        subdivisions += part.subdivisions
        converged = converged and part.converged
        fragile = fragile or part.fragile
        panels += part.panels
    sigma = setting.sigma
    return IntegralResult(value=sigma * total, abs_error_estimate=sigma * error, subdivisions=subdivisions,
                          converged=converged, fragile=fragile, panels=panels)


def _annotate(f: pr.RadialProfile, weight: WeightSpec, p: float, location: float) -> Optional[SingularityAnnotation]:
    """Endpoint exponent from the weight's blow-up and the zero of f there."""
    order = f.vanishing_order(location)
    if order is None:
        return None
    lam = pr.snap(p * (order + weight.log_power))
    if lam <= -1.0:
        raise NonIntegrableError(
            location, lam,
            f"profile vanishes to order {order} against |log|^{weight.log_power} with p={p}",
        )
    return SingularityAnnotation(location=location, algebraic_exponent=lam)


def lp_radial_norm(f: pr.RadialProfile, weight: WeightSpec, p: float, setting: HomogeneousSetting,
                   tol: Optional[float] = None, interval: Optional[Tuple[float, float]] = None) -> float:
    """(sigma * integral of w^p |f|^p r^(Q-1) dr)^(1/p)."""
    result = weighted_integral(f, weight, p, setting, tol, interval)
    return max(result.value, 0.0) ** (1.0 / p)
