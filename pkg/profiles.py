"""
Radial profiles for the Hardy inequality laboratory

A profile is a piecewise sympy expression in the radius r together with
its support. Derivatives, the Euler operator, dilations and compositions
are carried out symbolically; numeric evaluation goes through cached
numpy lambdas.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy as sp
from scipy.optimize import brentq

from config import settings
from errors import EvaluationFault, ProfileError

logger = logging.getLogger(__name__)

r = sp.Symbol("r", positive=True)
INF = math.inf

Number = Union[int, float, sp.Expr]


def exact(value: Number) -> sp.Expr:
    """Exact sympy number for a parameter; floats go through their shortest repr."""
    if isinstance(value, sp.Basic):
        return value
    if isinstance(value, (bool, np.bool_)):
        raise ProfileError(f"expected a number, got {value!r}")
    if isinstance(value, (int, np.integer)):
        return sp.Integer(int(value))
    value = float(value)
    if not math.isfinite(value):
        raise ProfileError(f"parameters must be finite, got {value!r}")
    return sp.Rational(repr(value))


def snap(value: float) -> float:
    """value, or the integer it sits within EXPONENT_SNAP of."""
    nearest = round(value)
    if abs(value - nearest) <= settings.EXPONENT_SNAP * max(1.0, abs(value)):
        return float(nearest)
    return value


def _nearest_integer(x: sp.Rational) -> sp.Integer:
    return sp.floor(x + sp.Rational(1, 2))


def _near_integer_power(e: sp.Basic) -> bool:
    if not (e.is_Pow and e.exp.is_Rational) or e.exp.is_Integer:
        return False
    return float(abs(e.exp - _nearest_integer(e.exp))) <= settings.EXPONENT_SNAP


def snap_exponents(expr: sp.Expr) -> sp.Expr:
    """Replace rational exponents that equal an integer up to float round-off."""
    return expr.replace(_near_integer_power, lambda e: sp.Pow(e.base, _nearest_integer(e.exp)))


@lru_cache(maxsize=4096)
def compile_expr(expr: sp.Expr, symbol: sp.Symbol = r) -> Callable:
    """numpy callable for a one-variable expression."""
    return sp.lambdify(symbol, expr, modules="numpy")


def eval_expr(expr: sp.Expr, x: np.ndarray, symbol: sp.Symbol = r) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        values = compile_expr(expr, symbol)(x)
    values = np.asarray(values)
    if np.iscomplexobj(values):
        values = np.where(np.abs(values.imag) == 0, values.real, np.nan)
    values = np.asarray(values, dtype=float)
    if values.shape != x.shape:
        values = np.broadcast_to(values, x.shape).copy()
    return values


def smooth_step(u: sp.Expr) -> sp.Expr:
    """C-infinity step, 0 for u <= 0 and 1 for u >= 1."""
    return sp.exp(-1 / u) / (sp.exp(-1 / u) + sp.exp(-1 / (1 - u)))


@dataclass(frozen=True)
class RadialProfile:
    """Piecewise symbolic radial function.

    pieces[i] is valid between breaks[i-1] and breaks[i] (support ends
    close the first and last piece). A radius equal to a breakpoint
    belongs to the piece on its right.
    """

    pieces: Tuple[sp.Expr, ...]
    breaks: Tuple[float, ...] = ()
    support: Tuple[float, float] = (0.0, INF)
    distributional_edges: Tuple[float, ...] = ()

    def __post_init__(self):
        pieces = tuple(sp.sympify(piece) for piece in self.pieces)
        breaks = tuple(float(b) for b in self.breaks)
        lo, hi = (float(self.support[0]), float(self.support[1]))
        if len(pieces) != len(breaks) + 1:
            raise ProfileError(f"{len(pieces)} pieces need {len(pieces) - 1} breakpoints, got {len(breaks)}")
        if not (0.0 <= lo <= hi) or math.isnan(hi):
            raise ProfileError(f"invalid support [{lo}, {hi}]")
        if any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])):
            raise ProfileError(f"breakpoints must increase strictly: {breaks}")
        if breaks and not (lo < breaks[0] and breaks[-1] < hi):
            raise ProfileError(f"breakpoints {breaks} must lie inside the support [{lo}, {hi}]")
        for piece in pieces:
            stray = piece.free_symbols - {r}
            if stray:
                raise ProfileError(f"profile pieces may only depend on r, found {sorted(map(str, stray))}")
        object.__setattr__(self, "pieces", pieces)
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "support", (lo, hi))
        object.__setattr__(self, "distributional_edges", tuple(float(e) for e in self.distributional_edges))

    # -- metadata ---------------------------------------------------------

    @property
    def is_compact(self) -> bool:
        return math.isfinite(self.support[1])

    @property
    def avoids_origin(self) -> bool:
        return self.support[0] > 0

    @property
    def is_whole_line(self) -> bool:
        return self.support[0] == 0 and not self.is_compact

    @property
    def is_zero(self) -> bool:
        return all(piece == 0 for piece in self.pieces)

    @property
    def smoothness_breakpoints(self) -> Tuple[float, ...]:
        lo, hi = self.support
        ends = tuple(x for x in (lo,) if x > 0) + self.breaks + tuple(x for x in (hi,) if math.isfinite(x))
        return tuple(sorted(set(ends)))

    def intervals(self) -> List[Tuple[float, float, sp.Expr]]:
        """(left, right, piece) triples covering the support."""
        edges = (self.support[0],) + self.breaks + (self.support[1],)
        return [(edges[i], edges[i + 1], piece) for i, piece in enumerate(self.pieces)]

    def piece_at(self, x: float) -> sp.Expr:
        """Piece in force at x (zero outside the support)."""
        lo, hi = self.support
        if x < lo or x > hi:
            return sp.S.Zero
        return self.pieces[int(np.searchsorted(self.breaks, x, side="right"))]

    # -- evaluation -------------------------------------------------------

    def evaluate(self, radii) -> np.ndarray:
        x = np.atleast_1d(np.asarray(radii, dtype=float))
        out = np.zeros_like(x)
        lo, hi = self.support
        inside = (x > 0) & (x >= lo) & (x <= hi)
        index = np.searchsorted(self.breaks, x, side="right")
        for i, piece in enumerate(self.pieces):
            mask = inside & (index == i)
            if mask.any() and piece != 0:
                out[mask] = eval_expr(piece, x[mask])
        bad = np.flatnonzero(~np.isfinite(out))
        for j in bad:
            out[j] = self._one_sided(float(x[j]), int(index[j]))
        return out

    def _one_sided(self, x: float, index: int) -> float:
        """Fallback value at a declared breakpoint or support end."""
        lo, hi = self.support
        candidates = []
        if x in self.breaks:
            candidates = [
                (self.pieces[index - 1], x),
                (self.pieces[index - 1], np.nextafter(x, -INF)),
                (self.pieces[index], np.nextafter(x, INF)),
            ]
        elif x == lo:
            candidates = [(self.pieces[0], np.nextafter(x, INF))]
        elif x == hi:
            candidates = [(self.pieces[-1], np.nextafter(x, -INF))]
        for piece, at in candidates:
            value = float(eval_expr(piece, np.array([at]))[0])
            if math.isfinite(value):
                return value
        raise EvaluationFault(x, "undeclared singular radius")

    def __call__(self, radius: float) -> float:
        return float(self.evaluate(radius)[0])

    # -- calculus ---------------------------------------------------------

    def derivative(self, order: int = 1) -> "RadialProfile":
        if order < 1:
            raise ProfileError(f"derivative order must be >= 1, got {order}")
        edges = self._distributional_edges(order)
        if edges:
            logger.warning(f"derivative of order {order} has distributional parts at r={list(edges)}; values there are one-sided")
        pieces = tuple(sp.diff(piece, r, order) for piece in self.pieces)
        return RadialProfile(pieces, self.breaks, self.support, edges)

    def _distributional_edges(self, order: int) -> Tuple[float, ...]:
        """Breakpoints where a derivative below `order` jumps."""
        edges = []
        lo, hi = self.support
        junctions = [(b, self.pieces[i], self.pieces[i + 1]) for i, b in enumerate(self.breaks)]
        if lo > 0:
            junctions.insert(0, (lo, sp.S.Zero, self.pieces[0]))
        if math.isfinite(hi):
            junctions.append((hi, self.pieces[-1], sp.S.Zero))
        for b, left, right in junctions:
            for j in range(order):
                lv = _side_value(sp.diff(left, r, j), b, -1)
                rv = _side_value(sp.diff(right, r, j), b, +1)
                if not (math.isfinite(lv) and math.isfinite(rv)):
                    edges.append(b)
                    break
                if abs(lv - rv) > 1e-9 * (1.0 + abs(lv) + abs(rv)):
                    edges.append(b)
                    break
        return tuple(edges)

    def times_radius(self) -> "RadialProfile":
        return self.map_pieces(lambda piece: r * piece)

    def euler(self) -> "RadialProfile":
        """r f'(r)."""
        return self.derivative(1).times_radius()

    # -- algebra ----------------------------------------------------------

    def map_pieces(self, fn: Callable[[sp.Expr], sp.Expr]) -> "RadialProfile":
        return RadialProfile(tuple(fn(piece) for piece in self.pieces), self.breaks, self.support, self.distributional_edges)

    def _combine(self, other: "RadialProfile", op: Callable, support: Tuple[float, float]) -> "RadialProfile":
        lo, hi = support
        if hi < lo:
            return zero()
        cuts = set(self.breaks) | set(other.breaks)
        for edge in self.support + other.support:
            cuts.add(edge)
        cuts = sorted(x for x in cuts if lo < x < hi)
        edges = [lo] + cuts + [hi]
        pieces = []
        for left, right in zip(edges, edges[1:]):
            mid = _midpoint(left, right)
            pieces.append(op(self.piece_at(mid), other.piece_at(mid)))
        return RadialProfile(tuple(pieces), tuple(cuts), (lo, hi)).trim()

    def __add__(self, other):
        if not isinstance(other, RadialProfile):
            other = constant(other)
        support = (min(self.support[0], other.support[0]), max(self.support[1], other.support[1]))
        return self._combine(other, lambda a, b: a + b, support)

    __radd__ = __add__

    def __neg__(self):
        return self.map_pieces(lambda piece: -piece)

    def __sub__(self, other):
        if not isinstance(other, RadialProfile):
            other = constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, RadialProfile):
            factor = exact(other)
            return self.map_pieces(lambda piece: factor * piece)
        support = (max(self.support[0], other.support[0]), min(self.support[1], other.support[1]))
        return self._combine(other, lambda a, b: a * b, support)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, RadialProfile):
            raise ProfileError("division is only defined by scalars; divide expressions inside a piece instead")
        divisor = exact(other)
        if divisor == 0:
            raise ProfileError("division by zero")
        return self.map_pieces(lambda piece: piece / divisor)

    def __pow__(self, exponent):
        power = exact(exponent)
        return self.map_pieces(lambda piece: piece ** power)

    def trim(self) -> "RadialProfile":
        """Drop leading and trailing zero pieces, tightening the support."""
        spans = self.intervals()
        first = 0
        while first < len(spans) - 1 and spans[first][2] == 0:
            first += 1
        last = len(spans) - 1
        while last > first and spans[last][2] == 0:
            last -= 1
        if first == 0 and last == len(spans) - 1:
            return self
        kept = spans[first:last + 1]
        support = (kept[0][0], kept[-1][1])
        breaks = tuple(span[1] for span in kept[:-1])
        return RadialProfile(tuple(span[2] for span in kept), breaks, support)

    def restrict(self, lo: float, hi: float) -> "RadialProfile":
        lo, hi = max(lo, self.support[0]), min(hi, self.support[1])
        if hi < lo:
            return zero()
        window = RadialProfile((sp.S.One,), (), (lo, hi))
        return self * window

    def compose(self, inner: sp.Expr, inverse: Callable[[float], float]) -> "RadialProfile":
        """r -> self(inner(r)) for an increasing inner map with known inverse."""
        lo, hi = self.support
        new_lo = inverse(lo) if lo > 0 else 0.0
        new_hi = inverse(hi) if math.isfinite(hi) else INF
        pieces = tuple(piece.subs(r, inner) for piece in self.pieces)
        breaks = tuple(inverse(b) for b in self.breaks)
        return RadialProfile(pieces, breaks, (new_lo, new_hi))

    def dilate(self, factor: float) -> "RadialProfile":
        """r -> self(factor * r); support and breakpoints are divided by factor."""
        lam = exact(factor)
        if lam <= 0:
            raise ProfileError(f"dilation factor must be positive, got {factor}")
        return self.compose(lam * r, lambda s: s / float(factor))

    # -- local structure --------------------------------------------------

    def pieces_around(self, x: float) -> List[Tuple[sp.Expr, int]]:
        """Pieces touching x, with the side (-1 left, +1 right) they are read from."""
        lo, hi = self.support
        if x < lo or x > hi:
            return []
        if x in self.breaks:
            i = self.breaks.index(x)
            return [(self.pieces[i], -1), (self.pieces[i + 1], +1)]
        if x == lo and x == hi:
            return [(self.pieces[0], 0)]
        if x == lo:
            return [(self.pieces[0], +1)]
        if x == hi:
            return [(self.pieces[-1], -1)]
        return [(self.piece_at(x), 0)]

    def vanishing_order(self, x: float, max_order: int = 4) -> Optional[int]:
        """Order of the zero of the profile at x; None if it vanishes identically near x."""
        around = self.pieces_around(x)
        if all(piece == 0 for piece, _ in around):
            return None
        scale = self.magnitude()
        for j in range(max_order + 1):
            threshold = 1e-12 * scale / max(x, 1e-300) ** j
            values = [_side_value(sp.diff(piece, r, j), x, side) for piece, side in around]
            if any(not math.isfinite(v) or abs(v) > threshold for v in values):
                return j
        return max_order + 1

    def magnitude(self, samples: int = 64) -> float:
        """Rough sup of |f| over the support (at least 1e-300)."""
        lo, hi = self.support
        if not self.is_compact:
            hi = max(2 * lo, 10.0)
        lo = lo if lo > 0 else hi * 1e-3
        grid = np.geomspace(lo, hi, samples)
        with np.errstate(all="ignore"):
            try:
                values = np.abs(self.evaluate(grid))
            except EvaluationFault:
                return 1.0
        values = values[np.isfinite(values)]
        return float(max(values.max() if values.size else 0.0, 1e-300))

    def __repr__(self) -> str:
        from grammar import print_profile
        return f"RadialProfile({print_profile(self)})"


def _midpoint(left: float, right: float) -> float:
    if math.isinf(right):
        return 2 * left + 1.0
    if left == 0:
        return right / 2
    return 0.5 * (left + right)


def _side_value(expr: sp.Expr, x: float, side: int) -> float:
    """Value of expr at x, falling back to the one-sided limit point next to x."""
    value = float(eval_expr(expr, np.array([x]))[0])
    if math.isfinite(value) or side == 0:
        return value
    at = np.nextafter(x, INF if side > 0 else -INF)
    return float(eval_expr(expr, np.array([at]))[0])


# -- constructors -----------------------------------------------------------

def zero() -> RadialProfile:
    return RadialProfile((sp.S.Zero,), (), (0.0, INF))


def from_expr(expr, support: Tuple[float, float] = (0.0, INF)) -> RadialProfile:
    return RadialProfile((sp.sympify(expr),), (), support)


def constant(value: Number, support: Tuple[float, float] = (0.0, INF)) -> RadialProfile:
    return from_expr(exact(value), support)


def power(exponent: Number, support: Tuple[float, float] = (0.0, INF)) -> RadialProfile:
    return from_expr(r ** exact(exponent), support)


def log_power(exponent: Number, support: Tuple[float, float] = (1.0, INF)) -> RadialProfile:
    """(log r)^C, real for r >= 1."""
    return from_expr(sp.log(r) ** exact(exponent), support)


def log_ratio_power(radius: Number, exponent: Number, support: Optional[Tuple[float, float]] = None) -> RadialProfile:
    """(log(R/r))^C, real for r <= R."""
    R = exact(radius)
    return from_expr((sp.log(R) - sp.log(r)) ** exact(exponent), support or (0.0, float(radius)))


def bump(r0: Number, r1: Number, height: Number = 1) -> RadialProfile:
    """C-infinity bump on [r0, r1] with peak `height` at the midpoint."""
    lo, hi = exact(r0), exact(r1)
    if not 0 < lo < hi:
        raise ProfileError(f"bump needs 0 < r0 < r1, got [{r0}, {r1}]")
    u = (r - lo) / (hi - lo)
    return from_expr(exact(height) * sp.exp(4 - 1 / (u * (1 - u))), (float(lo), float(hi)))


def cutoff(r0: Number, r1: Number) -> RadialProfile:
    """Smooth rise from 0 at r0 to 1 at r1, then 1 up to infinity."""
    lo, hi = exact(r0), exact(r1)
    if not 0 < lo < hi:
        raise ProfileError(f"cutoff needs 0 < r0 < r1, got [{r0}, {r1}]")
    u = (r - lo) / (hi - lo)
    return RadialProfile((smooth_step(u), sp.S.One), (float(hi),), (float(lo), INF))


def falloff(r0: Number, r1: Number) -> RadialProfile:
    """1 on (0, r0], smooth decay to 0 at r1."""
    lo, hi = exact(r0), exact(r1)
    if not 0 < lo < hi:
        raise ProfileError(f"falloff needs 0 < r0 < r1, got [{r0}, {r1}]")
    u = (r - lo) / (hi - lo)
    return RadialProfile((sp.S.One, 1 - smooth_step(u)), (float(lo),), (0.0, float(hi)))


def window(lo: Number, hi: Number, width: Number = None) -> RadialProfile:
    """Smooth indicator of [lo, hi] with relative transition `width` at each end."""
    width = exact(settings.CUTOFF_TRANSITION if width is None else width)
    lo, hi = exact(lo), exact(hi)
    rise_end, fall_start = lo * (1 + width), hi / (1 + width)
    if not rise_end < fall_start:
        raise ProfileError(f"window [{lo}, {hi}] too narrow for transition width {width}")
    return cutoff(lo, rise_end) * falloff(fall_start, hi)


def truncated_power(exponent: Number, lo: Number, hi: Number, width: Number = None) -> RadialProfile:
    return power(exponent) * window(lo, hi, width)


def truncated_log_power(exponent: Number, lo: Number, hi: Number) -> RadialProfile:
    """(log r)^C on [lo, hi] with transitions that double / halve log r."""
    lo, hi = exact(lo), exact(hi)
    if not (1 < lo and lo ** 2 < sp.sqrt(hi)):
        raise ProfileError(f"log window needs 1 < lo and lo^2 < sqrt(hi), got [{lo}, {hi}]")
    return log_power(exponent, (float(lo), INF)) * cutoff(lo, lo ** 2) * falloff(sp.sqrt(hi), hi)


def log_hardy_profile(k: Number, gamma: Number, p: Number, radius: Number) -> RadialProfile:
    """Three-piece extremizer f_k on [0, R]: plateau, log-power, linear ramp."""
    k, R = exact(k), exact(radius)
    C = (exact(gamma) - 1) / exact(p)
    if not 1 / k < R / 2:
        raise ProfileError(f"need 1/k < R/2 so the pieces do not overlap, got k={k}, R={R}")
    plateau = sp.log(k * R) ** C
    middle = (sp.log(R) - sp.log(r)) ** C
    ramp = (2 / R) * sp.log(2) ** C * (R - r)
    return RadialProfile((plateau, middle, ramp), (float(1 / k), float(R / 2)), (0.0, float(R)))


def difference_from_value(f: RadialProfile, radius: float) -> RadialProfile:
    """f - f(R) on the whole half-line, exact at r = R.

    Near R the difference is replaced by its Taylor polynomial built from
    exact derivatives, so it vanishes at R without cancellation.
    """
    R = float(radius)
    value = f(R)
    if value == 0.0 and R not in f.breaks and f.vanishing_order(R) is None:
        return f
    diff = f - constant(exact(value))
    piece = diff.piece_at(R)
    taylor = sum(
        (exact(_derivative_at(f, R, order)) / sp.factorial(order)) * (r - exact(R)) ** order
        for order in range(1, settings.TAYLOR_ORDER + 1)
    )
    left, right = R * (1 - settings.TAYLOR_WINDOW), R * (1 + settings.TAYLOR_WINDOW)
    spans = diff.intervals()
    host = next(span for span in spans if span[0] <= R <= span[1])
    left, right = max(left, host[0]), min(right, host[1])
    if R in diff.breaks or not (left < R < right) or piece == 0:
        return diff
    pieces, breaks = [], []
    for a, b, expr in spans:
        if (a, b) == host[:2]:
            if a < left:
                pieces.append(expr)
                breaks.append(left)
            pieces.append(taylor)
            if right < b:
                breaks.append(right)
                pieces.append(expr)
        else:
            pieces.append(expr)
        if b != spans[-1][1]:
            breaks.append(b)
    return RadialProfile(tuple(pieces), tuple(breaks), diff.support)


def _derivative_at(f: RadialProfile, x: float, order: int) -> float:
    return float(f.derivative(order)(x)) if order else f(x)


# -- operation-level API ----------------------------------------------------

def profile_eval(profile: RadialProfile, radius: float) -> float:
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    return profile(radius)


def profile_derivative(profile: RadialProfile, order: int) -> RadialProfile:
    return profile.derivative(order)


def euler_apply(profile: RadialProfile) -> RadialProfile:
    return profile.euler()


def sample_minimum(profile: RadialProfile, samples: Optional[int] = None) -> float:
    """Smallest value on a grid over every piece of the support."""
    samples = samples or settings.POSITIVITY_SAMPLES
    lowest = INF
    for left, right, piece in profile.intervals():
        if piece == 0:
            continue
        right = right if math.isfinite(right) else max(2 * left, left + 10.0)
        left = left if left > 0 else right * 1e-6
        grid = np.linspace(left, right, samples)
        lowest = min(lowest, float(np.min(profile.evaluate(grid))))
    return 0.0 if lowest == INF else lowest


def _stationary_points(piece: sp.Expr, left: float, right: float, samples: int) -> List[float]:
    """Zeros of the piece's derivative inside (left, right)."""
    slope = sp.diff(piece, r)
    if slope == 0:
        return []
    if piece.is_polynomial(r):
        roots = np.roots([float(c) for c in sp.Poly(slope, r).all_coeffs()])
        return [float(z.real) for z in roots if abs(z.imag) <= 1e-12 * max(1.0, abs(z)) and left < z.real < right]
    grid = np.linspace(left, right, samples)[1:-1]
    values = eval_expr(slope, grid)
    points = []
    for a, b, fa, fb in zip(grid, grid[1:], values, values[1:]):
        if not (math.isfinite(fa) and math.isfinite(fb)):
            continue
        if fa == 0.0:
            points.append(float(a))
        elif fa * fb < 0:
            points.append(float(brentq(compile_expr(slope), a, b)))
    return points


def piecewise_minimum(profile: RadialProfile, samples: Optional[int] = None) -> float:
    """Smallest value over support ends, breaks and the stationary points of every piece."""
    samples = samples or settings.POSITIVITY_SAMPLES
    lowest = INF
    for left, right, piece in profile.intervals():
        if piece == 0:
            lowest = min(lowest, 0.0)
            continue
        if not (left > 0 and math.isfinite(right)):
            lowest = min(lowest, sample_minimum(RadialProfile((piece,), (), (left, right)), samples))
            continue
        values = [_side_value(piece, left, +1), _side_value(piece, right, -1)]
        values += list(eval_expr(piece, np.linspace(left, right, samples)[1:-1]))
        stationary = _stationary_points(piece, left, right, samples)
        if stationary:
            values += list(eval_expr(piece, np.array(stationary)))
        lowest = min([lowest] + [v for v in values if math.isfinite(v)])
    return 0.0 if lowest == INF else lowest


def linear_combination(terms: Iterable[Tuple[Number, RadialProfile]]) -> RadialProfile:
    total = zero()
    for weight, profile in terms:
        total = total + profile * weight
    return total
