"""Symmetric tradeoff functions: evaluation, inverse, fixed point,
validation, and the two-fold composition used by the semi-private test.

A tradeoff function maps a type I error level to the smallest achievable
type II error when distinguishing two adjacent databases.  Valid ones are
convex, continuous, decreasing on [0, 1] with f(x) <= 1 - x; here they are
additionally required to be symmetric (f composed with itself is the
identity below f(0)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import InvalidParameterError, TrivialTradeoffError

FIXED_POINT_TOL = 1e-12
INVERSE_TOL = 1e-12
TRIVIAL_GAP = 1e-10
_BISECT_CAP = 200


@dataclass(frozen=True)
class TradeoffFn:
    """A symmetric nontrivial tradeoff function.

    Instances are immutable; ``params`` echoes the construction arguments
    so that distributions built from the function can be serialized.
    """

    kind: str
    eval: Callable[[float], float]
    params: dict = field(default_factory=dict)

    def __call__(self, alpha):
        return self.eval(alpha)

    def __repr__(self):
        inner = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"TradeoffFn({self.kind}, {inner})"


@dataclass(frozen=True)
class FixedPoint:
    """Fixed point c of a tradeoff function, f(c) = c, with c in [0, 1/2)."""

    c: float


@dataclass
class ValidationReport:
    convexity_violation: float
    monotonicity_violation: float
    upper_bound_violation: float
    symmetry_violation: float
    trivial: bool

    @property
    def ok(self) -> bool:
        return (
            self.convexity_violation <= 1e-12
            and self.monotonicity_violation <= 1e-12
            and self.upper_bound_violation <= 1e-12
            and self.symmetry_violation <= 1e-9
            and not self.trivial
        )


def eps_delta_tradeoff(eps: float, delta: float = 0.0) -> TradeoffFn:
    """Tradeoff function of (eps, delta)-DP:
    f(a) = max(0, 1 - delta - e^eps * a, e^-eps * (1 - delta - a)).
    """
    if not eps > 0:
        raise InvalidParameterError(f"eps must be positive, got {eps}")
    if not 0 <= delta < 1:
        raise InvalidParameterError(f"delta must be in [0, 1), got {delta}")
    e_pos = math.exp(eps)
    e_neg = math.exp(-eps)

    def _eval(alpha):
        return max(0.0, 1.0 - delta - e_pos * alpha, e_neg * (1.0 - delta - alpha))

    return TradeoffFn("eps_delta", _eval, {"eps": eps, "delta": delta})


def gdp_tradeoff(mu: float) -> TradeoffFn:
    """Tradeoff function of mu-Gaussian DP: f(a) = Phi(Phi^-1(1 - a) - mu)."""
    if not mu > 0:
        raise InvalidParameterError(f"mu must be positive, got {mu}")

    def _eval(alpha):
        if alpha >= 1.0:
            return 0.0
        if alpha <= 0.0:
            return 1.0
        # Phi^-1(1 - a) = -Phi^-1(a), computed on the small side for accuracy
        return float(ndtr(-ndtri(alpha) - mu))

    return TradeoffFn("gdp", _eval, {"mu": mu})


def custom_tradeoff(fn: Callable[[float], float], name: str = "custom") -> TradeoffFn:
    """Wrap a user-supplied callable.  Run :func:`validate_tradeoff` before
    using the result to build a noise distribution; invalid inputs are
    rejected there, never silently symmetrized."""
    return TradeoffFn(name, fn, {})


def twofold(f: TradeoffFn) -> TradeoffFn:
    """Two-fold composition g(a) = f(1 - f(a)).

    This is the tradeoff bound relating tests at datasets two adjacency
    steps apart; it is again symmetric and satisfies g <= f.
    """

    def _eval(alpha):
        return f.eval(1.0 - f.eval(alpha))

    return TradeoffFn("twofold", _eval, {"inner": f.kind, **f.params})


def is_trivial(f: TradeoffFn, grid_size: int = 1001) -> bool:
    """True when f is numerically the 1 - alpha line (max gap < 1e-10)."""
    grid = np.linspace(0.0, 1.0, grid_size)
    gap = max((1.0 - a) - f.eval(a) for a in grid)
    return gap < TRIVIAL_GAP


def fixed_point(f: TradeoffFn) -> FixedPoint:
    """Solve f(c) = c by bisection on [0, 1/2].

    The map c -> f(c) - c is strictly decreasing with a single crossing
    (convexity), nonnegative at 0 and nonpositive at 1/2.
    """
    if is_trivial(f):
        raise TrivialTradeoffError("trivial tradeoff function has no fixed point below 1/2")
    lo, hi = 0.0, 0.5
    if f.eval(lo) - lo <= 0.0:
        return FixedPoint(0.0)
    for _ in range(_BISECT_CAP):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # interval at float resolution
            break
        if f.eval(mid) - mid > 0.0:
            lo = mid
        else:
            hi = mid
    c = 0.5 * (lo + hi)
    return FixedPoint(min(c, math.nextafter(0.5, 0.0)))


def tradeoff_inverse(f: TradeoffFn, alpha: float) -> float:
    """f^-1(alpha) = inf{t in [0,1] : f(t) <= alpha}.

    Bisection on the decreasing eval; ties at flat regions resolve to the
    infimum.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidParameterError(f"alpha must be in [0, 1], got {alpha}")
    if f.eval(0.0) <= alpha:
        return 0.0
    lo, hi = 0.0, 1.0  # f(lo) > alpha, f(hi) <= alpha (f(1) = 0)
    for _ in range(_BISECT_CAP):
        mid = 0.5 * (lo + hi)
        if f.eval(mid) <= alpha:
            hi = mid
        else:
            lo = mid
        if hi - lo <= INVERSE_TOL:
            break
    return hi


def validate_tradeoff(f: TradeoffFn, grid_size: int = 201) -> ValidationReport:
    """Check convexity, monotonicity, f <= 1 - x, and symmetry on a uniform
    grid, reporting the maximum violation of each property."""
    if grid_size < 3:
        raise InvalidParameterError("grid_size must be >= 3")
    grid = np.linspace(0.0, 1.0, grid_size)
    vals = np.array([f.eval(a) for a in grid])

    # midpoint convexity over consecutive triples
    convexity = float(np.max(vals[1:-1] - 0.5 * (vals[:-2] + vals[2:]), initial=0.0))
    monotone = float(np.max(np.diff(vals), initial=0.0))
    upper = float(np.max(vals - (1.0 - grid), initial=0.0))

    # symmetry f(f(a)) = a holds only where f is invertible, i.e. a <= f(0)
    f0 = vals[0]
    sym = 0.0
    for a, v in zip(grid, vals):
        if a <= f0:
            sym = max(sym, abs(f.eval(v) - a))
    return ValidationReport(
        convexity_violation=convexity,
        monotonicity_violation=monotone,
        upper_bound_violation=upper,
        symmetry_violation=sym,
        trivial=is_trivial(f),
    )
