"""f-DP hypothesis-test machinery: privacy-constraint checkers, the UMP
test for exchangeable binary data, and free private p-values.

A randomized test assigns each sample point a rejection probability.  It
satisfies f-DP exactly when phi(x) <= 1 - f(phi(x')) across every adjacent
pair, equivalently when the noise-quantile transforms F^-1(phi(.)) move by
at most 1 between neighbors.  For binary data the optimal test is a
shifted noise cdf F(x - m) with the shift solving the size equation, and
its statistic x + N yields a p-value by plain post-processing.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Dict, Hashable, List, Sequence, Tuple

import numpy as np

from .cnd import CndDist
from .errors import BracketFailureError, InvalidParameterError
from .tradeoff import TradeoffFn

_CLIP = 1e-15
_SIZE_TOL = 1e-9
_SHIFT_TOL = 1e-10
_BRACKET_LIMIT = 1e6


@dataclass
class TestFn:
    """Rejection probabilities over a discrete sample space, plus the
    Hamming-distance-1 adjacency pairs the privacy constraints range over."""

    values: Dict[Hashable, float]
    adjacency: List[Tuple[Hashable, Hashable]]

    def __post_init__(self):
        for pt, v in self.values.items():
            if not 0.0 <= v <= 1.0:
                raise InvalidParameterError(f"phi({pt!r}) = {v} outside [0, 1]")

    @property
    def points(self):
        return list(self.values)


def binary_testfn(values: Sequence[float]) -> TestFn:
    """TestFn on counts {0..n} with consecutive-integers adjacency."""
    vals = {x: float(v) for x, v in enumerate(values)}
    adj = [(x, x + 1) for x in range(len(values) - 1)]
    return TestFn(vals, adj)


def testfn_from_csv(path) -> TestFn:
    """Load a TestFn from CSV rows 'point,<id>,<value>' and 'edge,<a>,<b>'.

    Point ids are read as integers when they parse, else kept as strings.
    """

    def _id(token: str):
        try:
            return int(token)
        except ValueError:
            return token

    values: Dict[Hashable, float] = {}
    adjacency: List[Tuple[Hashable, Hashable]] = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            kind = row[0].strip().lower()
            if kind == "point":
                values[_id(row[1].strip())] = float(row[2])
            elif kind == "edge":
                adjacency.append((_id(row[1].strip()), _id(row[2].strip())))
            else:
                raise InvalidParameterError(f"unknown row kind {row[0]!r} in {path}")
    return TestFn(values, adjacency)


@dataclass
class FdpReport:
    max_slack: float
    worst_pair: tuple
    pass_tol: float

    @property
    def passes(self) -> bool:
        return self.max_slack <= self.pass_tol


def check_fdp(phi: TestFn, f: TradeoffFn, pass_tol: float = 1e-12) -> FdpReport:
    """Max over ordered adjacent pairs of phi(x) - (1 - f(phi(x')))."""
    if not phi.adjacency:
        raise InvalidParameterError("adjacency list is empty")
    worst = -math.inf
    worst_pair = None
    for a, b in phi.adjacency:
        for x, xp in ((a, b), (b, a)):
            slack = phi.values[x] - (1.0 - f.eval(phi.values[xp]))
            if slack > worst:
                worst, worst_pair = slack, (x, xp)
    return FdpReport(worst, worst_pair, pass_tol)


def check_fdp_cnd(phi: TestFn, noise, pass_tol: float = 1e-9) -> FdpReport:
    """Equivalent criterion in quantile space:
    F^-1(phi(x)) - F^-1(phi(x')) - 1 over ordered adjacent pairs.

    Rejection probabilities at 0 or 1 are clipped to 1e-15 from the
    endpoints, which lands on the support edge for bounded-support noise
    and behaves as -/+inf otherwise.
    """
    if not phi.adjacency:
        raise InvalidParameterError("adjacency list is empty")

    q = {
        pt: float(noise.quantile(min(max(v, _CLIP), 1.0 - _CLIP)))
        for pt, v in phi.values.items()
    }
    worst = -math.inf
    worst_pair = None
    for a, b in phi.adjacency:
        for x, xp in ((a, b), (b, a)):
            slack = q[x] - q[xp] - 1.0
            if slack > worst:
                worst, worst_pair = slack, (x, xp)
    return FdpReport(worst, worst_pair, pass_tol)


@dataclass
class BinaryUmpTest:
    """UMP f-DP test for exchangeable binary data: phi(x) = F(x - shift_m)
    with the shift solving sum_x P(x) F(x - m) = alpha."""

    shift_m: float
    level_alpha: float
    null_pmf: np.ndarray
    noise: object

    def phi(self, x) -> float:
        return float(self.noise.cdf(np.asarray(x, dtype=float) - self.shift_m))

    def phi_values(self) -> np.ndarray:
        xs = np.arange(self.null_pmf.size, dtype=float)
        return np.asarray(self.noise.cdf(xs - self.shift_m))

    def as_testfn(self) -> TestFn:
        return binary_testfn(self.phi_values())

    def size(self) -> float:
        return float(self.null_pmf @ self.phi_values())


def _binary_size(null_pmf: np.ndarray, noise, m: float) -> float:
    xs = np.arange(null_pmf.size, dtype=float)
    return float(null_pmf @ np.asarray(noise.cdf(xs - m)))


def ump_binary(null_pmf, f: TradeoffFn, alpha: float, noise=None) -> BinaryUmpTest:
    """Calibrate the shift of the UMP binary test by bisection.

    null_pmf is the pmf of the count statistic over {0..n} under the null;
    callers are responsible for the alternative having a monotone
    likelihood ratio in the count (holds for binomial and noncentral
    hypergeometric families).  noise defaults to the constructed canonical
    noise distribution of f.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError(f"alpha must be in (0, 1), got {alpha}")
    pmf = np.asarray(null_pmf, dtype=float)
    if pmf.ndim != 1 or pmf.size == 0 or np.any(pmf < 0) or abs(pmf.sum() - 1.0) > 1e-9:
        raise InvalidParameterError("null_pmf must be a nonnegative vector summing to 1")
    if noise is None:
        noise = CndDist(f)

    # size is continuous and decreasing in m; bracket by doubling
    lo, hi = -1.0, 1.0
    while _binary_size(pmf, noise, lo) < alpha:
        lo *= 2.0
        if lo < -_BRACKET_LIMIT:
            raise BracketFailureError("size never reaches alpha as m -> -inf")
    while _binary_size(pmf, noise, hi) > alpha:
        hi *= 2.0
        if hi > _BRACKET_LIMIT:
            raise BracketFailureError("size never drops to alpha as m -> +inf")
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        if _binary_size(pmf, noise, mid) > alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _SHIFT_TOL:
            break
    m = 0.5 * (lo + hi)
    if abs(_binary_size(pmf, noise, m) - alpha) > _SIZE_TOL:
        raise BracketFailureError(
            f"size missed alpha by more than {_SIZE_TOL} at m = {m}"
        )
    return BinaryUmpTest(shift_m=m, level_alpha=alpha, null_pmf=pmf, noise=noise)


def binary_statistic(x: int, noise, rng: np.random.Generator) -> float:
    """Privatized count T = x + N."""
    return float(x + noise.sample(rng, 1)[0])


def binary_pvalue(T: float, null_pmf, noise) -> float:
    """p = sum_x P(x) F(x - T); valid and free given the released T."""
    if math.isinf(T):
        return 0.0 if T > 0 else 1.0
    pmf = np.asarray(null_pmf, dtype=float)
    xs = np.arange(pmf.size, dtype=float)
    return float(pmf @ np.asarray(noise.cdf(xs - T)))


def _phi_quantile(noise, v: float) -> float:
    if v <= 0.0:
        return -math.inf
    if v >= 1.0:
        return math.inf
    return float(noise.quantile(v))


def free_pvalue_statistic(phi: TestFn, noise, x, rng: np.random.Generator) -> float:
    """T = F^-1(phi(x)) + N, an f-DP release whenever phi is an f-DP test
    and F a canonical noise distribution for f.  phi(x) in {0, 1} yields a
    -inf/+inf sentinel (quantile of a boundary probability)."""
    q = _phi_quantile(noise, phi.values[x])
    if math.isinf(q):
        return q
    return float(q + noise.sample(rng, 1)[0])


def free_pvalue(T: float, phi: TestFn, null_models: Sequence[dict], noise) -> float:
    """p = max over supplied null models of E F(F^-1(phi(X)) - T).

    Each model maps sample points to probabilities (exact summation).  For
    composite nulls the caller supplies a parameter grid of models; the
    maximum is a grid lower bound on the true supremum, so refine the grid
    rather than trusting it blindly for continuous families.  Infinite
    arguments follow F(. - inf) = 0 and F(. + inf) = 1, with an infinite T
    taking precedence.
    """
    if not null_models:
        raise InvalidParameterError("free_pvalue needs at least one null model")
    if math.isinf(T):
        return 0.0 if T > 0 else 1.0
    best = 0.0
    for model in null_models:
        acc = 0.0
        for pt, prob in model.items():
            q = _phi_quantile(noise, phi.values[pt])
            if math.isinf(q):
                acc += prob * (1.0 if q > 0 else 0.0)
            else:
                acc += prob * float(noise.cdf(q - T))
        best = max(best, acc)
    return min(best, 1.0)
