"""Difference-of-proportions tests.

One-sided throughout: small p-values favor the second group having the
larger proportion.  The semi-private conditional test is the power upper
bound; the inversion test is the recommended fully private procedure; the
plug-in, DP-normal, classic-normal, and non-private conditional tests are
the comparison set.  A Bonferroni flip converts any of them to two-sided.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional, Union

import numpy as np
from scipy.special import ndtr

from . import kernels
from .charfn import tstat_cdf
from .cnd import TulapDist
from .dist import laplace_sample
from .errors import BracketFailureError, InvalidParameterError

_SIZE_TOL = 1e-9
_BRACKET_LIMIT = 1e6


@dataclass(frozen=True)
class EpsDP:
    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise InvalidParameterError(f"eps must be positive, got {self.eps}")


@dataclass(frozen=True)
class GDP:
    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise InvalidParameterError(f"mu must be positive, got {self.mu}")


Privacy = Union[EpsDP, GDP]


@dataclass(frozen=True)
class TwoSampleData:
    """Success counts x of n (first group) and y of m (second group)."""

    x: int
    y: int
    n: int
    m: int

    def __post_init__(self):
        if self.n <= 0 or self.m <= 0:
            raise InvalidParameterError("sample sizes must be positive")
        if not 0 <= self.x <= self.n:
            raise InvalidParameterError(f"x must be in [0, {self.n}], got {self.x}")
        if not 0 <= self.y <= self.m:
            raise InvalidParameterError(f"y must be in [0, {self.m}], got {self.y}")


@dataclass
class TestReport:
    method: str
    p_value: float
    statistic: float
    privatized_x: Optional[float]
    privatized_y: Optional[float]
    params: dict

    def to_json(self, **extra) -> str:
        payload = asdict(self)
        payload.update(extra)
        return json.dumps(payload, sort_keys=True)


def _as_int64(a):
    return np.ascontiguousarray(np.asarray(a), dtype=np.int64)


def _as_f64(a):
    return np.ascontiguousarray(np.asarray(a), dtype=np.float64)


# ---------------------------------------------------------------------------
# semi-private UMPU


def semiprivate_pvalues_batch(x, y, noise_draws, m, n, tulap: TulapDist) -> np.ndarray:
    """Vectorized semi-private p-values with Tulap noise already drawn:
    T_i = y_i - x_i + N_i, p_i = sum_h Hyper(m, n, x_i + y_i)(h) F(2h - z_i - T_i)."""
    x = _as_int64(x)
    y = _as_int64(y)
    t_stat = _as_f64(y - x) + _as_f64(noise_draws)
    return np.asarray(
        kernels.semiprivate_pvalues(x, y, t_stat, m, n, tulap.b, tulap.q)
    )


def semiprivate_test(d: TwoSampleData, noise, rng: np.random.Generator) -> TestReport:
    """Semi-private UMPU p-value: the total z = x + y is released exactly,
    the difference is privatized with one draw from the canonical noise.

    Not a privacy mechanism; it upper-bounds the power of every unbiased
    f-DP test and serves as the benchmark.
    """
    nz = float(noise.sample(rng, 1)[0])
    t_stat = d.y - d.x + nz
    z = d.x + d.y
    if isinstance(noise, TulapDist):
        p = float(
            semiprivate_pvalues_batch([d.x], [d.y], [nz], d.m, d.n, noise)[0]
        )
    else:
        lo, w = kernels.hyper_weights(d.m, d.n, z, 0.0)
        h = np.arange(lo, lo + len(w), dtype=float)
        p = float(np.asarray(w) @ np.asarray(noise.cdf(2.0 * h - z - t_stat)))
    return TestReport(
        method="semiprivate",
        p_value=p,
        statistic=t_stat,
        privatized_x=None,
        privatized_y=None,
        params={"z": z, "m": d.m, "n": d.n},
    )


def semiprivate_threshold(m: int, n: int, z: int, noise, alpha: float) -> float:
    """Solve for c(z) with sum_h Hyper(m, n, z)(h) F(2h - z - c) = alpha."""
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError(f"alpha must be in (0, 1), got {alpha}")
    lo_sup, w = kernels.hyper_weights(m, n, z, 0.0)
    h = np.arange(lo_sup, lo_sup + len(w), dtype=float)
    w = np.asarray(w)

    def size(c):
        return float(w @ np.asarray(noise.cdf(2.0 * h - z - c)))

    lo, hi = -1.0, 1.0
    while size(lo) < alpha:
        lo *= 2.0
        if lo < -_BRACKET_LIMIT:
            raise BracketFailureError("conditional size never reaches alpha")
    while size(hi) > alpha:
        hi *= 2.0
        if hi > _BRACKET_LIMIT:
            raise BracketFailureError("conditional size never drops to alpha")
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        if size(mid) > alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-10:
            break
    c = 0.5 * (lo + hi)
    if abs(size(c) - alpha) > _SIZE_TOL:
        raise BracketFailureError(f"conditional size missed alpha at z = {z}")
    return c


# ---------------------------------------------------------------------------
# inversion test (recommended private test)


def inversion_pvalue(
    x_hat: float, y_hat: float, m: int, n: int, privacy: Privacy, tol: float = 1e-6
) -> float:
    """p-value given the privatized counts: the null parameter is estimated
    from the released values and the statistic's exact null cdf under that
    estimate is evaluated by characteristic-function inversion."""
    t_stat = y_hat / m - x_hat / n
    theta_hat = min(max((x_hat + y_hat) / (m + n), 0.0), 1.0)
    noise = ("eps", privacy.eps) if isinstance(privacy, EpsDP) else ("mu", privacy.mu)
    return 1.0 - tstat_cdf(t_stat, theta_hat, m, n, noise, tol)


def inversion_test(
    d: TwoSampleData, privacy: Privacy, rng: np.random.Generator, tol: float = 1e-6
) -> TestReport:
    """Private two-proportion test based on Gil-Pelaez inversion.

    Releases x + N1 and y + N2 (each count has sensitivity 1, and only one
    changes between adjacent datasets, so the pair satisfies the target
    privacy); everything else is post-processing of those two values.
    """
    if isinstance(privacy, EpsDP):
        noise_dist = TulapDist(b=math.exp(-privacy.eps), q=0.0)
        n1, n2 = noise_dist.sample(rng, 2)
        params = {"eps": privacy.eps, "m": d.m, "n": d.n}
    else:
        draws = rng.normal(0.0, 1.0 / privacy.mu, 2)
        n1, n2 = float(draws[0]), float(draws[1])
        params = {"mu": privacy.mu, "m": d.m, "n": d.n}
    x_hat = d.x + float(n1)
    y_hat = d.y + float(n2)
    p = inversion_pvalue(x_hat, y_hat, d.m, d.n, privacy, tol)
    theta_hat = min(max((x_hat + y_hat) / (d.m + d.n), 0.0), 1.0)
    params["theta_hat"] = theta_hat
    return TestReport(
        method="inversion",
        p_value=p,
        statistic=y_hat / d.m - x_hat / d.n,
        privatized_x=x_hat,
        privatized_y=y_hat,
        params=params,
    )


# ---------------------------------------------------------------------------
# plug-in test


def plugin_pvalues_batch(x, y, l1, l2, m, n, eps) -> np.ndarray:
    """Vectorized plug-in p-values from pre-drawn Tulap(0, e^(-eps/2), 0)
    noise on the difference (l1) and the total (l2)."""
    tt = _as_f64(np.asarray(y) - np.asarray(x)) + _as_f64(l1)
    zt = _as_f64(np.asarray(x) + np.asarray(y)) + _as_f64(l2)
    b = math.exp(-0.5 * eps)
    return np.asarray(kernels.plugin_pvalues(tt, zt, m, n, b))


def plugin_test(d: TwoSampleData, eps: float, rng: np.random.Generator) -> TestReport:
    """Budget-split plug-in of the semi-private formula: both the
    difference and the total are privatized at eps/2 each, the total is
    rounded and clamped for the hypergeometric support while the unrounded
    value stays in the cdf argument."""
    if not eps > 0:
        raise InvalidParameterError(f"eps must be positive, got {eps}")
    noise = TulapDist(b=math.exp(-0.5 * eps), q=0.0)
    l1, l2 = noise.sample(rng, 2)
    p = float(plugin_pvalues_batch([d.x], [d.y], [l1], [l2], d.m, d.n, eps)[0])
    t_tilde = (d.y - d.x) + float(l1)
    z_tilde = (d.x + d.y) + float(l2)
    return TestReport(
        method="plugin",
        p_value=p,
        statistic=t_tilde,
        privatized_x=None,
        privatized_y=None,
        params={"eps": eps, "z_tilde": z_tilde, "m": d.m, "n": d.n},
    )


# ---------------------------------------------------------------------------
# normal approximations


def dp_normal_pvalues_batch(x, y, l1, l2, m, n, eps, corrected_variance=False):
    x_t = _as_f64(x) + _as_f64(l1)
    y_t = _as_f64(y) + _as_f64(l2)
    theta_t = np.clip((x_t + y_t) / (m + n), 0.0, 1.0)
    t_stat = y_t / m - x_t / n
    base = theta_t * (1.0 - theta_t)
    if corrected_variance:
        base = base * (1.0 / m + 1.0 / n)
    var = base + 2.0 / (m * eps) ** 2 + 2.0 / (n * eps) ** 2
    return 1.0 - ndtr(t_stat / np.sqrt(var)), t_stat, x_t, y_t


def dp_normal_test(
    d: TwoSampleData,
    eps: float,
    rng: np.random.Generator,
    corrected_variance: bool = False,
) -> TestReport:
    """DP normal-approximation test: Laplace(1/eps) noise on both counts,
    pooled plug-in variance, normal reference distribution.

    The default variance term theta(1 - theta) + 2/(m eps)^2 + 2/(n eps)^2
    omits the (1/m + 1/n) factor of the classic test; corrected_variance
    restores it.  The default is the form whose miscalibrated levels the
    simulations reproduce.
    """
    if not eps > 0:
        raise InvalidParameterError(f"eps must be positive, got {eps}")
    l1 = float(laplace_sample(1.0 / eps, rng, 1)[0])
    l2 = float(laplace_sample(1.0 / eps, rng, 1)[0])
    p, t_stat, x_t, y_t = dp_normal_pvalues_batch(
        [d.x], [d.y], [l1], [l2], d.m, d.n, eps, corrected_variance
    )
    return TestReport(
        method="dp_normal",
        p_value=float(p[0]),
        statistic=float(t_stat[0]),
        privatized_x=float(x_t[0]),
        privatized_y=float(y_t[0]),
        params={"eps": eps, "corrected_variance": corrected_variance, "m": d.m, "n": d.n},
    )


def classic_pvalues_batch(x, y, m, n):
    x = _as_f64(x)
    y = _as_f64(y)
    theta0 = (x + y) / (m + n)
    var = (1.0 / m + 1.0 / n) * theta0 * (1.0 - theta0)
    t_stat = y / m - x / n
    with np.errstate(divide="ignore", invalid="ignore"):
        z = t_stat / np.sqrt(var)
    p = 1.0 - ndtr(z)
    # degenerate pooled estimate: statistic is 0/0; accept when the
    # difference is nonpositive
    degenerate = var == 0.0
    p = np.where(degenerate, np.where(t_stat <= 0.0, 1.0, 0.0), p)
    return p, t_stat


def classic_normal_test(d: TwoSampleData) -> TestReport:
    """Textbook one-sided two-proportion z-test (no privacy, deterministic)."""
    p, t_stat = classic_pvalues_batch([d.x], [d.y], d.m, d.n)
    return TestReport(
        method="classic",
        p_value=float(p[0]),
        statistic=float(t_stat[0]),
        privatized_x=None,
        privatized_y=None,
        params={"m": d.m, "n": d.n},
    )


# ---------------------------------------------------------------------------
# non-private UMPU


def umpu_pvalues_batch(x, y, u_draws, m, n) -> np.ndarray:
    t_stat = _as_f64(y) + _as_f64(u_draws)
    return np.asarray(kernels.umpu_pvalues(_as_int64(x), _as_int64(y), t_stat, m, n))


def nonprivate_umpu(d: TwoSampleData, rng: np.random.Generator) -> TestReport:
    """Exact conditional UMPU test: T = y + U with U ~ Unif(-1/2, 1/2),
    p = E_Hyper F_U(H - T) given the total x + y."""
    u = float(rng.random() - 0.5)
    p = float(umpu_pvalues_batch([d.x], [d.y], [u], d.m, d.n)[0])
    return TestReport(
        method="nonprivate_umpu",
        p_value=p,
        statistic=d.y + u,
        privatized_x=None,
        privatized_y=None,
        params={"z": d.x + d.y, "m": d.m, "n": d.n},
    )


def two_sided(p: float) -> float:
    """Bonferroni flip of a one-sided p-value: 2 min(p, 1 - p), capped at 1."""
    if not 0.0 <= p <= 1.0:
        raise InvalidParameterError(f"p must be in [0, 1], got {p}")
    return min(1.0, 2.0 * min(p, 1.0 - p))
