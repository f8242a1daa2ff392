"""Supporting count distributions: binomial pmf and characteristic
function, central / Fisher noncentral hypergeometric pmf, Laplace
sampling, and the Unif(-1/2, 1/2) cdf of the non-private conditional test.

Combinatorial terms go through log-gamma; noncentral normalization
subtracts the max log-weight before exponentiating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import kernels
from .errors import InvalidParameterError


@dataclass(frozen=True)
class BinomialModel:
    n: int
    theta: float

    def __post_init__(self):
        if self.n < 0:
            raise InvalidParameterError(f"n must be nonnegative, got {self.n}")
        if not 0.0 <= self.theta <= 1.0:
            raise InvalidParameterError(f"theta must be in [0, 1], got {self.theta}")


@dataclass(frozen=True)
class HyperModel:
    """Fisher noncentral hypergeometric: count from the m-group given a
    total of z successes across independent Binom(m), Binom(n) groups,
    odds ratio omega (omega = 1 is the central case)."""

    m: int
    n: int
    z: int
    omega: float = 1.0

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise InvalidParameterError("m and n must be nonnegative")
        if not 0 <= self.z <= self.m + self.n:
            raise InvalidParameterError(f"z must be in [0, m + n], got {self.z}")
        if not self.omega > 0:
            raise InvalidParameterError(f"omega must be positive, got {self.omega}")

    @property
    def support(self):
        lo = max(0, self.z - self.n)
        hi = min(self.m, self.z)
        return lo, hi


def binom_pmf(b: BinomialModel, x: int) -> float:
    """C(n, x) theta^x (1 - theta)^(n - x); 0 outside {0..n}."""
    if x < 0 or x > b.n:
        return 0.0
    if b.theta == 0.0:
        return 1.0 if x == 0 else 0.0
    if b.theta == 1.0:
        return 1.0 if x == b.n else 0.0
    logp = (
        gammaln(b.n + 1.0)
        - gammaln(x + 1.0)
        - gammaln(b.n - x + 1.0)
        + x * math.log(b.theta)
        + (b.n - x) * math.log1p(-b.theta)
    )
    return float(math.exp(logp))


def binom_pmf_vector(b: BinomialModel) -> np.ndarray:
    """pmf over the full support {0..n}."""
    return np.array([binom_pmf(b, x) for x in range(b.n + 1)])


def binom_cf(b: BinomialModel, t) -> complex:
    """((1 - theta) + theta e^(it))^n."""
    g = (1.0 - b.theta) + b.theta * np.exp(1j * np.asarray(t, dtype=float))
    return g**b.n


def hyper_pmf(h: HyperModel, x: int) -> float:
    if x < h.support[0] or x > h.support[1]:
        return 0.0
    lo, w = kernels.hyper_weights(h.m, h.n, h.z, math.log(h.omega))
    return float(w[x - lo])


def hyper_pmf_vector(h: HyperModel):
    """(support_lo, probs) across the full support."""
    lo, w = kernels.hyper_weights(h.m, h.n, h.z, math.log(h.omega))
    return int(lo), np.asarray(w)


def laplace_sample(scale: float, rng: np.random.Generator, k: int = 1) -> np.ndarray:
    """Mean-zero Laplace draws by inverse transform."""
    if not scale > 0:
        raise InvalidParameterError(f"scale must be positive, got {scale}")
    v = rng.random(k) - 0.5
    return -scale * np.sign(v) * np.log1p(-2.0 * np.abs(v))


def uniform_cdf(x):
    """cdf of Unif(-1/2, 1/2)."""
    return np.clip(np.asarray(x, dtype=float) + 0.5, 0.0, 1.0)[()]
