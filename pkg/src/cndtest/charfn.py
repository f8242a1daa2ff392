"""Characteristic functions and Gil-Pelaez cdf inversion.

The inversion evaluates F(x) = 1/2 - (1/pi) * int_0^inf Im(e^(-itx) psi(t))/t dt
by panel-wise Gauss-Legendre quadrature: panel width tied to the
integrand's oscillation rate, truncation point chosen from a decay
envelope so the tail is provably below tolerance, and an embedded
lower-order rule supplying the error estimate.  Products of binomial and
noise cfs (the two-proportion test statistic) get a structured tag so the
backend kernels can evaluate the whole integrand in compiled code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kernels
from ._quadnodes import GL8_W, GL8_X, GL16_W, GL16_X
from .errors import InvalidParameterError, QuadratureError

TMAX_CAP = 1e7
_REFINEMENTS = 3


@dataclass
class CharFn:
    """A characteristic function with quadrature metadata.

    decay is ('power', C, k) meaning |psi(t)| <= C / t^k, or ('gauss', a)
    meaning |psi(t)| <= exp(-a t^2); freq bounds the cf's own oscillation
    rate (the observation point's |x| is added at integration time).  tag
    carries structured parameters when the cf belongs to a known family,
    letting gil_pelaez_cdf route to a compiled kernel.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    decay: Optional[tuple] = None
    freq: float = 1.0
    tag: dict = field(default_factory=dict)

    def __call__(self, t):
        return self.eval(np.asarray(t, dtype=float))


def tulap_cf(eps: float, t) -> complex:
    """cf of Tulap(0, e^-eps, 0): the Unif(-1/2, 1/2) cf times the
    discrete Laplace cf, 2(1-b)^2 sin(t/2) / (t (1 - 2b cos t + b^2)).

    Real and even; the denominator never vanishes since |e^(it - eps)| < 1.
    Near t = 0 a quadratic series replaces the 0/0 form.
    """
    if not eps > 0:
        raise InvalidParameterError(f"eps must be positive, got {eps}")
    b = math.exp(-eps)
    from . import _kernels_numpy

    out = _kernels_numpy._tulap_cf(np.asarray(t, dtype=float), b) + 0.0j
    return complex(out) if np.ndim(t) == 0 else out


def gaussian_cf(mu: float, t) -> complex:
    """cf of N(0, 1/mu^2): exp(-t^2 / (2 mu^2))."""
    if not mu > 0:
        raise InvalidParameterError(f"mu must be positive, got {mu}")
    out = np.exp(-np.asarray(t, dtype=float) ** 2 / (2.0 * mu * mu)) + 0.0j
    return complex(out) if np.ndim(t) == 0 else out


def tulap_charfn(eps: float) -> CharFn:
    b = math.exp(-eps)
    return CharFn(
        eval=lambda t: tulap_cf(eps, t),
        decay=("power", 2.0, 1.0),
        freq=1.0,
        tag={"family": "tulap", "b": b, "eps": eps},
    )


def gaussian_charfn(mu: float) -> CharFn:
    return CharFn(
        eval=lambda t: gaussian_cf(mu, t),
        decay=("gauss", 1.0 / (2.0 * mu * mu)),
        freq=0.0,
        tag={"family": "gauss", "mu": mu},
    )


def _tstat_power_envelope(theta: float, m: int, n: int) -> float:
    """C with |psi_T(t)| <= C / t^2 for the Tulap-noise test statistic.

    Each side contributes |psi_bin(s) psi_noise(s)| <= 2 damp / |s| where
    damp = min(1, 1/sqrt(r (count + 1))), r = 4 theta (1 - theta): the
    noise cf alone decays like 2|sin(s/2)|/|s| and the binomial modulus
    (1 - r sin^2(s/2))^(count/2) caps the sin factor.
    """
    r = 4.0 * theta * (1.0 - theta)

    def damp(count):
        if r <= 0.0:
            return 1.0
        return min(1.0, 1.0 / math.sqrt(r * (count + 1.0)))

    return 4.0 * m * n * damp(m) * damp(n)


def t_statistic_cf(theta: float, m: int, n: int, noise_cf: CharFn) -> CharFn:
    """cf of T = (Y + N2)/m - (X + N1)/n at null theta:
    psi_Y(t/m) psi_X(-t/n) psi_N(t/m) psi_N(-t/n)."""
    if not 0.0 <= theta <= 1.0:
        raise InvalidParameterError(f"theta must be in [0, 1], got {theta}")
    if m <= 0 or n <= 0:
        raise InvalidParameterError("m and n must be positive")

    family = noise_cf.tag.get("family")

    def _eval(t):
        t = np.asarray(t, dtype=float)
        sm, sn = t / m, t / n
        gy = ((1.0 - theta) + theta * np.exp(1j * sm)) ** m
        gx = ((1.0 - theta) + theta * np.exp(-1j * sn)) ** n
        return gy * gx * noise_cf.eval(sm) * noise_cf.eval(-sn)

    if family == "tulap":
        decay = ("power", _tstat_power_envelope(theta, m, n), 2.0)
        kernel = {"family": "tstat", "theta": theta, "m": m, "n": n,
                  "noise_kind": 0, "noise_param": noise_cf.tag["b"]}
    elif family == "gauss":
        mu = noise_cf.tag["mu"]
        a = (1.0 / m**2 + 1.0 / n**2) / (2.0 * mu * mu)
        decay = ("gauss", a)
        kernel = {"family": "tstat", "theta": theta, "m": m, "n": n,
                  "noise_kind": 1, "noise_param": mu}
    else:
        decay = None
        kernel = {}

    # e^(+-it) components of the two binomial cfs dominate the cf's own
    # oscillation; the noise factors enter at arguments t/m, t/n
    return CharFn(eval=_eval, decay=decay, freq=2.0 + 1.0 / m + 1.0 / n, tag=kernel)


def _tmax_from_decay(decay: Optional[tuple], tol: float) -> float:
    if decay is None:
        decay = ("power", 1.0, 1.0)
    if decay[0] == "power":
        _, c, k = decay
        tmax = max(40.0, (c / (k * tol)) ** (1.0 / k))
    elif decay[0] == "gauss":
        _, a = decay
        tmax = max(1.0, 1.0 / math.sqrt(a))
        while math.exp(-a * tmax * tmax) / (2.0 * a * tmax * tmax) > tol:
            tmax *= 1.25
            if tmax > TMAX_CAP:
                break
    else:
        raise InvalidParameterError(f"unknown decay hint {decay!r}")
    if tmax > TMAX_CAP:
        raise QuadratureError(
            f"truncation point {tmax:.3g} exceeds cap {TMAX_CAP:.0e} at tol {tol:g}; "
            "supply a sharper decay hint or loosen tol"
        )
    return tmax


_PANEL_BLOCK = 4096


def _sweep_generic(cf_eval, x: float, tmax: float, h: float):
    edges = np.arange(0.0, tmax, h)
    total = 0.0
    err = 0.0
    for start in range(0, edges.size, _PANEL_BLOCK):
        lo = edges[start : start + _PANEL_BLOCK]
        hi = np.minimum(lo + h, tmax)
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)

        def panel(nodes, weights):
            t = mid[:, None] + half[:, None] * nodes[None, :]
            tf = t.ravel()
            vals = (np.imag(np.exp(-1j * tf * x) * cf_eval(tf)) / tf).reshape(t.shape)
            return half * (vals @ weights)

        p16 = panel(GL16_X, GL16_W)
        p8 = panel(GL8_X, GL8_W)
        total += float(p16.sum())
        err += float(np.abs(p16 - p8).sum())
    return total, err


def gil_pelaez_cdf(cf: CharFn, x: float, tol: float = 1e-8) -> float:
    """Evaluate the cdf at x from the characteristic function.

    Truncates at the smallest point where the decay envelope bounds the
    tail below tol, integrates with 16-point Gauss-Legendre panels sized
    to the oscillation rate, and halves the panel width until the embedded
    8-point estimate agrees within tol (QuadratureError beyond the
    refinement cap).  The result is clamped to [0, 1].
    """
    if not tol > 0:
        raise InvalidParameterError(f"tol must be positive, got {tol}")
    tmax = _tmax_from_decay(cf.decay, tol)
    omega = abs(x) + cf.freq + 1.0
    h = 8.0 / omega

    kernel = cf.tag if cf.tag.get("family") == "tstat" else None
    err = math.inf
    for _ in range(_REFINEMENTS + 1):
        if kernel is not None:
            total, err = kernels.gp_sweep_tstat(
                float(x), kernel["theta"], kernel["m"], kernel["n"],
                kernel["noise_kind"], kernel["noise_param"], tmax, h,
            )
        else:
            total, err = _sweep_generic(cf.eval, float(x), tmax, h)
        if err <= tol:
            return float(min(max(0.5 - total / math.pi, 0.0), 1.0))
        h *= 0.5
    raise QuadratureError(
        f"panel refinement stalled at error estimate {err:.3g} > tol {tol:g} "
        f"(x={x}, tmax={tmax:.3g})"
    )


def tstat_cdf(x: float, theta: float, m: int, n: int, noise: tuple, tol: float = 1e-8) -> float:
    """cdf of the privatized two-proportion statistic at null theta.

    noise is ('eps', eps) for Tulap noise or ('mu', mu) for Gaussian noise.
    """
    kind, value = noise
    if kind == "eps":
        cf = t_statistic_cf(theta, m, n, tulap_charfn(value))
    elif kind == "mu":
        cf = t_statistic_cf(theta, m, n, gaussian_charfn(value))
    else:
        raise InvalidParameterError(f"unknown noise kind {kind!r}")
    return gil_pelaez_cdf(cf, x, tol)
