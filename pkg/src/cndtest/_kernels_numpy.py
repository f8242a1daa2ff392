"""Pure-numpy fallback kernels.

Same signatures as _kernels_numba; selected via CNDTEST_BACKEND=numpy or
when numba is unavailable.  Vectorized over replicates / quadrature nodes
instead of JIT-compiled loops.
"""

import math

import numpy as np
from scipy.special import gammaln

from ._quadnodes import GL8_W, GL8_X, GL16_W, GL16_X


def _round_half_away(x):
    return np.where(x >= 0.0, np.floor(x + 0.5), np.ceil(x - 0.5))


def _tulap_base_cdf(x, b):
    x = np.asarray(x, dtype=float)
    xn = -np.abs(x)
    k = _round_half_away(xn)
    frac = xn - k + 0.5
    lower = b ** (-k) / (1.0 + b) * (b + frac * (1.0 - b))
    return np.where(x > 0.0, 1.0 - lower, lower)


def tulap_cdf(x, b, q):
    f0 = _tulap_base_cdf(x, b)
    if q <= 0.0:
        return f0
    mid = (f0 - 0.5 * q) / (1.0 - q)
    return np.where(f0 < 0.5 * q, 0.0, np.where(f0 > 1.0 - 0.5 * q, 1.0, mid))


def tulap_quantile(u, b, q):
    p = np.asarray(u, dtype=float) * (1.0 - q) + 0.5 * q
    flip = p > 0.5
    p = np.where(flip, 1.0 - p, p)
    lb = math.log(b)
    lp = np.log(p * (1.0 + b))
    k = np.minimum(np.ceil(-lp / lb), 0.0)
    frac = np.clip((np.exp(lp + k * lb) - b) / (1.0 - b), 0.0, 1.0)
    x = k - 0.5 + frac
    return np.where(flip, -x, x)


def hyper_weights(m, n, z, log_omega):
    L = max(0, z - n)
    U = min(m, z)
    h = np.arange(L, U + 1)
    logw = (
        gammaln(m + 1.0)
        - gammaln(h + 1.0)
        - gammaln(m - h + 1.0)
        + gammaln(n + 1.0)
        - gammaln(z - h + 1.0)
        - gammaln(n - z + h + 1.0)
        + h * log_omega
    )
    w = np.exp(logw - logw.max())
    return L, w / w.sum()


def _tulap_cf(s, b):
    s = np.asarray(s, dtype=float)
    small = np.abs(s) < 1e-6
    ssafe = np.where(small, 1.0, s)
    num = 2.0 * (1.0 - b) ** 2 * np.sin(0.5 * ssafe)
    den = ssafe * (1.0 - 2.0 * b * np.cos(ssafe) + b * b)
    series = 1.0 - s * s * (1.0 / 24.0 + b / (1.0 - b) ** 2)
    return np.where(small, series, num / den)


def _binom_cf(s, theta, count):
    g = (1.0 - theta) + theta * np.exp(1j * s)
    return g ** count


def _tstat_cf(t, theta, m, n, noise_kind, noise_param):
    sm = t / m
    sn = t / n
    cf = _binom_cf(sm, theta, m) * _binom_cf(-sn, theta, n)
    if noise_kind == 0:
        cf = cf * _tulap_cf(sm, noise_param) * _tulap_cf(sn, noise_param)
    else:
        cf = cf * np.exp(-(sm * sm + sn * sn) / (2.0 * noise_param * noise_param))
    return cf


_PANEL_BLOCK = 4096


def gp_sweep_tstat(x, theta, m, n, noise_kind, noise_param, tmax, h):
    def integrand(t):
        cf = _tstat_cf(t, theta, m, n, noise_kind, noise_param)
        return np.imag(np.exp(-1j * t * x) * cf) / t

    # panels processed in blocks to bound memory; per-panel GL8 control
    # mirrors the numba lane's error estimate
    edges = np.arange(0.0, tmax, h)
    total = 0.0
    err = 0.0
    for start in range(0, edges.size, _PANEL_BLOCK):
        lo = edges[start : start + _PANEL_BLOCK]
        hi = np.minimum(lo + h, tmax)
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)

        t16 = mid[:, None] + half[:, None] * GL16_X[None, :]
        p16 = half * (integrand(t16.ravel()).reshape(t16.shape) @ GL16_W)
        t8 = mid[:, None] + half[:, None] * GL8_X[None, :]
        p8 = half * (integrand(t8.ravel()).reshape(t8.shape) @ GL8_W)

        total += float(p16.sum())
        err += float(np.abs(p16 - p8).sum())
    return total, err


def semiprivate_pvalues(x_arr, y_arr, t_arr, m, n, b, q):
    out = np.empty(len(x_arr))
    z_arr = np.asarray(x_arr) + np.asarray(y_arr)
    for z in np.unique(z_arr):
        idx = np.nonzero(z_arr == z)[0]
        L, w = hyper_weights(m, n, int(z), 0.0)
        h = np.arange(L, L + w.size)
        args = 2.0 * h[None, :] - z - np.asarray(t_arr)[idx, None]
        out[idx] = tulap_cdf(args.ravel(), b, q).reshape(args.shape) @ w
    return out


def plugin_pvalues(tt_arr, zt_arr, m, n, b):
    out = np.empty(len(tt_arr))
    zi_arr = np.clip(_round_half_away(np.asarray(zt_arr)), 0, m + n).astype(int)
    for zi in np.unique(zi_arr):
        idx = np.nonzero(zi_arr == zi)[0]
        L, w = hyper_weights(m, n, int(zi), 0.0)
        h = np.arange(L, L + w.size)
        args = 2.0 * h[None, :] - np.asarray(zt_arr)[idx, None] - np.asarray(tt_arr)[idx, None]
        out[idx] = tulap_cdf(args.ravel(), b, 0.0).reshape(args.shape) @ w
    return out


def umpu_pvalues(x_arr, y_arr, t_arr, m, n):
    out = np.empty(len(x_arr))
    z_arr = np.asarray(x_arr) + np.asarray(y_arr)
    for z in np.unique(z_arr):
        idx = np.nonzero(z_arr == z)[0]
        L, w = hyper_weights(m, n, int(z), 0.0)
        h = np.arange(L, L + w.size)
        args = np.clip(h[None, :] - np.asarray(t_arr)[idx, None] + 0.5, 0.0, 1.0)
        out[idx] = args @ w
    return out
