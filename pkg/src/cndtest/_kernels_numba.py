"""numba-compiled hot kernels.

Signatures mirror _kernels_numpy exactly; see that module for the pure
numpy lane.  Scalar math here is written out elementwise so the JIT can
keep everything in registers inside the Monte Carlo and quadrature loops.
"""

import math

import numpy as np
from numba import njit

from ._quadnodes import GL8_W, GL8_X, GL16_W, GL16_X

_GL16_X = np.ascontiguousarray(GL16_X)
_GL16_W = np.ascontiguousarray(GL16_W)
_GL8_X = np.ascontiguousarray(GL8_X)
_GL8_W = np.ascontiguousarray(GL8_W)


@njit(cache=True)
def _round_half_away(x):
    if x >= 0.0:
        return math.floor(x + 0.5)
    return math.ceil(x - 0.5)


@njit(cache=True)
def _tulap_base_cdf(x, b):
    # cdf of Tulap(0, b, 0); evaluate on the nonpositive side, flip by symmetry
    xn = -x if x > 0.0 else x
    k = _round_half_away(xn)
    frac = xn - k + 0.5
    lower = b ** (-k) / (1.0 + b) * (b + frac * (1.0 - b))
    return 1.0 - lower if x > 0.0 else lower


@njit(cache=True)
def _tulap_cdf_scalar(x, b, q):
    f0 = _tulap_base_cdf(x, b)
    if q <= 0.0:
        return f0
    if f0 < 0.5 * q:
        return 0.0
    if f0 > 1.0 - 0.5 * q:
        return 1.0
    return (f0 - 0.5 * q) / (1.0 - q)


@njit(cache=True)
def _tulap_base_quantile(p, b):
    # inverse of _tulap_base_cdf for p in (0, 1)
    flip = p > 0.5
    if flip:
        p = 1.0 - p
    # on [k - 1/2, k + 1/2] (k <= 0) the cdf is linear from b^(1-k)/(1+b)
    # to b^(-k)/(1+b); p*(1+b)*b^k kept in log space to survive deep tails
    lb = math.log(b)
    lp = math.log(p * (1.0 + b))
    k = math.ceil(-lp / lb)
    if k > 0:
        k = 0
    frac = (math.exp(lp + k * lb) - b) / (1.0 - b)
    if frac < 0.0:
        frac = 0.0
    elif frac > 1.0:
        frac = 1.0
    x = k - 0.5 + frac
    return -x if flip else x


@njit(cache=True)
def _tulap_quantile_scalar(u, b, q):
    p = u * (1.0 - q) + 0.5 * q
    return _tulap_base_quantile(p, b)


@njit(cache=True)
def tulap_cdf(x, b, q):
    out = np.empty(x.size)
    for i in range(x.size):
        out[i] = _tulap_cdf_scalar(x[i], b, q)
    return out


@njit(cache=True)
def tulap_quantile(u, b, q):
    out = np.empty(u.size)
    for i in range(u.size):
        out[i] = _tulap_quantile_scalar(u[i], b, q)
    return out


@njit(cache=True)
def hyper_weights(m, n, z, log_omega):
    """Fisher noncentral hypergeometric pmf over its support.

    Returns (L, probs) where probs[j] = P(H = L + j), H the count from the
    m-group conditioned on total z, odds ratio exp(log_omega).
    """
    L = z - n
    if L < 0:
        L = 0
    U = m if m < z else z
    size = U - L + 1
    logw = np.empty(size)
    lm = math.lgamma(m + 1.0)
    ln = math.lgamma(n + 1.0)
    for j in range(size):
        h = L + j
        logw[j] = (
            lm
            - math.lgamma(h + 1.0)
            - math.lgamma(m - h + 1.0)
            + ln
            - math.lgamma(z - h + 1.0)
            - math.lgamma(n - z + h + 1.0)
            + h * log_omega
        )
    mx = logw[0]
    for j in range(1, size):
        if logw[j] > mx:
            mx = logw[j]
    total = 0.0
    for j in range(size):
        logw[j] = math.exp(logw[j] - mx)
        total += logw[j]
    for j in range(size):
        logw[j] /= total
    return L, logw


@njit(cache=True)
def _tulap_cf(s, b):
    # cf of Tulap(0, b, 0): product of a Unif(-1/2, 1/2) cf and a discrete
    # Laplace cf; real and even in s
    if abs(s) < 1e-6:
        return 1.0 - s * s * (1.0 / 24.0 + b / ((1.0 - b) * (1.0 - b)))
    num = 2.0 * (1.0 - b) * (1.0 - b) * math.sin(0.5 * s)
    den = s * (1.0 - 2.0 * b * math.cos(s) + b * b)
    return num / den


@njit(cache=True)
def _cpow_int(z, k):
    # z**k by binary exponentiation; avoids complex-log branch issues
    result = complex(1.0, 0.0)
    base = z
    while k > 0:
        if k & 1:
            result = result * base
        base = base * base
        k >>= 1
    return result


@njit(cache=True)
def _binom_cf(s, theta, count):
    g = complex(1.0 - theta + theta * math.cos(s), theta * math.sin(s))
    return _cpow_int(g, count)


@njit(cache=True)
def _tstat_cf(t, theta, m, n, noise_kind, noise_param):
    """cf of T = (Y + N2)/m - (X + N1)/n under a common null theta.

    noise_kind 0: Tulap(0, b, 0) with b = noise_param; 1: N(0, 1/mu^2)
    with mu = noise_param.
    """
    sm = t / m
    sn = t / n
    cf = _binom_cf(sm, theta, m) * _binom_cf(-sn, theta, n)
    if noise_kind == 0:
        cf *= _tulap_cf(sm, noise_param) * _tulap_cf(sn, noise_param)
    else:
        cf *= math.exp(-(sm * sm + sn * sn) / (2.0 * noise_param * noise_param))
    return cf


@njit(cache=True)
def gp_sweep_tstat(x, theta, m, n, noise_kind, noise_param, tmax, h):
    """One Gil-Pelaez panel sweep of integrand Im(e^(-itx) cf(t))/t over
    (0, tmax] with panel width h.  Returns (integral_gl16, err_estimate)."""
    total = 0.0
    err = 0.0
    t0 = 0.0
    while t0 < tmax:
        t1 = t0 + h
        if t1 > tmax:
            t1 = tmax
        mid = 0.5 * (t0 + t1)
        half = 0.5 * (t1 - t0)
        s16 = 0.0
        for i in range(16):
            t = mid + half * _GL16_X[i]
            cf = _tstat_cf(t, theta, m, n, noise_kind, noise_param)
            rot = complex(math.cos(t * x), -math.sin(t * x))
            s16 += _GL16_W[i] * (rot * cf).imag / t
        s8 = 0.0
        for i in range(8):
            t = mid + half * _GL8_X[i]
            cf = _tstat_cf(t, theta, m, n, noise_kind, noise_param)
            rot = complex(math.cos(t * x), -math.sin(t * x))
            s8 += _GL8_W[i] * (rot * cf).imag / t
        total += half * s16
        err += half * abs(s16 - s8)
        t0 = t1
    return total, err


@njit(cache=True)
def _weight_table(m, n):
    """Per-total cache of central hypergeometric weights, filled lazily;
    row z holds the support offset in Ls[z] and the pmf in W[z, :counts[z]]."""
    width = (m if m < n else n) + 1
    W = np.zeros((m + n + 1, width))
    Ls = np.zeros(m + n + 1, dtype=np.int64)
    counts = np.zeros(m + n + 1, dtype=np.int64)
    return W, Ls, counts


@njit(cache=True)
def _fill_weights(z, m, n, W, Ls, counts):
    if counts[z] == 0:
        L, w = hyper_weights(m, n, z, 0.0)
        Ls[z] = L
        counts[z] = w.size
        W[z, : w.size] = w
    return Ls[z], counts[z]


@njit(cache=True)
def semiprivate_pvalues(x_arr, y_arr, t_arr, m, n, b, q):
    """p = sum_h Hyper(m, n, z)(h) * F(2h - z - T) for each replicate,
    with z = x + y exact and F the Tulap(0, b, q) cdf."""
    out = np.empty(x_arr.size)
    W, Ls, counts = _weight_table(m, n)
    for i in range(x_arr.size):
        z = x_arr[i] + y_arr[i]
        L, cnt = _fill_weights(z, m, n, W, Ls, counts)
        acc = 0.0
        for j in range(cnt):
            acc += W[z, j] * _tulap_cdf_scalar(2.0 * (L + j) - z - t_arr[i], b, q)
        out[i] = acc
    return out


@njit(cache=True)
def plugin_pvalues(tt_arr, zt_arr, m, n, b):
    """Plug-in p-values: hypergeometric over the rounded, clamped private
    total; the unrounded total still enters the cdf argument."""
    out = np.empty(tt_arr.size)
    W, Ls, counts = _weight_table(m, n)
    for i in range(tt_arr.size):
        zt = zt_arr[i]
        zi = int(_round_half_away(zt))
        if zi < 0:
            zi = 0
        elif zi > m + n:
            zi = m + n
        L, cnt = _fill_weights(zi, m, n, W, Ls, counts)
        acc = 0.0
        for j in range(cnt):
            acc += W[zi, j] * _tulap_cdf_scalar(2.0 * (L + j) - zt - tt_arr[i], b, 0.0)
        out[i] = acc
    return out


@njit(cache=True)
def umpu_pvalues(x_arr, y_arr, t_arr, m, n):
    """Non-private conditional p-values: sum_h Hyper(h) * F_U(h - T) with
    F_U the Unif(-1/2, 1/2) cdf."""
    out = np.empty(x_arr.size)
    W, Ls, counts = _weight_table(m, n)
    for i in range(x_arr.size):
        z = x_arr[i] + y_arr[i]
        L, cnt = _fill_weights(z, m, n, W, Ls, counts)
        acc = 0.0
        for j in range(cnt):
            u = (L + j) - t_arr[i] + 0.5
            if u < 0.0:
                u = 0.0
            elif u > 1.0:
                u = 1.0
            acc += W[z, j] * u
        out[i] = acc
    return out
