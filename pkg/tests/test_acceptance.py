"""Acceptance suite: one test per criterion, each printing a PASS/FAIL
line with its runtime.  Run with `pytest tests/test_acceptance.py -v -s`.

The two simulation reproductions (criteria 7 and 8) are desk-scaled Monte
Carlo runs and dominate the runtime; everything else is deterministic or
small.
"""

import math
import time

import numpy as np
from scipy.special import ndtr

from cndtest.charfn import CharFn, gil_pelaez_cdf, tstat_cdf
from cndtest.cnd import CndDist, RescaledDist, TulapDist, cnd_identity_check
from cndtest.dist import BinomialModel, binom_pmf_vector
from cndtest.dptest import check_fdp, free_pvalue, ump_binary
from cndtest.kernels import hyper_weights
from cndtest.simulate import SimConfig, collect_pvalues, run_and_save
from cndtest.tradeoff import eps_delta_tradeoff, gdp_tradeoff, twofold
from cndtest.twoprop import EpsDP, semiprivate_pvalues_batch, semiprivate_threshold

from oracles import lp_optimal_power

EPS_DELTA_CASES = [(0.1, 0.0), (1.0, 0.0), (1.0, 0.01), (3.0, 0.05)]
SQRT2 = math.sqrt(2.0)


class _Criterion:
    def __init__(self, num, desc, budget_s):
        self.num = num
        self.desc = desc
        self.budget_s = budget_s
        self.start = time.time()
        self.failures = []

    def check(self, ok, detail):
        if not ok:
            self.failures.append(detail)

    def finish(self):
        elapsed = time.time() - self.start
        if elapsed > self.budget_s:
            self.failures.append(f"runtime {elapsed:.1f}s over budget {self.budget_s}s")
        status = "PASS" if not self.failures else "FAIL"
        print(f"{status}  criterion {self.num}: {self.desc} ({elapsed:.1f}s)")
        for msg in self.failures:
            print(f"      - {msg}")
        assert not self.failures, f"criterion {self.num}: " + "; ".join(self.failures)


def test_criterion_1_tulap_equals_construction():
    crit = _Criterion(1, "Tulap == constructed CND on [-10, 10] (4 parameter pairs)", 5.0)
    xs = np.arange(-10.0, 10.0 + 1e-12, 0.01)
    for eps, delta in EPS_DELTA_CASES:
        tulap = TulapDist.from_eps_delta(eps, delta)
        cnd = CndDist(eps_delta_tradeoff(eps, delta))
        sup = float(np.max(np.abs(tulap.cdf(xs) - cnd.cdf(xs))))
        crit.check(sup <= 1e-9, f"(eps={eps}, delta={delta}): sup dev {sup:.2e} > 1e-9")
    crit.finish()


def test_criterion_2_cnd_identity_suite():
    crit = _Criterion(2, "CND identity suite (6 tradeoff fns + rescaling check)", 10.0)
    grid = np.linspace(0.0, 1.0, 1001)[1:-1]
    fns = {
        "f(1,0)": eps_delta_tradeoff(1.0, 0.0),
        "f(0.1,0)": eps_delta_tradeoff(0.1, 0.0),
        "f(1,0.01)": eps_delta_tradeoff(1.0, 0.01),
        "G(0.5)": gdp_tradeoff(0.5),
        "G(1)": gdp_tradeoff(1.0),
        "twofold(f(1,0))": twofold(eps_delta_tradeoff(1.0, 0.0)),
    }
    for name, f in fns.items():
        rep = cnd_identity_check(CndDist(f), f, alpha_grid=grid)
        crit.check(rep.max_symmetry_dev <= 1e-12,
                   f"{name}: symmetry dev {rep.max_symmetry_dev:.2e} > 1e-12")
        crit.check(rep.max_tradeoff_dev <= 1e-9,
                   f"{name}: identity dev {rep.max_tradeoff_dev:.2e} > 1e-9")
    for name in ("f(1,0)", "G(1)"):
        f = fns[name]
        rep = cnd_identity_check(RescaledDist(CndDist(f), 2.0), twofold(f), alpha_grid=grid)
        crit.check(rep.max_tradeoff_dev <= 1e-9,
                   f"F(2.) vs twofold({name}): dev {rep.max_tradeoff_dev:.2e} > 1e-9")
    crit.finish()


def test_criterion_3_gil_pelaez():
    crit = _Criterion(3, "Gil-Pelaez: normal cdf to 1e-6; T-statistic cdf vs 2e5-draw MC", 60.0)
    std_normal = CharFn(eval=lambda t: np.exp(-0.5 * t * t) + 0.0j, decay=("gauss", 0.5), freq=0.0)
    worst = max(
        abs(gil_pelaez_cdf(std_normal, float(x), 1e-8) - float(ndtr(x)))
        for x in np.arange(-3.0, 3.0 + 1e-12, 0.5)
    )
    crit.check(worst <= 1e-6, f"normal cdf error {worst:.2e} > 1e-6")

    m = n = 30
    theta, eps, reps = 0.5, 0.1, 200_000
    rng = np.random.default_rng(1729)
    tulap = TulapDist.from_eps_delta(eps)
    stats = (rng.binomial(m, theta, reps) + tulap.sample(rng, reps)) / m - (
        rng.binomial(n, theta, reps) + tulap.sample(rng, reps)
    ) / n
    stats.sort()
    grid = np.linspace(-1.4, 1.4, 57)
    cdf = np.array([tstat_cdf(x, theta, m, n, ("eps", eps), 1e-6) for x in grid])
    emp = np.searchsorted(stats, grid, side="right") / reps
    ks = float(np.max(np.abs(cdf - emp)))
    crit.check(ks <= 0.01, f"T-statistic KS {ks:.4f} > 0.01")
    crit.finish()


def test_criterion_4_ump_binary():
    crit = _Criterion(4, "UMP binary: exact size, f-DP slack, LP optimality at n <= 6", 60.0)
    sweep = [
        (10, 0.5, 1.0, 0.05),
        (25, 0.2, 0.3, 0.1),
        (40, 0.8, 2.0, 0.01),
        (15, 0.5, 0.1, 0.05),
        (30, 0.35, 1.0, 0.1),
    ]
    for n, theta, eps, alpha in sweep:
        pmf = binom_pmf_vector(BinomialModel(n, theta))
        noise = TulapDist.from_eps_delta(eps)
        t = ump_binary(pmf, eps_delta_tradeoff(eps, 0.0), alpha, noise=noise)
        err = abs(t.size() - alpha)
        crit.check(err <= 1e-9, f"(n={n}, theta={theta}, eps={eps}): size error {err:.2e}")
        slack = check_fdp(t.as_testfn(), eps_delta_tradeoff(eps, 0.0)).max_slack
        crit.check(slack <= 1e-12, f"(n={n}): f-DP slack {slack:.2e} > 1e-12")

    eps, alpha = 1.0, 0.1
    f = eps_delta_tradeoff(eps, 0.0)
    noise = TulapDist.from_eps_delta(eps)
    for n in (4, 5, 6):
        for theta0, theta1 in ((0.5, 0.8), (0.3, 0.6)):
            null_pmf = binom_pmf_vector(BinomialModel(n, theta0))
            alt_pmf = binom_pmf_vector(BinomialModel(n, theta1))
            t = ump_binary(null_pmf, f, alpha, noise=noise)
            power = float(alt_pmf @ t.phi_values())
            lp = lp_optimal_power(eps, null_pmf, alt_pmf, alpha)
            crit.check(
                power >= lp - 1e-6,
                f"(n={n}, {theta0}->{theta1}): power {power:.8f} below LP optimum {lp:.8f}",
            )
    crit.finish()


def test_criterion_5_free_pvalue_contract():
    crit = _Criterion(5, "free p-value: null uniformity and Bern(phi(x)) indicator", 60.0)
    n, theta0, eps, alpha0, reps = 10, 0.4, 1.0, 0.05, 10_000
    f = eps_delta_tradeoff(eps, 0.0)
    noise = TulapDist.from_eps_delta(eps)
    pmf = binom_pmf_vector(BinomialModel(n, theta0))
    t = ump_binary(pmf, f, alpha0, noise=noise)
    phi = t.as_testfn()
    model = {x: float(pmf[x]) for x in range(n + 1)}

    rng = np.random.default_rng(40)
    counts = rng.binomial(n, theta0, reps)
    draws = noise.sample(rng, reps)
    ps = np.array([
        free_pvalue(float(noise.quantile(t.phi(int(x)))) + nz, phi, [model], noise)
        for x, nz in zip(counts, draws)
    ])
    for alpha in (0.01, 0.05, 0.1):
        rate = float(np.mean(ps <= alpha))
        sigma = math.sqrt(alpha * (1 - alpha) / reps)
        crit.check(
            abs(rate - alpha) <= 3.0 * sigma,
            f"P(p <= {alpha}) = {rate:.4f} strays beyond 3 sigma ({3 * sigma:.4f})",
        )

    for x in range(0, n + 1, 2):
        target = t.phi(x)
        q = float(noise.quantile(target))
        stat = q + noise.sample(rng, reps)
        rate = float(np.mean(stat >= 0.0))
        sigma = math.sqrt(max(target * (1.0 - target), 1e-12) / reps)
        crit.check(
            abs(rate - target) <= max(3.0 * sigma, 1e-3),
            f"I(T>=0) at x={x}: {rate:.4f} vs phi(x)={target:.4f}",
        )
    crit.finish()


def test_criterion_6_semiprivate_exactness():
    crit = _Criterion(6, "semi-private: conditional size sweep and MC type I", 120.0)
    noise = TulapDist.from_eps_delta(1.0)
    alpha = 0.05
    for m, n in ((40, 40), (40, 25), (13, 40), (7, 5)):
        for z in range(0, m + n + 1):
            c = semiprivate_threshold(m, n, z, noise, alpha)
            lo, w = hyper_weights(m, n, z, 0.0)
            h = np.arange(lo, lo + len(w), dtype=float)
            size = float(np.asarray(w) @ noise.cdf(2.0 * h - z - c))
            if abs(size - alpha) > 1e-8:
                crit.check(False, f"(m={m}, n={n}, z={z}): size error {abs(size - alpha):.2e}")
                break

    m = n = 30
    reps = 10_000
    rng = np.random.default_rng(41)
    for theta0 in (0.2, 0.5, 0.8):
        xs = rng.binomial(n, theta0, reps)
        ys = rng.binomial(m, theta0, reps)
        draws = noise.sample(rng, reps)
        ps = semiprivate_pvalues_batch(xs, ys, draws, m, n, noise)
        rate = float(np.mean(ps <= alpha))
        sigma = math.sqrt(alpha * (1 - alpha) / reps)
        crit.check(
            abs(rate - alpha) <= 3.0 * sigma,
            f"theta0={theta0}: type I {rate:.4f} beyond 3 sigma of {alpha}",
        )
    crit.finish()


def test_criterion_7_type1_reproduction():
    crit = _Criterion(7, "type I sweep: inversion in-band, dp_normal miscalibrated", 600.0)
    grid = [round(0.05 * i, 2) for i in range(1, 20)]
    cfg = SimConfig(
        experiment="type1",
        m=30,
        n=30,
        privacy=EpsDP(0.1),
        methods=["inversion", "dp_normal"],
        alpha=0.05,
        theta_grid=grid,
        replicates=5000,
        seed=20260810,
        workers=2,
        quad_tol=1e-4,
        dp_normal_corrected=True,
    )
    pvals = collect_pvalues(cfg)

    for alpha in (0.01, 0.05):
        band = 3.0 * math.sqrt(alpha * (1.0 - alpha) / cfg.replicates)
        in_band = sum(
            abs(float(np.mean(pvals[(i, "inversion")] <= alpha)) - alpha) <= band
            for i in range(len(grid))
        )
        crit.check(
            in_band >= 18,
            f"inversion at alpha={alpha}: only {in_band}/19 theta values inside the 3-sigma band",
        )

    alpha = 0.01
    band = 3.0 * math.sqrt(alpha * (1.0 - alpha) / cfg.replicates)
    dp_rates = np.array(
        [float(np.mean(pvals[(i, "dp_normal")] <= alpha)) for i in range(len(grid))]
    )
    level = float(dp_rates.mean())
    outside = int(np.sum(np.abs(dp_rates - alpha) > band))
    crit.check(
        abs(level - 0.016) <= 0.004,
        f"dp_normal level {level:.4f} outside 0.016 +/- 0.004",
    )
    crit.check(
        outside >= 15,
        f"dp_normal at alpha=0.01 inside the band too often ({19 - outside}/19 in-band)",
    )
    crit.finish()


def test_criterion_8_power_reproduction():
    crit = _Criterion(8, "power curves: method ordering and the sqrt-2 budget heuristic", 900.0)
    scaled = f"semiprivate_scaled:{1.0 / SQRT2!r}"
    order = ["nonprivate_umpu", "semiprivate", "inversion", "plugin"]
    cfg = SimConfig(
        experiment="power",
        m=50,
        n=50,
        privacy=EpsDP(0.1),
        methods=order + [scaled],
        alpha=0.05,
        theta_x=0.5,
        theta_y=0.6,
        sizes=[50, 100, 200, 400],
        replicates=2000,
        seed=20260811,
        workers=2,
        quad_tol=1e-4,
    )
    pvals = collect_pvalues(cfg)

    def rate_se(cell, token):
        p = pvals[(cell, token)]
        r = float(np.mean(p <= cfg.alpha))
        return r, math.sqrt(r * (1.0 - r) / p.size)

    for cell, size in enumerate(cfg.sizes):
        rates = {tok: rate_se(cell, tok) for tok in cfg.methods}
        for hi, lo in zip(order, order[1:]):
            (r_hi, se_hi), (r_lo, se_lo) = rates[hi], rates[lo]
            allowance = 2.0 * math.sqrt(se_hi**2 + se_lo**2)
            crit.check(
                r_hi >= r_lo - allowance,
                f"m=n={size}: power({hi})={r_hi:.3f} < power({lo})={r_lo:.3f} - 2se",
            )
        (r_inv, se_inv), (r_sc, se_sc) = rates["inversion"], rates[scaled]
        allowance = 2.0 * math.sqrt(se_inv**2 + se_sc**2)
        crit.check(
            abs(r_inv - r_sc) <= allowance,
            f"m=n={size}: |power(inversion) - power(semiprivate eps/sqrt2)| = "
            f"{abs(r_inv - r_sc):.4f} > 2se = {allowance:.4f}",
        )
    crit.finish()


def test_criterion_9_reproducibility(tmp_path):
    crit = _Criterion(9, "simulate CSV is byte-identical across worker counts", 120.0)

    def cfg(workers):
        return SimConfig(
            experiment="type1",
            m=30,
            n=30,
            privacy=EpsDP(0.5),
            methods=["inversion", "semiprivate", "dp_normal"],
            alpha=0.05,
            theta_grid=[0.3, 0.7],
            replicates=400,
            seed=77,
            workers=workers,
        )

    out1, out2, out3 = (tmp_path / f"w{i}.csv" for i in (1, 2, 3))
    run_and_save(cfg(1), out1)
    run_and_save(cfg(2), out2)
    run_and_save(cfg(3), out3)
    b1, b2, b3 = out1.read_bytes(), out2.read_bytes(), out3.read_bytes()
    crit.check(b1 == b2, "workers=1 vs workers=2 CSVs differ")
    crit.check(b1 == b3, "workers=1 vs workers=3 CSVs differ")
    crit.finish()
