"""Command-line interface.

Subcommands: sample (draw noise), test (one-shot two-proportion test,
JSON out), simulate (type1 | ecdf | power sweeps, CSV out), check (run the
built-in identity and inversion validation suites).

Exit codes: 0 ok, 2 configuration error, 3 numeric nonconvergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import __version__
from ._backend import active_backend
from .cnd import CndDist, GaussianCnd, RescaledDist, TulapDist, cnd_identity_check, noise_from_config
from .charfn import CharFn, gil_pelaez_cdf
from .errors import (
    BracketFailureError,
    ConfigError,
    InvalidParameterError,
    QuadratureError,
    RecursionCapError,
)
from .simulate import SimConfig, run_and_save
from .tradeoff import eps_delta_tradeoff, gdp_tradeoff, twofold
from .twoprop import (
    EpsDP,
    GDP,
    TwoSampleData,
    classic_normal_test,
    dp_normal_test,
    inversion_test,
    nonprivate_umpu,
    plugin_test,
    semiprivate_test,
    two_sided,
)

_CONFIG_ERRORS = (ConfigError, InvalidParameterError, ValueError, KeyError)
_NUMERIC_ERRORS = (QuadratureError, BracketFailureError, RecursionCapError)


def _add_privacy_flags(p):
    p.add_argument("--eps", type=float, default=None, help="epsilon of (eps, delta)-DP")
    p.add_argument("--delta", type=float, default=None, help="delta of (eps, delta)-DP")
    p.add_argument("--mu", type=float, default=None, help="mu of Gaussian DP")


def _privacy_from_args(args):
    if args.mu is not None:
        if args.eps is not None:
            raise ConfigError("give either --eps or --mu, not both")
        return GDP(args.mu)
    if args.eps is not None:
        return EpsDP(args.eps)
    return None


def _parse_floats(text):
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _parse_ints(text):
    return [int(tok) for tok in text.split(",") if tok.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cndtest",
        description="Canonical noise distributions and private hypothesis tests",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="draw canonical / Tulap / Gaussian noise")
    p_sample.add_argument(
        "--kind",
        choices=["tulap", "cnd", "gaussian"],
        default="tulap",
        help="noise family; 'cnd' uses the generic construction",
    )
    _add_privacy_flags(p_sample)
    p_sample.add_argument("-k", "--count", type=int, default=1)
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument("--format", choices=["text", "csv"], default="text")
    p_sample.add_argument("--out", default=None, help="output file (default stdout)")

    p_test = sub.add_parser("test", help="run one two-proportion test, JSON report out")
    p_test.add_argument(
        "--method",
        required=True,
        choices=["classic", "dp_normal", "plugin", "inversion", "semiprivate", "nonprivate_umpu"],
    )
    p_test.add_argument("--x", type=int, required=True, help="successes in the first group")
    p_test.add_argument("--y", type=int, required=True, help="successes in the second group")
    p_test.add_argument("--n", type=int, required=True, help="size of the first group")
    p_test.add_argument("--m", type=int, required=True, help="size of the second group")
    _add_privacy_flags(p_test)
    p_test.add_argument("--seed", type=int, default=0)
    p_test.add_argument("--two-sided", action="store_true", dest="twosided")
    p_test.add_argument("--out", default=None)

    p_sim = sub.add_parser("simulate", help="Monte Carlo sweeps, CSV out")
    p_sim.add_argument("--config", default=None, help="JSON config file; flags override")
    p_sim.add_argument("--experiment", choices=["type1", "pvalue_ecdf", "power"], default=None)
    p_sim.add_argument("--m", type=int, default=None)
    p_sim.add_argument("--n", type=int, default=None)
    _add_privacy_flags(p_sim)
    p_sim.add_argument("--alpha", type=float, default=None)
    p_sim.add_argument("--theta0", default=None,
                       help="comma list for type1; single value for pvalue_ecdf")
    p_sim.add_argument("--theta-x", type=float, default=None, dest="theta_x")
    p_sim.add_argument("--theta-y", type=float, default=None, dest="theta_y")
    p_sim.add_argument("--sizes", default=None, help="comma list of m=n values (power)")
    p_sim.add_argument("--reps", type=int, default=None)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--workers", type=int, default=None)
    p_sim.add_argument("--methods", default=None, help="comma list of method tokens")
    p_sim.add_argument("--quad-tol", type=float, default=None, dest="quad_tol")
    p_sim.add_argument("--dp-normal-corrected", action="store_true", default=None,
                       dest="dp_normal_corrected",
                       help="restore the (1/m + 1/n) pooled-variance factor in dp_normal")
    p_sim.add_argument("--out", required=True)

    p_check = sub.add_parser("check", help="identity / inversion validation suites")
    p_check.add_argument("--quick", action="store_true", help="coarser grids")

    return parser


def _cmd_sample(args) -> int:
    cfg = {"kind": args.kind, "eps": args.eps, "delta": args.delta or 0.0, "mu": args.mu}
    if args.kind in ("tulap",) and args.eps is None:
        raise ConfigError("sample --kind tulap requires --eps")
    if args.kind == "gaussian" and args.mu is None:
        raise ConfigError("sample --kind gaussian requires --mu")
    if args.kind == "cnd" and args.eps is None and args.mu is None:
        raise ConfigError("sample --kind cnd requires --eps or --mu")
    dist = noise_from_config({k: v for k, v in cfg.items() if v is not None})
    if args.count < 0:
        raise ConfigError(f"count must be nonnegative, got {args.count}")
    draws = dist.sample(np.random.default_rng(args.seed), args.count)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        if args.format == "csv":
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["sample"])
            for v in draws:
                writer.writerow([repr(float(v))])
        else:
            for v in draws:
                fh.write(f"{float(v)!r}\n")
    finally:
        if args.out:
            fh.close()
    return 0


def _cmd_test(args) -> int:
    data = TwoSampleData(x=args.x, y=args.y, n=args.n, m=args.m)
    rng = np.random.default_rng(args.seed)
    privacy = _privacy_from_args(args)

    if args.method == "classic":
        report = classic_normal_test(data)
    elif args.method == "nonprivate_umpu":
        report = nonprivate_umpu(data, rng)
    elif args.method == "inversion":
        if privacy is None:
            raise ConfigError("inversion requires --eps or --mu")
        report = inversion_test(data, privacy, rng)
    elif args.method == "semiprivate":
        if privacy is None:
            raise ConfigError("semiprivate requires --eps or --mu")
        if isinstance(privacy, EpsDP):
            noise = TulapDist.from_eps_delta(privacy.eps, args.delta or 0.0)
        else:
            noise = GaussianCnd(privacy.mu)
        report = semiprivate_test(data, noise, rng)
    elif args.method == "dp_normal":
        if not isinstance(privacy, EpsDP):
            raise ConfigError("dp_normal requires --eps")
        report = dp_normal_test(data, privacy.eps, rng)
    else:  # plugin
        if not isinstance(privacy, EpsDP):
            raise ConfigError("plugin requires --eps")
        report = plugin_test(data, privacy.eps, rng)

    extra = {"seed": args.seed}
    if args.twosided:
        extra["p_value_two_sided"] = two_sided(report.p_value)
    text = report.to_json(**extra)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _cmd_simulate(args) -> int:
    cfg_dict = {}
    if args.config:
        with open(args.config) as fh:
            cfg_dict.update(json.load(fh))

    def override(key, value):
        if value is not None:
            cfg_dict[key] = value

    override("experiment", args.experiment)
    override("m", args.m)
    override("n", args.n)
    override("alpha", args.alpha)
    override("theta_x", args.theta_x)
    override("theta_y", args.theta_y)
    override("replicates", args.reps)
    override("seed", args.seed)
    override("workers", args.workers)
    override("quad_tol", args.quad_tol)
    override("dp_normal_corrected", args.dp_normal_corrected)
    if args.eps is not None:
        cfg_dict["eps"] = args.eps
    if args.mu is not None:
        cfg_dict["mu"] = args.mu
    if args.methods is not None:
        cfg_dict["methods"] = [tok.strip() for tok in args.methods.split(",") if tok.strip()]
    if args.sizes is not None:
        cfg_dict["sizes"] = _parse_ints(args.sizes)
    if args.theta0 is not None:
        cfg_dict["theta0"] = args.theta0

    experiment = cfg_dict.get("experiment")
    if experiment is None:
        raise ConfigError("simulate requires --experiment (or experiment in --config)")

    theta_grid = None
    theta0 = None
    raw_theta0 = cfg_dict.pop("theta0", None)
    if raw_theta0 is not None:
        values = _parse_floats(raw_theta0) if isinstance(raw_theta0, str) else (
            list(raw_theta0) if isinstance(raw_theta0, (list, tuple)) else [float(raw_theta0)]
        )
        if experiment == "type1":
            theta_grid = values
        else:
            if len(values) != 1:
                raise ConfigError("pvalue_ecdf takes a single theta0")
            theta0 = values[0]
    if "theta_grid" in cfg_dict:
        theta_grid = [float(t) for t in cfg_dict.pop("theta_grid")]

    privacy = None
    if cfg_dict.get("mu") is not None:
        privacy = GDP(float(cfg_dict.pop("mu")))
        cfg_dict.pop("eps", None)
    elif cfg_dict.get("eps") is not None:
        privacy = EpsDP(float(cfg_dict.pop("eps")))

    known = {
        "experiment", "m", "n", "alpha", "theta_x", "theta_y", "sizes",
        "replicates", "seed", "workers", "methods", "quad_tol",
        "dp_normal_corrected",
    }
    unknown = set(cfg_dict) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    cfg = SimConfig(
        experiment=experiment,
        m=int(cfg_dict.get("m", 30)),
        n=int(cfg_dict.get("n", 30)),
        privacy=privacy,
        methods=list(cfg_dict.get("methods", ["inversion"])),
        alpha=float(cfg_dict.get("alpha", 0.05)),
        theta_grid=theta_grid,
        theta0=theta0,
        theta_x=cfg_dict.get("theta_x"),
        theta_y=cfg_dict.get("theta_y"),
        sizes=cfg_dict.get("sizes"),
        replicates=int(cfg_dict.get("replicates", 1000)),
        seed=int(cfg_dict.get("seed", 0)),
        workers=int(cfg_dict.get("workers", 1)),
        quad_tol=float(cfg_dict.get("quad_tol", 1e-4)),
        dp_normal_corrected=bool(cfg_dict.get("dp_normal_corrected", False)),
    )
    rows = run_and_save(cfg, args.out)
    print(f"wrote {len(rows)} rows to {args.out} [{active_backend()} backend]")
    return 0


def _cmd_check(args) -> int:
    failures = 0

    def report(name, value, bound):
        nonlocal failures
        ok = value <= bound
        failures += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {value:.3e} (bound {bound:g})")

    step = 0.05 if args.quick else 0.01
    xs = np.arange(-10.0, 10.0 + 1e-9, step)
    for eps, delta in [(0.1, 0.0), (1.0, 0.0), (1.0, 0.01), (3.0, 0.05)]:
        tulap = TulapDist.from_eps_delta(eps, delta)
        cnd = CndDist(eps_delta_tradeoff(eps, delta))
        sup = float(np.max(np.abs(tulap.cdf(xs) - cnd.cdf(xs))))
        report(f"tulap == construction (eps={eps}, delta={delta})", sup, 1e-9)

    npts = 201 if args.quick else 999
    grid = np.linspace(0.0, 1.0, npts + 2)[1:-1]
    fns = {
        "f(1,0)": eps_delta_tradeoff(1.0, 0.0),
        "f(0.1,0)": eps_delta_tradeoff(0.1, 0.0),
        "f(1,0.01)": eps_delta_tradeoff(1.0, 0.01),
        "G(0.5)": gdp_tradeoff(0.5),
        "G(1)": gdp_tradeoff(1.0),
        "twofold f(1,0)": twofold(eps_delta_tradeoff(1.0, 0.0)),
    }
    for name, f in fns.items():
        rep = cnd_identity_check(CndDist(f), f, alpha_grid=grid)
        report(f"identity {name}", rep.max_tradeoff_dev, 1e-9)
        report(f"symmetry {name}", rep.max_symmetry_dev, 1e-12)
    for name in ("f(1,0)", "G(1)"):
        f = fns[name]
        rep = cnd_identity_check(RescaledDist(CndDist(f), 2.0), twofold(f), alpha_grid=grid)
        report(f"halved noise vs twofold {name}", rep.max_tradeoff_dev, 1e-9)

    std_normal = CharFn(eval=lambda t: np.exp(-0.5 * t * t) + 0.0j, decay=("gauss", 0.5), freq=0.0)
    from scipy.special import ndtr

    worst = max(
        abs(gil_pelaez_cdf(std_normal, float(x), 1e-8) - float(ndtr(x)))
        for x in np.arange(-3.0, 3.5, 0.5)
    )
    report("gil-pelaez standard normal", worst, 1e-6)

    print("all checks passed" if failures == 0 else f"{failures} check(s) failed")
    return 0 if failures == 0 else 3


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors already
        return int(exc.code or 0)
    try:
        if args.command == "sample":
            return _cmd_sample(args)
        if args.command == "test":
            return _cmd_test(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        return _cmd_check(args)
    except _NUMERIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
