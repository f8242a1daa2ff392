"""Seeded Monte Carlo harness for the two-proportion experiments:
type I error sweeps, p-value ecdfs, and power curves, with CSV output and
a JSON run manifest.

Reproducibility contract: every replicate derives its own generators from
SeedSequence(seed, spawn_key=(experiment tag, cell index, stream, rep)).
The data stream (stream 0) is shared by all methods in a cell so method
comparisons are paired; each method's noise stream is keyed by its
position in the methods list.  Results are therefore independent of the
worker count and of which other methods run alongside.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass
from multiprocessing import get_context
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from ._backend import active_backend
from .cnd import GaussianCnd, TulapDist
from .dist import laplace_sample
from .errors import ConfigError
from .kernels import hyper_weights
from .twoprop import (
    EpsDP,
    GDP,
    classic_pvalues_batch,
    dp_normal_pvalues_batch,
    inversion_pvalue,
    plugin_pvalues_batch,
    semiprivate_pvalues_batch,
    umpu_pvalues_batch,
)

_EXPERIMENT_TAGS = {"type1": 1, "pvalue_ecdf": 2, "power": 3}
_KNOWN_METHODS = (
    "classic",
    "dp_normal",
    "plugin",
    "inversion",
    "semiprivate",
    "nonprivate_umpu",
)
_BLOCK = 500  # replicate block per task; fixed so output ignores worker count


def parse_method(token: str) -> Tuple[str, float]:
    """'semiprivate_scaled:0.7071' -> ('semiprivate', 0.7071); plain names
    map to themselves with budget factor 1."""
    if token.startswith("semiprivate_scaled:"):
        try:
            factor = float(token.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad budget factor in method {token!r}")
        if not factor > 0:
            raise ConfigError(f"budget factor must be positive in {token!r}")
        return "semiprivate", factor
    if token in _KNOWN_METHODS:
        return token, 1.0
    raise ConfigError(
        f"unknown method {token!r}; expected one of {', '.join(_KNOWN_METHODS)} "
        "or semiprivate_scaled:<factor>"
    )


@dataclass
class SimConfig:
    experiment: str
    m: int
    n: int
    privacy: Optional[object] = None  # EpsDP or GDP; optional for non-private runs
    methods: Sequence[str] = ("inversion",)
    alpha: float = 0.05
    theta_grid: Optional[Sequence[float]] = None  # type1
    theta0: Optional[float] = None  # pvalue_ecdf
    theta_x: Optional[float] = None  # power
    theta_y: Optional[float] = None  # power
    sizes: Optional[Sequence[int]] = None  # power: m = n values
    replicates: int = 1000
    seed: int = 0
    workers: int = 1
    quad_tol: float = 1e-4
    # restore the (1/m + 1/n) factor on the pooled-variance term of the
    # DP normal test; the unscaled form is the default
    dp_normal_corrected: bool = False

    def validate(self) -> None:
        if self.experiment not in _EXPERIMENT_TAGS:
            raise ConfigError(
                f"experiment must be one of {sorted(_EXPERIMENT_TAGS)}, got {self.experiment!r}"
            )
        if self.m < 1 or self.n < 1:
            raise ConfigError(f"sample sizes must be >= 1, got m={self.m}, n={self.n}")
        if self.replicates < 1:
            raise ConfigError(f"replicates must be >= 1, got {self.replicates}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if not self.methods:
            raise ConfigError("methods must be nonempty")
        needs_eps = {"dp_normal", "plugin"}
        needs_privacy = needs_eps | {"inversion", "semiprivate"}
        for token in self.methods:
            name, _ = parse_method(token)
            if name in needs_privacy and self.privacy is None:
                raise ConfigError(f"method {token!r} requires a privacy parameter")
            if name in needs_eps and not isinstance(self.privacy, EpsDP):
                raise ConfigError(f"method {token!r} requires EpsDP privacy")
        if self.experiment == "type1":
            if not self.theta_grid:
                raise ConfigError("type1 requires theta_grid")
            bad = [t for t in self.theta_grid if not 0.0 <= t <= 1.0]
            if bad:
                raise ConfigError(f"theta_grid values outside [0, 1]: {bad}")
        elif self.experiment == "pvalue_ecdf":
            if self.theta0 is None or not 0.0 <= self.theta0 <= 1.0:
                raise ConfigError(f"pvalue_ecdf requires theta0 in [0, 1], got {self.theta0}")
        else:  # power
            if self.theta_x is None or self.theta_y is None:
                raise ConfigError("power requires theta_x and theta_y")
            for name, t in (("theta_x", self.theta_x), ("theta_y", self.theta_y)):
                if not 0.0 <= t <= 1.0:
                    raise ConfigError(f"{name} must be in [0, 1], got {t}")
            if self.sizes is not None and any(s < 1 for s in self.sizes):
                raise ConfigError(f"sizes must be positive, got {list(self.sizes)}")

    def cells(self) -> List[tuple]:
        """(cell_idx, m, n, theta_x, theta_y) per sweep point."""
        if self.experiment == "type1":
            return [
                (i, self.m, self.n, t, t) for i, t in enumerate(self.theta_grid)
            ]
        if self.experiment == "pvalue_ecdf":
            return [(0, self.m, self.n, self.theta0, self.theta0)]
        sizes = list(self.sizes) if self.sizes else [self.m]
        return [(i, s, s, self.theta_x, self.theta_y) for i, s in enumerate(sizes)]


def _privacy_tuple(privacy) -> Optional[tuple]:
    if privacy is None:
        return None
    if isinstance(privacy, EpsDP):
        return ("eps", privacy.eps)
    if isinstance(privacy, GDP):
        return ("mu", privacy.mu)
    raise ConfigError(f"privacy must be EpsDP or GDP, got {type(privacy).__name__}")


def _rng(seed: int, key: tuple) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _semiprivate_generic(xs, ys, stats, m, n, noise) -> np.ndarray:
    """Semi-private p-values for non-Tulap noise (exact hypergeometric
    summation with the noise cdf evaluated on the support)."""
    out = np.empty(len(xs))
    zs = np.asarray(xs) + np.asarray(ys)
    for z in np.unique(zs):
        idx = np.nonzero(zs == z)[0]
        lo, w = hyper_weights(m, n, int(z), 0.0)
        h = np.arange(lo, lo + len(w), dtype=float)
        args = 2.0 * h[None, :] - z - np.asarray(stats)[idx, None]
        out[idx] = np.asarray(noise.cdf(args.ravel())).reshape(args.shape) @ np.asarray(w)
    return out


def _block_pvalues(task: dict) -> np.ndarray:
    """p-values for one (cell, method, replicate block) task."""
    seed = task["seed"]
    tag = task["tag"]
    cell = task["cell_idx"]
    midx = task["method_idx"]
    m, n = task["m"], task["n"]
    theta_x, theta_y = task["theta_x"], task["theta_y"]
    name, factor = parse_method(task["method"])
    privacy = task["privacy"]
    reps = range(task["rep_lo"], task["rep_hi"])

    xs = np.empty(len(reps), dtype=np.int64)
    ys = np.empty(len(reps), dtype=np.int64)
    for j, r in enumerate(reps):
        data_rng = _rng(seed, (tag, cell, 0, r))
        xs[j] = data_rng.binomial(n, theta_x)
        ys[j] = data_rng.binomial(m, theta_y)

    def noise_rng(r):
        return _rng(seed, (tag, cell, 1 + midx, r))

    if name == "classic":
        p, _ = classic_pvalues_batch(xs, ys, m, n)
        return np.asarray(p)

    if name == "nonprivate_umpu":
        us = np.array([noise_rng(r).random() - 0.5 for r in reps])
        return umpu_pvalues_batch(xs, ys, us, m, n)

    kind, value = privacy
    if name == "dp_normal":
        l1 = np.empty(len(reps))
        l2 = np.empty(len(reps))
        for j, r in enumerate(reps):
            g = noise_rng(r)
            l1[j] = laplace_sample(1.0 / value, g, 1)[0]
            l2[j] = laplace_sample(1.0 / value, g, 1)[0]
        p, _, _, _ = dp_normal_pvalues_batch(
            xs, ys, l1, l2, m, n, value, corrected_variance=task["dp_normal_corrected"]
        )
        return np.asarray(p)

    if name == "plugin":
        noise = TulapDist(b=math.exp(-0.5 * value), q=0.0)
        l1 = np.empty(len(reps))
        l2 = np.empty(len(reps))
        for j, r in enumerate(reps):
            draws = noise.sample(noise_rng(r), 2)
            l1[j], l2[j] = draws[0], draws[1]
        return plugin_pvalues_batch(xs, ys, l1, l2, m, n, value)

    if name == "semiprivate":
        if kind == "eps":
            noise = TulapDist(b=math.exp(-value * factor), q=0.0)
            draws = np.array([noise.sample(noise_rng(r), 1)[0] for r in reps])
            return semiprivate_pvalues_batch(xs, ys, draws, m, n, noise)
        noise = GaussianCnd(value * factor)
        draws = np.array([noise.sample(noise_rng(r), 1)[0] for r in reps])
        stats = ys - xs + draws
        return _semiprivate_generic(xs, ys, stats, m, n, noise)

    if name == "inversion":
        if kind == "eps":
            noise = TulapDist(b=math.exp(-value), q=0.0)
            pairs = [noise.sample(noise_rng(r), 2) for r in reps]
            priv = EpsDP(value)
        else:
            pairs = [noise_rng(r).normal(0.0, 1.0 / value, 2) for r in reps]
            priv = GDP(value)
        out = np.empty(len(xs))
        for j, (n1, n2) in enumerate(pairs):
            out[j] = inversion_pvalue(
                xs[j] + n1, ys[j] + n2, m, n, priv, tol=task["quad_tol"]
            )
        return out

    raise ConfigError(f"unhandled method {name!r}")


def _block_worker(task: dict):
    return task["key"], _block_pvalues(task)


def collect_pvalues(cfg: SimConfig) -> Dict[Tuple[int, str], np.ndarray]:
    """Run the full sweep, returning p-value arrays keyed by
    (cell_idx, method token).  This is the deterministic core every
    experiment reduces from."""
    cfg.validate()
    tag = _EXPERIMENT_TAGS[cfg.experiment]
    privacy = _privacy_tuple(cfg.privacy)

    tasks = []
    for cell_idx, m, n, tx, ty in cfg.cells():
        for midx, token in enumerate(cfg.methods):
            for lo in range(0, cfg.replicates, _BLOCK):
                hi = min(lo + _BLOCK, cfg.replicates)
                tasks.append(
                    {
                        "key": (cell_idx, token, lo),
                        "seed": cfg.seed,
                        "tag": tag,
                        "cell_idx": cell_idx,
                        "method_idx": midx,
                        "method": token,
                        "m": m,
                        "n": n,
                        "theta_x": tx,
                        "theta_y": ty,
                        "privacy": privacy,
                        "quad_tol": cfg.quad_tol,
                        "dp_normal_corrected": cfg.dp_normal_corrected,
                        "rep_lo": lo,
                        "rep_hi": hi,
                    }
                )

    if cfg.workers > 1:
        with get_context("fork").Pool(cfg.workers) as pool:
            results = pool.map(_block_worker, tasks, chunksize=1)
    else:
        results = [_block_worker(t) for t in tasks]

    merged: Dict[Tuple[int, str], list] = {}
    for (cell_idx, token, lo), pvals in sorted(results, key=lambda kv: kv[0][:3]):
        merged.setdefault((cell_idx, token), []).append((lo, pvals))
    out = {}
    for key, chunks in merged.items():
        arr = np.concatenate([p for _, p in sorted(chunks, key=lambda c: c[0])])
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise AssertionError(f"p-values outside [0, 1] for {key}")
        out[key] = arr
    return out


def _rate_row(pvals: np.ndarray, alpha: float) -> Tuple[float, float]:
    rate = float(np.mean(pvals <= alpha))
    stderr = math.sqrt(rate * (1.0 - rate) / pvals.size)
    return rate, stderr


def run_type1(cfg: SimConfig) -> List[dict]:
    """Rows (theta0, method, empirical_type1, mc_stderr)."""
    if cfg.experiment != "type1":
        raise ConfigError(f"run_type1 needs experiment='type1', got {cfg.experiment!r}")
    pvals = collect_pvalues(cfg)
    rows = []
    for cell_idx, _, _, theta0, _ in cfg.cells():
        for token in cfg.methods:
            rate, stderr = _rate_row(pvals[(cell_idx, token)], cfg.alpha)
            rows.append(
                {
                    "theta0": theta0,
                    "method": token,
                    "empirical_type1": rate,
                    "mc_stderr": stderr,
                }
            )
    return rows


def run_pvalue_ecdf(cfg: SimConfig, grid_size: int = 1001) -> List[dict]:
    """Rows (method, alpha, ecdf) on a uniform alpha grid."""
    if cfg.experiment != "pvalue_ecdf":
        raise ConfigError(
            f"run_pvalue_ecdf needs experiment='pvalue_ecdf', got {cfg.experiment!r}"
        )
    pvals = collect_pvalues(cfg)
    grid = np.linspace(0.0, 1.0, grid_size)
    rows = []
    for token in cfg.methods:
        arr = np.sort(pvals[(0, token)])
        ecdf = np.searchsorted(arr, grid, side="right") / arr.size
        for a, e in zip(grid, ecdf):
            rows.append({"method": token, "alpha_grid": float(a), "ecdf": float(e)})
    return rows


def run_power(cfg: SimConfig) -> List[dict]:
    """Rows (sample_size, method, empirical_power, mc_stderr)."""
    if cfg.experiment != "power":
        raise ConfigError(f"run_power needs experiment='power', got {cfg.experiment!r}")
    pvals = collect_pvalues(cfg)
    rows = []
    for cell_idx, m, _, _, _ in cfg.cells():
        for token in cfg.methods:
            rate, stderr = _rate_row(pvals[(cell_idx, token)], cfg.alpha)
            rows.append(
                {
                    "sample_size": m,
                    "method": token,
                    "empirical_power": rate,
                    "mc_stderr": stderr,
                }
            )
    return rows


_COLUMNS = {
    "type1": ("theta0", "method", "empirical_type1", "mc_stderr"),
    "pvalue_ecdf": ("method", "alpha_grid", "ecdf"),
    "power": ("sample_size", "method", "empirical_power", "mc_stderr"),
}


def run_experiment(cfg: SimConfig) -> List[dict]:
    runner = {"type1": run_type1, "pvalue_ecdf": run_pvalue_ecdf, "power": run_power}
    return runner[cfg.experiment](cfg)


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def write_csv(rows: List[dict], experiment: str, path) -> None:
    cols = _COLUMNS[experiment]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in cols])


def write_manifest(cfg: SimConfig, path, csv_path, wall_time_s: float, n_rows: int) -> None:
    payload = {
        "config": {
            **{k: (list(v) if isinstance(v, (tuple, list)) else v)
               for k, v in asdict(cfg).items() if k != "privacy"},
            "privacy": _privacy_tuple(cfg.privacy),
        },
        "version": __version__,
        "backend": active_backend(),
        "csv": str(csv_path),
        "rows": n_rows,
        "wall_time_s": wall_time_s,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_and_save(cfg: SimConfig, out_path) -> List[dict]:
    """Run the configured experiment, writing CSV plus a JSON manifest."""
    start = time.time()
    rows = run_experiment(cfg)
    write_csv(rows, cfg.experiment, out_path)
    write_manifest(cfg, f"{out_path}.manifest.json", out_path, time.time() - start, len(rows))
    return rows
