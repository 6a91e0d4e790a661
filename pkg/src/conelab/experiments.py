"""Experiment pipelines: parameter sweeps, CSV tables, SVG figures, manifests.

Each pipeline evaluates one family of metrics over an R- or delta-sweep,
writes one CSV per metric (data rows plus `fit` rows carrying the log-log
slope), one SVG per CSV, and a flat key=value manifest echoing the full
configuration and versions.  All numbers are formatted with %.12g and all
randomness is seeded per task, so reruns with the same configuration are
byte-identical; sweep points may evaluate in parallel worker processes
without affecting the output.
"""

from __future__ import annotations

import csv
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np
import scipy

from .fitting import fit_exponent
from .fourier import (MAX_KERNEL_EVALS, decay_ratio, knapp_sharpness,
                      stationary_phase_diagnostic)
from .maximal import wolff_example_check
from .measures import MAXIMAL_RADII, generate, generate_config
from .operators import bbcr_equivalence_check, build_extension_operator, transference_check
from .svgplot import svg_scatter
from .tangency import classify_pairs, pair_count

VALID_R = (16, 32, 64, 128, 256)
DECAY_KINDS = ("light_tube", "vertical_tube", "knapp_pair", "random_frostman")
CONFIG_KINDS = ("wolff_radii", "random_frostman")
PIPELINE_NAMES = ("decay", "maximal", "pairs", "sharpness", "sigma", "duality")


class BudgetExceededError(ValueError):
    """Estimated kernel evaluations exceed the budget and force is off."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One pipeline run: sweep values, generator family, seeds, output."""

    experiment: str
    R: tuple = ()
    delta: tuple = ()
    kinds: tuple = ()
    seeds: tuple = (0,)
    n: int | None = None
    gamma: str = "both"          # sharpness branch: 'sqrt', 'full', 'both', or an int
    eps: float = 0.05
    q: float | None = None       # None = per-pipeline default
    out: str = "runs"
    workers: int = 1
    force: bool = False

    def __post_init__(self):
        object.__setattr__(self, "R", tuple(int(r) for r in self.R))
        object.__setattr__(self, "delta", tuple(float(d) for d in self.delta))
        object.__setattr__(self, "kinds", tuple(self.kinds))
        seeds = tuple(int(s) for s in self.seeds) or (0,)
        object.__setattr__(self, "seeds", seeds)
        if self.experiment not in PIPELINE_NAMES + ("all",):
            raise ValueError(f"unknown experiment {self.experiment!r}")
        for k in self.kinds:
            if k not in DECAY_KINDS + CONFIG_KINDS:
                raise ValueError(f"unknown kind {k!r}")
        for r in self.R:
            if r not in VALID_R:
                raise ValueError(f"R={r}: must be a power of two in [16, 256]")
        for d in self.delta:
            if not 0 < d < 1:
                raise ValueError(f"delta={d}: must lie in (0, 1)")
        if self.R and self.delta:
            if len(self.R) != len(self.delta) or any(
                    abs(d * r - 1.0) > 1e-12 for r, d in zip(self.R, self.delta)):
                raise ValueError("when both are given, delta must equal 1/R pairwise")


# ---------------------------------------------------------------------------
# formatting and file helpers


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "%.12g" % v
    return str(v)


def _fittable(xs) -> bool:
    """A slope fit needs 3 points and at least 2 distinct x values."""
    return len(xs) >= 3 and min(xs) < max(xs)


def write_csv(path, header, rows) -> None:
    """RFC-quoted CSV with one header row; missing keys write as empty."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(row[k]) if k in row and row[k] is not None
                             else "" for k in header])


def config_items(cfg: ExperimentConfig) -> list:
    items = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ",".join(format_value(x) for x in v)
        elif v is None:
            v = ""
        else:
            v = format_value(v)
        items.append((f.name, v))
    return items


def write_manifest(path, cfg: ExperimentConfig, wall: dict, files: list) -> None:
    lines = [f"{k}={v}" for k, v in config_items(cfg)]
    lines.append(f"python={platform.python_version()}")
    lines.append(f"numpy={np.__version__}")
    lines.append(f"scipy={scipy.__version__}")
    for name, seconds in wall.items():
        lines.append(f"wall_seconds_{name}={seconds:.3f}")
    for name in files:
        lines.append(f"file={name}")
    Path(path).write_text("\n".join(lines) + "\n")


def _run_tasks(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _gamma_branches(spec: str):
    if spec == "both":
        return [("sqrt", None), ("full", None)]
    if spec in ("sqrt", "full"):
        return [(spec, None)]
    return [("fixed", int(spec))]


def _branch_gamma(branch: str, fixed, R: int) -> int:
    if branch == "sqrt":
        return int(round(math.sqrt(R)))
    if branch == "full":
        return R
    return int(fixed)


# ---------------------------------------------------------------------------
# kernel-evaluation budget


def _select_kinds(cfg: ExperimentConfig, allowed: tuple) -> tuple:
    """Kinds this sweep understands; fall back to `allowed` so a shared
    config (the `all` experiment) can name kinds other sweeps own."""
    chosen = tuple(k for k in cfg.kinds if k in allowed)
    return chosen or allowed


def estimate_evals(experiment: str, cfg: ExperimentConfig) -> float:
    q = cfg.q or (8.0 if experiment in ("sharpness", "sigma") else 2.0)
    total = 0.0
    if experiment == "decay":
        Rs = cfg.R or (16, 32, 64, 128)
        kinds = _select_kinds(cfg, DECAY_KINDS)
        for R in Rs:
            nodes = (q * (3.5 * R + 16)) * (q * (3 * R + 16))
            total += len(cfg.seeds) * sum(
                (math.sqrt(R) if k == "light_tube" else R) * nodes for k in kinds)
    elif experiment == "sharpness":
        Rs = cfg.R or (16, 32, 64)
        for R in Rs:
            for branch, fixed in _gamma_branches(cfg.gamma):
                g = _branch_gamma(branch, fixed, R)
                total += g * 4 ** 3 * q * (2 * g + 32) * 64
    elif experiment == "sigma":
        total = 2 * 11 * (q * 300) ** 2 * 4
    elif experiment == "maximal":
        deltas = cfg.delta or tuple(2.0 ** -k for k in range(5, 9))
        kinds = _select_kinds(cfg, CONFIG_KINDS)
        for d in deltas:
            n = cfg.n or int(round(0.5 / d))
            # span raster touches ~4*pi*r*delta/h^2 cells per annulus
            # (h = delta/4) plus one cumsum over the grid per config
            total += len(kinds) * len(cfg.seeds) * (n * 160.0 / d + (8.8 / d) ** 2)
    elif experiment == "pairs":
        deltas = cfg.delta or (2.0 ** -6, 2.0 ** -8)
        for d in deltas:
            n = cfg.n or int(round(0.5 / d))
            total += 2 * len(cfg.seeds) * (n * n + n / d)
    elif experiment == "duality":
        Rs = cfg.R or (32,)
        kinds = _select_kinds(cfg, DECAY_KINDS)
        total = sum(len(kinds) * len(cfg.seeds) * R * 64 * 4000 for R in Rs)
    return total


def check_budget(experiment: str, cfg: ExperimentConfig) -> float:
    est = estimate_evals(experiment, cfg)
    if est > MAX_KERNEL_EVALS / 2 and not cfg.force:
        raise BudgetExceededError(
            f"{experiment}: estimated {est:.3g} kernel evaluations exceeds the "
            f"{MAX_KERNEL_EVALS / 2:.0g} budget; rerun with force enabled")
    return est


# ---------------------------------------------------------------------------
# sweep points (top-level functions so worker processes can import them)


def _decay_point(task):
    kind, R, seed, n, q = task
    params = {} if kind in ("light_tube", "vertical_tube", "knapp_pair") else \
        {"n": n or R}
    nu = generate(kind, R, seed, **params)
    rep = decay_ratio(nu, q)
    if kind == "light_tube":
        param_str = f"gamma={int(round(math.sqrt(R)))}"
    elif kind == "vertical_tube":
        param_str = f"length={R}"
    elif kind == "knapp_pair":
        param_str = f"gamma={int(round(math.sqrt(R)))}"
    else:
        param_str = f"n={params['n']}"
    return {"row": "data", "kind": kind, "R": R, "seed": seed, "params": param_str,
            "mass": rep["mass"], "decay_mean": rep["decay_mean"],
            "plank_lower": rep["plank_lower"], "plank_upper": rep["plank_upper"],
            "ratio": rep["ratio"]}


def _maximal_point(task):
    kind, delta, seed, n = task
    config = generate_config(kind, delta, n, seed, radius_band=MAXIMAL_RADII)
    rep = wolff_example_check(config)
    return {"row": "data", "kind": kind, "delta": delta, "seed": seed,
            "params": f"n={config.count}", "count": config.count,
            "l32_norm": rep["l32_norm"], "l32_dyadic": rep["l32_dyadic"],
            "ratio": rep["ratio"], "ratio_dyadic": rep["ratio_dyadic"]}


def _pairs_point(task):
    kind, delta, seed, n = task
    config = generate_config(kind, delta, n, seed, radius_band=MAXIMAL_RADII)
    table = classify_pairs(config)
    rows = []
    bound = 32.0 * math.log2(1.0 / delta) ** 3
    for D in table.dyadic_D():
        if D < 8 * delta:
            continue
        rep = pair_count(config, D)
        rows.append({"row": "data", "kind": kind, "delta": delta, "seed": seed,
                     "params": f"n={config.count}", "D": rep["D"],
                     "count": rep["count"], "gamma": rep["gamma"],
                     "tau_D": rep["tau_D"], "ratio": rep["ratio"],
                     "log_bound": bound})
    return rows


def _sharpness_point(task):
    branch, R, gamma, q = task
    rep = knapp_sharpness(R, gamma, q=q)
    return {"row": "data", "branch": branch, "R": R, "gamma": gamma,
            "weighted_l2": rep["weighted_l2"], "f_norm2": rep["f_norm2"],
            "ratio": rep["ratio"]}


def _duality_point(task):
    kind, R, seed, n, q = task
    params = {} if kind in ("light_tube", "vertical_tube", "knapp_pair") else \
        {"n": n or R}
    nu = generate(kind, R, seed, **params)
    op = build_extension_operator(nu, q=q, seed=seed)
    rep = bbcr_equivalence_check(op, seed=seed)
    rng = np.random.default_rng(seed)
    subs = [np.ones(nu.mass), (np.arange(nu.mass) % 2).astype(float), rng.random(nu.mass)]
    trans = transference_check(nu, subs, q=q, seed=seed)
    return {"row": "data", "kind": kind, "R": R, "seed": seed,
            "mass": nu.mass, "u_l2_lower": rep["U_L2"], "u_l2_upper": rep["U_L2_upper"],
            "u_l1_lower": rep["U_L1"], "ratio": rep["ratio"],
            "lambda_star": rep["lambda_star"], "transference_ok": trans["ok"]}


# ---------------------------------------------------------------------------
# pipelines


def decay_sweep(cfg: ExperimentConfig, out: Path) -> dict:
    Rs = cfg.R or (16, 32, 64, 128)
    kinds = _select_kinds(cfg, DECAY_KINDS)
    q = cfg.q or 2.0
    tasks = [(kind, R, seed, cfg.n, q)
             for kind in kinds for R in Rs for seed in cfg.seeds]
    rows = _run_tasks(_decay_point, tasks, cfg.workers)
    header = ["row", "kind", "R", "seed", "params", "mass", "decay_mean",
              "plank_lower", "plank_upper", "ratio", "slope", "intercept",
              "residual_max"]
    fit_rows, fits = [], {}
    for kind in kinds:
        pts = [r for r in rows if r["kind"] == kind]
        if _fittable([r["R"] for r in pts]):
            fit = fit_exponent([r["R"] for r in pts], [r["ratio"] for r in pts])
            fits[kind] = fit
            fit_rows.append({"row": "fit", "kind": kind, "slope": fit.slope,
                             "intercept": fit.intercept,
                             "residual_max": fit.residual_max})
    pooled = fit_exponent([r["R"] for r in rows], [r["ratio"] for r in rows]) \
        if _fittable([r["R"] for r in rows]) else None
    if pooled is not None:
        fit_rows.append({"row": "fit", "kind": "pooled", "slope": pooled.slope,
                         "intercept": pooled.intercept,
                         "residual_max": pooled.residual_max})
    write_csv(out / "decay_ratio.csv", header, rows + fit_rows)
    series = [(kind, [r["R"] for r in rows if r["kind"] == kind],
               [r["ratio"] for r in rows if r["kind"] == kind]) for kind in kinds]
    lines = [("pooled", pooled.slope, pooled.intercept)] if pooled else []
    svg_scatter(out / "decay_ratio.svg", series, lines,
                title="decay mean over sqrt(P) * mass", xlabel="R", ylabel="ratio")
    return {"files": ["decay_ratio.csv", "decay_ratio.svg"],
            "fits": {k: f.slope for k, f in fits.items()},
            "pooled_slope": pooled.slope if pooled else None,
            "max_ratio": max(r["ratio"] for r in rows)}


def maximal_sweep(cfg: ExperimentConfig, out: Path) -> dict:
    deltas = cfg.delta or tuple(2.0 ** -k for k in range(5, 9))
    kinds = _select_kinds(cfg, CONFIG_KINDS)
    tasks = [(kind, d, seed, cfg.n or int(round(0.5 / d)))
             for kind in kinds for d in deltas for seed in cfg.seeds]
    rows = _run_tasks(_maximal_point, tasks, cfg.workers)
    header = ["row", "kind", "delta", "seed", "params", "count", "l32_norm",
              "l32_dyadic", "ratio", "ratio_dyadic", "slope", "intercept",
              "residual_max"]
    fit_rows, slopes = [], {}
    for kind in kinds:
        for seed in cfg.seeds:
            pts = [r for r in rows if r["kind"] == kind and r["seed"] == seed]
            if _fittable([r["delta"] for r in pts]):
                fit = fit_exponent([1.0 / r["delta"] for r in pts],
                                   [r["ratio"] for r in pts])
                slopes[(kind, seed)] = fit.slope
                fit_rows.append({"row": "fit", "kind": kind, "seed": seed,
                                 "slope": fit.slope, "intercept": fit.intercept,
                                 "residual_max": fit.residual_max})
    write_csv(out / "wolff_ratio.csv", header, rows + fit_rows)
    series = [(kind, [1.0 / r["delta"] for r in rows if r["kind"] == kind],
               [r["ratio"] for r in rows if r["kind"] == kind]) for kind in kinds]
    svg_scatter(out / "wolff_ratio.svg", series, [],
                title="L3/2 multiplicity over (delta n)^(2/3)",
                xlabel="1/delta", ylabel="ratio")
    return {"files": ["wolff_ratio.csv", "wolff_ratio.svg"],
            "max_slope": max(slopes.values(), default=None),
            "slopes": {f"{k}/{s}": v for (k, s), v in slopes.items()}}


def pairs_sweep(cfg: ExperimentConfig, out: Path) -> dict:
    deltas = cfg.delta or (2.0 ** -6, 2.0 ** -8)
    kinds = _select_kinds(cfg, CONFIG_KINDS)
    tasks = [(kind, d, seed, cfg.n or int(round(0.5 / d)))
             for kind in kinds for d in deltas for seed in cfg.seeds]
    nested = _run_tasks(_pairs_point, tasks, cfg.workers)
    rows = [r for chunk in nested for r in chunk]
    header = ["row", "kind", "delta", "seed", "params", "D", "count", "gamma",
              "tau_D", "ratio", "log_bound"]
    write_csv(out / "pair_counts.csv", header, rows)
    series = [(kind, [r["D"] / r["delta"] for r in rows if r["kind"] == kind],
               [max(r["ratio"], 1e-12) for r in rows if r["kind"] == kind])
              for kind in kinds]
    svg_scatter(out / "pair_counts.svg", series, [],
                title="tangent pairs over gamma^(1/2) (D/delta)^(1/2) n",
                xlabel="D/delta", ylabel="ratio")
    worst = max((r["ratio"] / r["log_bound"] for r in rows), default=0.0)
    return {"files": ["pair_counts.csv", "pair_counts.svg"],
            "max_ratio_over_bound": worst}


def sharpness_sweep(cfg: ExperimentConfig, out: Path) -> dict:
    Rs = cfg.R or (16, 32, 64)
    q = cfg.q or 8.0
    tasks = [(branch, R, _branch_gamma(branch, fixed, R), q)
             for branch, fixed in _gamma_branches(cfg.gamma) for R in Rs]
    rows = _run_tasks(_sharpness_point, tasks, cfg.workers)
    header = ["row", "branch", "R", "gamma", "weighted_l2", "f_norm2", "ratio",
              "slope", "intercept", "residual_max"]
    fit_rows, fits = [], {}
    branches = sorted({r["branch"] for r in rows})
    for branch in branches:
        pts = [r for r in rows if r["branch"] == branch]
        if _fittable([r["R"] for r in pts]):
            fit = fit_exponent([r["R"] for r in pts], [r["ratio"] for r in pts])
            fits[branch] = fit
            fit_rows.append({"row": "fit", "branch": branch, "slope": fit.slope,
                             "intercept": fit.intercept,
                             "residual_max": fit.residual_max})
    write_csv(out / "knapp_sharpness.csv", header, rows + fit_rows)
    series = [(branch, [r["R"] for r in rows if r["branch"] == branch],
               [r["ratio"] for r in rows if r["branch"] == branch])
              for branch in branches]
    lines = [(b, f.slope, f.intercept) for b, f in fits.items()]
    svg_scatter(out / "knapp_sharpness.svg", series, lines,
                title="Knapp ratio: weighted L2 over gamma^(1/2) |f|^2",
                xlabel="R", ylabel="ratio")
    return {"files": ["knapp_sharpness.csv", "knapp_sharpness.svg"],
            "ratios": [r["ratio"] for r in rows],
            "slopes": {b: f.slope for b, f in fits.items()}}


def sigma_decay(cfg: ExperimentConfig, out: Path) -> dict:
    rep = stationary_phase_diagnostic(q=cfg.q or 8.0)
    on_rows = [{"row": "data", "radius": float(r), "value": float(v)}
               for r, v in zip(rep["radii"], rep["on_cone"])]
    fit = fit_exponent(rep["radii"], rep["on_cone"])
    on_rows.append({"row": "fit", "slope": fit.slope, "intercept": fit.intercept,
                    "residual_max": fit.residual_max})
    write_csv(out / "sigma_oncone.csv",
              ["row", "radius", "value", "slope", "intercept", "residual_max"], on_rows)
    svg_scatter(out / "sigma_oncone.svg",
                [("on-cone", rep["radii"], rep["on_cone"])],
                [("fit", fit.slope, fit.intercept)],
                title="sigma_check decay along the cone", xlabel="|x|", ylabel="|value|")
    tr_rows = [{"row": "data", "distance": float(d), "value": float(v)}
               for d, v in zip(rep["distances"], rep["transverse"])]
    tr_rows.append({"row": "check", "transverse_ratio": rep["transverse_ratio"],
                    "doubling_rel": rep["doubling_rel"]})
    write_csv(out / "sigma_transverse.csv",
              ["row", "distance", "value", "transverse_ratio", "doubling_rel"], tr_rows)
    svg_scatter(out / "sigma_transverse.svg",
                [("|x|=50", [max(d, 0.5) for d in rep["distances"]], rep["transverse"])],
                title="sigma_check decay off the cone",
                xlabel="cone distance (0 plotted at 0.5)", ylabel="|value|")
    return {"files": ["sigma_oncone.csv", "sigma_oncone.svg",
                      "sigma_transverse.csv", "sigma_transverse.svg"],
            "slope": fit.slope, "transverse_ratio": rep["transverse_ratio"],
            "doubling_rel": rep["doubling_rel"]}


def duality_check(cfg: ExperimentConfig, out: Path) -> dict:
    Rs = cfg.R or (32,)
    kinds = _select_kinds(cfg, DECAY_KINDS)
    q = cfg.q or 2.0
    tasks = [(kind, R, seed, cfg.n, q)
             for kind in kinds for R in Rs for seed in cfg.seeds]
    rows = _run_tasks(_duality_point, tasks, cfg.workers)
    header = ["row", "kind", "R", "seed", "mass", "u_l2_lower", "u_l2_upper",
              "u_l1_lower", "ratio", "lambda_star", "transference_ok"]
    write_csv(out / "duality.csv", header, rows)
    series = [(kind, [r["R"] for r in rows if r["kind"] == kind],
               [r["ratio"] for r in rows if r["kind"] == kind]) for kind in kinds]
    svg_scatter(out / "duality.svg", series, [],
                title="L2 norm over L1 constant / mass^(1/2)",
                xlabel="R", ylabel="ratio")
    return {"files": ["duality.csv", "duality.svg"],
            "ratios": [r["ratio"] for r in rows],
            "transference_ok": all(r["transference_ok"] for r in rows)}


PIPELINES = {
    "decay": decay_sweep,
    "maximal": maximal_sweep,
    "pairs": pairs_sweep,
    "sharpness": sharpness_sweep,
    "sigma": sigma_decay,
    "duality": duality_check,
}


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Execute the configured pipeline(s); returns the summary per pipeline.

    Output land in <out>/<pipeline>/ as CSV + SVG pairs plus manifest.txt.
    """
    names = PIPELINE_NAMES if cfg.experiment == "all" else (cfg.experiment,)
    summaries = {}
    for name in names:
        check_budget(name, cfg)
        out = Path(cfg.out) / name
        out.mkdir(parents=True, exist_ok=True)
        start = time.perf_counter()
        summary = PIPELINES[name](replace(cfg, experiment=name), out)
        wall = {name: time.perf_counter() - start}
        write_manifest(out / "manifest.txt", replace(cfg, experiment=name),
                       wall, summary["files"])
        summaries[name] = summary
    return summaries
