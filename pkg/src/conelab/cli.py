"""Command line entry point.

    conelab <subcommand> [--config PATH] [--R 16,32,64] [--delta ...]
            [--kind a,b] [--seed 0,1] [--n N] [--gamma sqrt|full|G]
            [--eps E] [--q Q] [--workers N] [--out DIR] [--force]

Subcommands: gen (write a measure/configuration file) plus the pipelines
decay, maximal, pairs, sharpness, sigma, duality, and all.  Flags are
long-form only; values in the --config file (flat key=value lines, same
keys as the flags) override the flags.  Each pipeline refuses up front if
its estimated kernel-evaluation count exceeds the budget, unless forced.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments import (BudgetExceededError, ExperimentConfig, PIPELINE_NAMES,
                          format_value, run_experiment)
from .measures import MAXIMAL_RADII, generate, generate_config, save_config, save_measure

_LIST_KEYS = {"R": int, "delta": float, "kind": str, "seed": int}
_SCALAR_KEYS = {"n": int, "gamma": str, "eps": float, "q": float,
                "workers": int, "out": str}


def _parse_list(conv):
    def parse(text):
        return tuple(conv(t.strip()) for t in text.split(",") if t.strip())
    return parse


def parse_config_file(path) -> dict:
    """Flat key=value file with the same keys as the long flags."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        if key in _LIST_KEYS:
            values[key] = _parse_list(_LIST_KEYS[key])(raw)
        elif key in _SCALAR_KEYS:
            values[key] = _SCALAR_KEYS[key](raw)
        elif key == "force":
            values[key] = raw.lower() in ("1", "true", "yes")
        else:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    return values


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file; overrides the flags below")
    p.add_argument("--R", type=_parse_list(int), help="comma-separated R sweep")
    p.add_argument("--delta", type=_parse_list(float), help="comma-separated delta sweep")
    p.add_argument("--kind", type=_parse_list(str), help="generator kinds")
    p.add_argument("--seed", type=_parse_list(int), help="comma-separated seeds")
    p.add_argument("--n", type=int, help="configuration size")
    p.add_argument("--gamma", help="sharpness branch: sqrt, full, both, or an integer")
    p.add_argument("--eps", type=float, help="global epsilon (default 0.05)")
    p.add_argument("--q", type=float, help="quadrature oversampling factor")
    p.add_argument("--workers", type=int, help="parallel sweep points")
    p.add_argument("--out", help="output directory (or file for gen)")
    p.add_argument("--force", action="store_true", help="ignore the evaluation budget")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conelab",
        description="Scaling experiments for weighted cone-extension estimates")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "gen": "generate a cube measure (--R) or circle configuration (--delta)",
        "decay": "Fourier decay means against the plank-mass bound",
        "maximal": "circular-maximal multiplicity norms over a delta sweep",
        "pairs": "tangent pair counts per dyadic separation band",
        "sharpness": "Knapp example ratio over an R sweep",
        "sigma": "surface-measure transform decay on and off the cone",
        "duality": "operator norms, L1/L2 equivalence, transference",
        "all": "run every pipeline",
    }
    for name in ("gen",) + PIPELINE_NAMES + ("all",):
        _add_common(sub.add_parser(name, help=helps[name]))
    return parser


def _collect(args: argparse.Namespace) -> dict:
    values = {}
    for key in list(_LIST_KEYS) + list(_SCALAR_KEYS):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if args.force:
        values["force"] = True
    if args.config:
        values.update(parse_config_file(args.config))
    return values


def run_gen(values: dict) -> int:
    kinds = values.get("kind") or ("random_frostman",)
    kind = kinds[0]
    seed = (values.get("seed") or (0,))[0]
    out = values.get("out")
    out_dir = Path(out) if out else Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    if values.get("delta"):
        delta = values["delta"][0]
        n = values.get("n") or int(round(0.5 / delta))
        config = generate_config(kind, delta, n, seed, radius_band=MAXIMAL_RADII)
        path = out_dir / f"{kind}_d{format_value(delta)}_s{seed}.circles"
        save_config(path, config)
    elif values.get("R"):
        R = values["R"][0]
        params = {}
        if values.get("n"):
            params["n"] = values["n"]
        if values.get("gamma") and values["gamma"].isdigit():
            params["gamma"] = int(values["gamma"])
        nu = generate(kind, R, seed, **params)
        path = out_dir / f"{kind}_R{R}_s{seed}.cubes"
        save_measure(path, nu)
    else:
        print("gen: need --R (cube measure) or --delta (circle configuration)",
              file=sys.stderr)
        return 2
    print(path)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        values = _collect(args)
        if args.command == "gen":
            return run_gen(values)
        cfg = ExperimentConfig(
            experiment=args.command,
            R=values.get("R", ()),
            delta=values.get("delta", ()),
            kinds=values.get("kind", ()),
            seeds=values.get("seed", (0,)),
            n=values.get("n"),
            gamma=values.get("gamma", "both"),
            eps=values.get("eps", 0.05),
            q=values.get("q"),
            out=values.get("out", "runs"),
            workers=values.get("workers", 1),
            force=values.get("force", False),
        )
        summaries = run_experiment(cfg)
    except BudgetExceededError as err:
        print(f"conelab: {err}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as err:
        print(f"conelab: {err}", file=sys.stderr)
        return 2
    for name, summary in summaries.items():
        files = ", ".join(summary["files"])
        print(f"{name}: wrote {files} under {Path(cfg.out) / name}")
        for key, value in summary.items():
            if key == "files":
                continue
            if isinstance(value, dict):
                body = " ".join(f"{k}={format_value(v)}" for k, v in value.items())
            elif isinstance(value, list):
                body = " ".join(format_value(v) for v in value)
            else:
                body = format_value(value)
            print(f"  {key}: {body}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
