#!/usr/bin/env python3
"""Run the two R-sweep experiments: decay-mean scaling and Knapp sharpness.

Both sweeps fit a log-log slope against R.  The decay ratio
decay_mean / (sqrt(P_lower) * mass) should stay R^eps-flat (slope near 0,
acceptance ceiling 0.30); the Knapp ratio should be R-independent within
[-0.2, 0.2].  Outputs land under <out>/decay and <out>/sharpness as CSV +
SVG pairs with a manifest each.

    python scripts/run_scaling_sweeps.py --out runs/scaling --workers 4
    python scripts/run_scaling_sweeps.py --quick   # reduced scope, ~1 min
"""

import argparse

from conelab.experiments import ExperimentConfig, run_experiment


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/scaling", help="output directory")
    ap.add_argument("--workers", type=int, default=1, help="parallel sweep points")
    ap.add_argument("--quick", action="store_true",
                    help="reduced scope: R <= 32 and q=2 quadrature")
    args = ap.parse_args()

    decay_r = (16, 32, 64) if args.quick else (16, 32, 64, 128)
    sharp_r = (16, 32, 64)
    sweeps = [
        ExperimentConfig(experiment="decay", R=decay_r, seeds=(0, 1, 2),
                         q=2.0, out=args.out, workers=args.workers),
        ExperimentConfig(experiment="sharpness", R=sharp_r, gamma="both",
                         q=2.0 if args.quick else 8.0,
                         out=args.out, workers=args.workers),
    ]
    for cfg in sweeps:
        summary = run_experiment(cfg)[cfg.experiment]
        print(f"{cfg.experiment}: files {', '.join(summary['files'])}")
        if cfg.experiment == "decay":
            print(f"  pooled slope {summary['pooled_slope']:+.4f} "
                  f"(ceiling +0.30), max ratio {summary['max_ratio']:.3g}")
        else:
            slopes = " ".join(f"{b}={s:+.4f}" for b, s in summary["slopes"].items())
            print(f"  branch slopes {slopes} (window [-0.2, +0.2])")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
