#!/usr/bin/env python3
"""Run the analytic diagnostics: surface-measure decay and operator duality.

The sigma pipeline profiles |sigma-check| along and transverse to the cone
(stationary-phase slope -1/2 on the cone, super-polynomial decay off it,
with a quadrature-doubling self check).  The duality pipeline assembles the
extension operator per measure, brackets its L2 norm by power iteration,
lower-brackets the L1 constant, and checks the dyadic level-set equivalence
plus transference monotonicity.  Outputs land under <out>/sigma and
<out>/duality.

    python scripts/run_operator_diagnostics.py --out runs/diag
    python scripts/run_operator_diagnostics.py --quick   # q=2, R=16
"""

import argparse

from conelab.experiments import ExperimentConfig, run_experiment


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/diag", help="output directory")
    ap.add_argument("--workers", type=int, default=1, help="parallel sweep points")
    ap.add_argument("--quick", action="store_true",
                    help="reduced scope: q=2 quadrature and R=16 operators")
    args = ap.parse_args()

    sweeps = [
        ExperimentConfig(experiment="sigma", q=2.0 if args.quick else 8.0,
                         out=args.out, workers=args.workers),
        ExperimentConfig(experiment="duality", R=(16,) if args.quick else (32,),
                         seeds=(0, 1), q=2.0, out=args.out, workers=args.workers),
    ]
    for cfg in sweeps:
        summary = run_experiment(cfg)[cfg.experiment]
        print(f"{cfg.experiment}: files {', '.join(summary['files'])}")
        if cfg.experiment == "sigma":
            print(f"  on-cone slope {summary['slope']:+.4f} (target -0.5), "
                  f"transverse ratio {summary['transverse_ratio']:.2e}, "
                  f"doubling {summary['doubling_rel']:.2e}")
        else:
            lo, hi = min(summary["ratios"]), max(summary["ratios"])
            print(f"  L2/L1 consistency ratios in [{lo:.3f}, {hi:.3f}] "
                  f"(window [1/64, 64]), transference_ok={summary['transference_ok']}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
