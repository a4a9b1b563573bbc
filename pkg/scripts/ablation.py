#!/usr/bin/env python3
"""Ablate neighborhood encodings on the cluster force-field task.

Trains three variants per seed on a shared dataset -- distances only,
distances plus local substructure features, and the full model with
transported vector channels -- and prints mean validation force MAE.
"""

import argparse
import os

for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

from leftnet.experiments import ablation_experiment  # noqa: E402


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--samples", type=int, default=400)
    args = ap.parse_args()

    out = ablation_experiment(seeds=tuple(args.seeds), n_samples=args.samples)
    for run in out["runs"]:
        print(f"seed {run['seed']}  {run['variant']:8s} "
              f"val force MAE {run['val_force_mae']:.4f} "
              f"({run['seconds']:.0f}s)")
    means = out["means"]
    print(f"means: plain {means['plain']:.4f}  "
          f"lse_only {means['lse_only']:.4f}  full {means['full']:.4f}")
    print(f"gap plain->lse_only {out['gap_plain_vs_lse']:+.1%}   "
          f"gap lse_only->full {out['gap_lse_vs_full']:+.1%}")


if __name__ == "__main__":
    main()
