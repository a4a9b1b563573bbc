#!/usr/bin/env python3
"""Train the default model on a synthetic potential and report validation MAE.

The summary line gives the improvement factor over the untrained model and
the MAE as a fraction of the validation force RMS.
"""

import argparse
import os

for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

from leftnet.datagen import DATASET_KINDS  # noqa: E402
from leftnet.experiments import force_field_experiment  # noqa: E402


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kind", choices=sorted(DATASET_KINDS),
                    default="lj_dimer")
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    res = force_field_experiment(kind=args.kind, n_samples=args.samples,
                                 seed=args.seed)
    print(f"init val force MAE {res.init_val_force_mae:.4f}")
    print(f"best val force MAE {res.best_val_force_mae:.4f}")
    print(f"val force RMS      {res.val_force_rms:.4f}")
    print(f"trained in {res.seconds:.0f}s: improvement "
          f"{res.improvement:.1f}x, MAE/RMS {res.mae_over_rms:.4f}")


if __name__ == "__main__":
    main()
