#!/usr/bin/env python3
"""Time the forward pass around a thousand atoms and report the log-log slope.

Thread pools make small graphs look artificially slow, so BLAS is pinned to
one thread before numpy loads; run this script directly, do not import it.
"""

import argparse
import os

for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

from leftnet.benchmarks import forward_scaling  # noqa: E402


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 400, 800])
    ap.add_argument("--degree", type=float, default=8.0)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--min-sample", type=float, default=0.25,
                    help="seconds of forwards amortized per timing sample")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    report = forward_scaling(sizes=tuple(args.sizes),
                             target_degree=args.degree,
                             repeats=args.repeats, seed=args.seed,
                             min_sample=args.min_sample)
    print(report.table())


if __name__ == "__main__":
    main()
