"""`leftnet` command line: certification suites, data generation, fit/predict.

Exit codes: 0 all checks passed (or command completed), 1 a check failed,
2 usage, config, or input-parsing problem.
"""

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

from .checkpoint import load_checkpoint, save_checkpoint
from .checks import (discrimination_checks, equivariance_checks,
                     first_failure, gradient_checks, hierarchy_checks,
                     reflection_checks, render_table)
from .datagen import DATASET_KINDS, sample_frames
from .errors import (CheckpointError, ConfigError, LeftnetError, ParseError)
from .experiments import force_rms, split_samples
from .graphs import from_positions
from .model import energy_forces_tensors, init_params
from .probes import two_hop_report
from .runconfig import (RunConfig, effective_config_json, parse_run_config,
                        run_config_from_dict)
from .training import evaluate, history_csv_lines, labeled_from_frames, train
from .xyz import XyzFrameRecord, format_xyz, parse_xyz, sample_to_frame

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


def _load_run_config(path: str | None, seed_override: int | None = None
                     ) -> RunConfig:
    if path is None:
        cfg = run_config_from_dict({})
    else:
        cfg = parse_run_config(Path(path).read_text())
    if seed_override is not None:
        cfg = RunConfig(model=cfg.model, loss=cfg.loss,
                        train=replace(cfg.train, seed=seed_override),
                        seed=seed_override)
    return cfg


def _finish(checks) -> int:
    print(render_table(checks))
    bad = first_failure(checks)
    if bad is None:
        print("all checks passed")
        return EXIT_OK
    print(f"first failing check: {bad.name}", file=sys.stderr)
    return EXIT_CHECK_FAILED


def _cmd_check_equivariance(args) -> int:
    cfg = _load_run_config(args.config, args.seed)
    print(effective_config_json(cfg))
    t0 = time.perf_counter()
    rows = equivariance_checks(cfg.model, n_molecules=args.seeds,
                               n_motions=args.motions, seed=cfg.seed)
    rows += reflection_checks(cfg.model, n_seeds=args.seeds, seed=cfg.seed)
    code = _finish(rows)
    print(f"({args.seeds} molecules x {args.motions} motions, "
          f"{time.perf_counter() - t0:.1f}s)")
    return code


def _cmd_isomorphism_suite(args) -> int:
    hrows, report = hierarchy_checks(n_pairs=args.pairs, n_seeds=args.pairs,
                                     seed=args.seed)
    drows, detail = discrimination_checks(n_pairs=args.pairs, seed=args.seed)
    print(f"hierarchy outcomes over {report['pairs']} random pairs "
          f"(tree/triangular/subgraph): {report['outcomes']}")
    print(f"generator classification: {report['classified']}"
          f"/{report['generator_seeds']}")
    print(f"discrimination on {detail['pairs']} twist pairs: "
          f"distance-only {detail['blind_rate']:.0%}, "
          f"substructure-aware {detail['lse_rate']:.0%}")
    return _finish(hrows + drows)


def _cmd_gradcheck(args) -> int:
    cfg = _load_run_config(args.config, args.seed)
    print(effective_config_json(cfg))
    rows = gradient_checks(cfg.model, n_molecules=args.molecules,
                           seed=cfg.seed)
    return _finish(rows)


def _cmd_two_hop_probe(args) -> int:
    report = two_hop_report(args.seed, n_samples=args.samples,
                            steps=args.steps)
    var = report["variance"]
    print(f"target variance: {var:.6g}")
    print(f"scalar_only  test MSE: {report['scalar_only']:.6g} "
          f"(floor 0.5*Var = {0.5 * var:.6g})")
    print(f"equivariant  test MSE: {report['equivariant']:.6g} "
          f"(ceiling 0.05*Var = {0.05 * var:.6g})")
    ok = (report["scalar_only"] >= 0.5 * var
          and report["equivariant"] <= 0.05 * var)
    if not ok:
        print("first failing check: two-hop separation", file=sys.stderr)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _cmd_gen_data(args) -> int:
    samples = sample_frames(args.kind, args.n, args.seed)
    text = format_xyz([sample_to_frame(s) for s in samples])
    Path(args.out).write_text(text)
    print(f"wrote {len(samples)} {args.kind} frames (seed {args.seed}) "
          f"to {args.out}")
    return EXIT_OK


def _cmd_fit(args) -> int:
    cfg = _load_run_config(args.config, args.seed)
    echo = effective_config_json(cfg)
    print(echo)
    frames = parse_xyz(Path(args.data).read_text())
    samples = labeled_from_frames(frames, cutoff=cfg.model.cutoff)
    try:
        tr, va = split_samples(samples, cfg.seed, args.val_fraction)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(f"{len(tr)} train / {len(va)} val frames from {args.data}")
    mp0 = init_params(cfg.model, seed=cfg.seed)
    with_forces = cfg.loss.wofe != 0
    e0, f0 = evaluate(mp0, va, with_forces=with_forces)
    t0 = time.perf_counter()
    best, history = train((tr, va), mp0, cfg.loss, budget=cfg.train)
    elapsed = time.perf_counter() - t0
    e1, f1 = evaluate(best, va, with_forces=with_forces)
    save_checkpoint(best, args.out)
    csv_path = Path(f"{args.out}.metrics.csv")
    csv_path.write_text("\n".join(history_csv_lines(history)) + "\n")
    Path(f"{args.out}.run.json").write_text(echo + "\n")
    print(f"trained {cfg.train.epochs} epochs in {elapsed:.1f}s; "
          f"checkpoint -> {args.out}, metrics -> {csv_path}")
    print(f"val energy MAE: {e0:.6g} -> {e1:.6g}")
    if with_forces:
        rms = force_rms(va)
        print(f"val force  MAE: {f0:.6g} -> {f1:.6g} "
              f"(improvement {f0 / f1 if f1 else float('inf'):.1f}x, "
              f"MAE/RMS {f1 / rms:.4f})")
    return EXIT_OK


def _cmd_predict(args) -> int:
    mp = load_checkpoint(args.ckpt)
    frames = parse_xyz(Path(args.data).read_text())
    out_frames = []
    for k in range(0, len(frames), args.batch_size):
        chunk = frames[k:k + args.batch_size]
        graphs = [from_positions(f.positions, f.atomic_numbers,
                                 mp.config.cutoff) for f in chunk]
        energy, forces, _ = energy_forces_tensors(graphs, mp)
        offset = 0
        for idx, (g, frame) in enumerate(zip(graphs, chunk)):
            n = g.num_nodes
            out_frames.append(XyzFrameRecord(
                atomic_numbers=frame.atomic_numbers,
                positions=frame.positions,
                energy=float(energy.data[idx, 0]),
                forces=forces.data[offset:offset + n].copy()))
            offset += n
    text = format_xyz(out_frames)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {len(out_frames)} predicted frames to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leftnet",
        description="Equivariant frame-based GNN: checks, data, training.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-equivariance",
                       help="invariance/equivariance/reflection suite")
    p.add_argument("--config", help="run-config JSON (defaults when omitted)")
    p.add_argument("--seeds", type=int, default=20,
                   help="number of molecules / parameter seeds")
    p.add_argument("--motions", type=int, default=20,
                   help="rigid motions per molecule")
    p.add_argument("--seed", type=int, default=None, help="base seed override")
    p.set_defaults(func=_cmd_check_equivariance)

    p = sub.add_parser("isomorphism-suite",
                       help="isometry-oracle hierarchy and discrimination")
    p.add_argument("--pairs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_isomorphism_suite)

    p = sub.add_parser("gradcheck",
                       help="tape forces vs finite differences")
    p.add_argument("--config", help="run-config JSON (defaults when omitted)")
    p.add_argument("--molecules", type=int, default=20)
    p.add_argument("--seed", type=int, default=None, help="base seed override")
    p.set_defaults(func=_cmd_gradcheck)

    p = sub.add_parser("two-hop-probe",
                       help="scalar-only vs equivariant on the two-hop task")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=512)
    p.add_argument("--steps", type=int, default=2000)
    p.set_defaults(func=_cmd_two_hop_probe)

    p = sub.add_parser("gen-data", help="write a synthetic labeled dataset")
    p.add_argument("--kind", choices=DATASET_KINDS, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("fit", help="train on an XYZ dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--config", help="run-config JSON (defaults when omitted)")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--val-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=None, help="seed override")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("predict", help="label frames with a checkpoint")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", help="output XYZ path (default stdout)")
    p.add_argument("--batch-size", type=int, default=16)
    p.set_defaults(func=_cmd_predict)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors, 0 for -h
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ParseError, ConfigError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LeftnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
