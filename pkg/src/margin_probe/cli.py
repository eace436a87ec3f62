"""Command-line entry point wiring dataset, model, adaptation, and reports.

Every subcommand writes a `<output>.manifest.json` next to its primary
output capturing the seeds, resolved options, and library versions, so a
run can be replayed bit-exactly from its manifest alone.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .adaptation import (Recalibration, SurrogateLinkProfile,
                         fit_recalibration, measure_grid, predict_adapted,
                         select_calibration_points)
from .analysis import (correlation, error_histogram, fill_sweep,
                       frequency_sweep, granularity_sweep, power_sweep)
from .bayes_ridge import BayesRidgeModel
from .config import fiber_from_config, parse_config, policy_from_config
from .dataset import (feature_matrix, generate, labels, read_csv, split,
                      write_csv)
from .errors import MarginProbeError
from .report import write_granularity, write_histogram, write_sweep


def _manifest(out_path: str, command: str, options: dict,
              outputs: list[str]) -> None:
    doc = {
        "command": command,
        "options": {k: v for k, v in sorted(options.items())
                    if v is not None},
        "outputs": sorted(outputs),
        "versions": {"margin-probe": __version__,
                     "numpy": np.__version__},
    }
    with open(out_path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _load_overrides(args) -> dict:
    return parse_config(args.config) if args.config else {}


def _load_profile(path) -> SurrogateLinkProfile:
    if path is None:
        return SurrogateLinkProfile()
    with open(path, encoding="utf-8") as fh:
        return SurrogateLinkProfile.from_dict(json.load(fh))


def _cmd_gen_dataset(args) -> int:
    overrides = _load_overrides(args)
    if args.experimental_grid:
        records = measure_grid(_load_profile(args.profile))
    else:
        result = generate(args.rows, args.seed,
                          fiber=fiber_from_config(overrides),
                          policy=policy_from_config(overrides),
                          workers=args.workers)
        records = result.records
        for index, message in result.errors:
            print(f"row {index} skipped: {message}", file=sys.stderr)
    write_csv(records, args.out)
    _manifest(args.out, "gen-dataset",
              {"rows": args.rows, "seed": args.seed, "workers": args.workers,
               "config": args.config, "profile": args.profile,
               "experimental_grid": args.experimental_grid,
               "overrides": overrides},
              [args.out])
    print(f"wrote {len(records)} rows to {args.out}")
    return 0


def _cmd_train(args) -> int:
    records = read_csv(args.data)
    parts = split(records, args.split_seed)
    model = BayesRidgeModel.train(
        feature_matrix(parts.train), labels(parts.train),
        metadata={"data": args.data, "split_seed": args.split_seed})
    model.save(args.out)
    _manifest(args.out, "train",
              {"data": args.data, "split_seed": args.split_seed,
               "seed": args.seed}, [args.out])
    for name, rows in (("train", parts.train),
                       ("validation", parts.validation),
                       ("test", parts.test)):
        rmse = model.rmse(feature_matrix(rows), labels(rows))
        print(f"{name} RMSE {rmse:.4f} dB ({len(rows)} rows)")
    return 0


def _subset(parts, name: str):
    return {"train": parts.train, "validation": parts.validation,
            "test": parts.test}[name]


def _cmd_evaluate(args) -> int:
    model = BayesRidgeModel.load(args.model)
    records = read_csv(args.data)
    if args.subset != "all":
        records = _subset(split(records, args.split_seed), args.subset)
    rmse = model.rmse(feature_matrix(records), labels(records))
    print(f"RMSE {rmse:.4f} dB ({len(records)} rows, subset={args.subset})")
    return 0


def _cmd_predict(args) -> int:
    model = BayesRidgeModel.load(args.model)
    features = np.array([float(v) for v in args.features.split(",")])
    if features.shape != (5,):
        raise MarginProbeError("--features needs exactly 5 comma-separated "
                               "values: snr_current_db,p_ch_dbm,"
                               "center_freq_thz,n_spans,fill_fraction")
    mean, std = model.predict(features)
    if args.recal:
        mean = float(predict_adapted(model, Recalibration.load(args.recal),
                                     features))
    print(f"margin {mean:.4f} dB (posterior std {std:.4f} dB)")
    return 0


def _cmd_sweep_granularity(args) -> int:
    model = BayesRidgeModel.load(args.model)
    parts = split(read_csv(args.data), args.split_seed)
    grid = [float(g) for g in args.granularities.split(",")]
    rows = granularity_sweep(model, parts, grid, mode=args.mode)
    outputs = write_granularity(rows, args.out)
    _manifest(args.out, "sweep-granularity",
              {"model": args.model, "data": args.data,
               "granularities": grid, "mode": args.mode,
               "split_seed": args.split_seed}, outputs)
    for g, orig, retrained in rows:
        print(f"g={g:g}: original {orig:.4f} dB, retrained {retrained:.4f} dB")
    return 0


def _cmd_surrogate_measure(args) -> int:
    profile = _load_profile(args.profile)
    records = measure_grid(profile)
    write_csv(records, args.out)
    _manifest(args.out, "surrogate-measure",
              {"profile": args.profile,
               "profile_values": profile.to_dict()}, [args.out])
    print(f"wrote {len(records)} surrogate measurements to {args.out}")
    return 0


def _cmd_adapt(args) -> int:
    model = BayesRidgeModel.load(args.model)
    records = read_csv(args.measurements)
    points = select_calibration_points(records, k=args.k, seed=args.seed)
    recal = fit_recalibration(model, points)
    recal.save(args.out)
    _manifest(args.out, "adapt",
              {"model": args.model, "measurements": args.measurements,
               "k": args.k, "seed": args.seed}, [args.out])
    print(f"slope {recal.slope:.4f}, intercept {recal.intercept_db:.4f} dB, "
          f"fit residual {recal.fit_residual_db:.4f} dB "
          f"({recal.n_calibration_points} points)")
    return 0


def _cmd_report(args) -> int:
    model = BayesRidgeModel.load(args.model)
    overrides = _load_overrides(args)
    fiber = fiber_from_config(overrides)
    policy = policy_from_config(overrides)
    recal = Recalibration.load(args.recal) if args.recal else None
    if args.kind == "hist":
        records = read_csv(args.data)
        if args.subset != "all":
            records = _subset(split(records, args.split_seed), args.subset)
        hist = error_histogram(model, records, bin_width=args.bin_width,
                               recalibration=recal)
        outputs = write_histogram(hist, args.out)
    elif args.kind == "freq":
        result = frequency_sweep(model, n_realizations=args.realizations,
                                 seed=args.seed, fiber=fiber, policy=policy)
        outputs = write_sweep(result, args.out,
                              ylabel="normalized margin")
    elif args.kind == "fill":
        result = fill_sweep(model, n_realizations=args.realizations,
                            seed=args.seed, fiber=fiber, policy=policy)
        outputs = write_sweep(
            result, args.out,
            summary={"fill_margin_correlation": correlation(result)})
    elif args.kind == "granularity":
        parts = split(read_csv(args.data), args.split_seed)
        grid = [float(g) for g in args.granularities.split(",")]
        rows = granularity_sweep(model, parts, grid, mode=args.mode)
        outputs = write_granularity(rows, args.out)
    else:  # power
        records = read_csv(args.measurements)
        result = power_sweep(model, records, recalibration=recal)
        outputs = write_sweep(result, args.out)
    _manifest(args.out, "report",
              {"kind": args.kind, "model": args.model, "data": args.data,
               "measurements": args.measurements, "recal": args.recal,
               "seed": args.seed, "realizations": args.realizations,
               "bin_width": args.bin_width, "subset": args.subset,
               "split_seed": args.split_seed,
               "granularities": args.granularities, "mode": args.mode,
               "config": args.config}, outputs)
    print("wrote " + ", ".join(outputs))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="margin-probe",
        description="Fully-loaded margin estimation for partially filled "
                    "optical links")
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="master seed (default 0)")
    common.add_argument("--workers", type=int, default=1,
                        help="parallel workers (default 1)")
    common.add_argument("--config", help="key=value override file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-dataset", parents=[common],
                       help="generate a labeled dataset")
    p.add_argument("--rows", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.add_argument("--experimental-grid", action="store_true",
                   help="emit the fixed surrogate measurement grid instead")
    p.add_argument("--profile", help="surrogate profile JSON")
    p.set_defaults(func=_cmd_gen_dataset)

    p = sub.add_parser("train", parents=[common],
                       help="train the margin regressor")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--split-seed", type=int, default=0)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", parents=[common],
                       help="report RMSE of a model on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--subset", default="all",
                   choices=("all", "train", "validation", "test"))
    p.add_argument("--split-seed", type=int, default=0)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("predict", parents=[common],
                       help="predict the margin for one feature vector")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True,
                   help="snr_current_db,p_ch_dbm,center_freq_thz,"
                        "n_spans,fill_fraction")
    p.add_argument("--recal", help="recalibration JSON to apply")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("sweep-granularity", parents=[common],
                       help="fill-feature granularity study")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--granularities", default="0,0.05,0.1,0.2")
    p.add_argument("--mode", default="nearest",
                   choices=("nearest", "floor", "ceil"))
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sweep_granularity)

    p = sub.add_parser("surrogate-measure", parents=[common],
                       help="measure the surrogate experimental grid")
    p.add_argument("--profile", help="surrogate profile JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_surrogate_measure)

    p = sub.add_parser("adapt", parents=[common],
                       help="few-shot affine recalibration")
    p.add_argument("--model", required=True)
    p.add_argument("--measurements", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_adapt)

    p = sub.add_parser("report", parents=[common],
                       help="emit CSV + JSON + figure for an evaluation")
    p.add_argument("--kind", required=True,
                   choices=("hist", "freq", "fill", "granularity", "power"))
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--data")
    p.add_argument("--measurements")
    p.add_argument("--recal")
    p.add_argument("--subset", default="all",
                   choices=("all", "train", "validation", "test"))
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--bin-width", type=float, default=0.05)
    p.add_argument("--realizations", type=int, default=40)
    p.add_argument("--granularities", default="0,0.05,0.1,0.2")
    p.add_argument("--mode", default="nearest",
                   choices=("nearest", "floor", "ceil"))
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    needs = {"hist": ("data",), "granularity": ("data",),
             "power": ("measurements",)}
    if args.command == "report":
        for attr in needs.get(args.kind, ()):
            if getattr(args, attr) is None:
                build_parser().error(
                    f"--kind {args.kind} requires --{attr}")
    try:
        return args.func(args)
    except MarginProbeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
