"""Command-line entry point: train, detect, eval, synth, and sweep.

Exit code 0 on success; every documented error class exits nonzero with a
diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import fields

import numpy as np

from . import detector, metrics
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .config import ConfigError, RunConfig, apply_setting, parse_config_file
from .dataset import (DatasetError, MultivariateSeries, choose_pc_count,
                      fit_normalizer, fit_pca, load_csv, make_windows,
                      normalize, project)
from .detector import ScoreSeries
from .gan import TrainingDiverged, train
from .numerics import make_rng
from .synth import AttackSpec, SynthConfig, default_coupling, generate_normal, \
    inject_attacks, write_csv


class CliError(RuntimeError):
    pass


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    for f in fields(RunConfig):
        parser.add_argument(f"--{f.name}", dest=f"cfg_{f.name}", default=None,
                            metavar="VALUE", help=f"override config key {f.name}")


def _resolve_config(args) -> RunConfig:
    if getattr(args, "config", None):
        config = parse_config_file(args.config)
    else:
        config = RunConfig()
    for f in fields(RunConfig):
        raw = getattr(args, f"cfg_{f.name}", None)
        if raw is not None:
            apply_setting(config, f.name, raw)
    return config


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_training_log(path, log) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "d_loss", "g_loss", "mmd"])
        for epoch, dl, gl, mmd in log:
            writer.writerow([epoch, _fmt(dl), _fmt(gl), _fmt(mmd)])


def cmd_train(args) -> int:
    config = _resolve_config(args)
    series = load_csv(args.data, label_column=config.label_column)
    norm_state = fit_normalizer(series)
    normalized = normalize(series, norm_state)
    pca_state = None
    if config.pc != "none":
        k = choose_pc_count(normalized, config.variance_target) \
            if config.pc == "auto" else int(config.pc)
        pca_state = fit_pca(normalized, k)
        normalized = project(normalized, pca_state)
    windows = make_windows(normalized, config.s_w, config.s_s)
    rng = make_rng(config.seed)
    progress = None
    if args.verbose:
        def progress(epoch, entry):
            print(f"epoch {epoch}: d_loss={entry[1]:.4f} g_loss={entry[2]:.4f} "
                  f"mmd={entry[3]:.4f}", file=sys.stderr)
    model = train(windows, config.train_config(), rng,
                  normalization=norm_state, pca=pca_state, progress=progress)
    save_checkpoint(args.out, model, config)
    if args.log:
        _write_training_log(args.log, model.training_log)
    last = model.training_log[-1]
    print(f"trained {config.epochs} epochs on {windows.count} windows "
          f"(dim {windows.dim}); final d_loss={last[1]:.4f} "
          f"g_loss={last[2]:.4f} mmd={last[3]:.4f}")
    print(f"checkpoint written to {args.out}")
    return 0


def write_scores_csv(path, scores: ScoreSeries, labels, truth=None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        header = ["timestep", "drs", "residual_part", "discrimination_part",
                  "lc", "label"]
        if truth is not None:
            header.append("ground_truth")
        writer.writerow(header)
        for t in range(len(scores.drs)):
            row = [t, _fmt(scores.drs[t]), _fmt(scores.residual_part[t]),
                   _fmt(scores.discrimination_part[t]), int(scores.lc[t]),
                   int(labels.labels[t])]
            if truth is not None:
                row.append(int(truth[t]))
            writer.writerow(row)


def _parse_tau(raw: str):
    if raw in ("sweep",) or raw.startswith("q"):
        return raw
    try:
        return float(raw)
    except ValueError:
        raise CliError(f"bad tau {raw!r}: expected a number, 'qX', or 'sweep'")


def cmd_detect(args) -> int:
    model, config = load_checkpoint(args.model)
    series = load_csv(args.data, label_column=config.label_column)
    expected = model.normalization.vmin.size if model.normalization is not None \
        else model.data_dim
    if series.num_variables != expected:
        raise CliError(f"{args.data}: expected {expected} variable columns, "
                       f"got {series.num_variables}")
    lam = float(args.lam) if args.lam is not None else config.lam
    tau = _parse_tau(args.tau) if args.tau is not None else _parse_tau(config.tau)
    rng = make_rng(config.seed + 1)
    scores, labels = detector.detect(model, series, lam=lam, tau=tau,
                                     config=config.inversion_config(), rng=rng)
    write_scores_csv(args.scores, scores, labels, truth=series.labels)
    if args.labels:
        with open(args.labels, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["timestep", "label"])
            for t, a in enumerate(labels.labels):
                writer.writerow([t, int(a)])
    covered = scores.covered
    rate = labels.labels[covered].mean() if covered.any() else 0.0
    print(f"scored {len(scores.drs)} timesteps ({int(covered.sum())} covered); "
          f"anomaly rate {rate:.4f} at tau={labels.tau:.6g}")
    return 0


def read_scores_csv(path) -> tuple[ScoreSeries, np.ndarray | None]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        raise CliError(f"{path}: empty scores file")
    n = len(rows)
    drs = np.array([float(r["drs"]) for r in rows])
    lc = np.array([int(r["lc"]) for r in rows], dtype=np.int64)
    res = np.array([float(r["residual_part"]) for r in rows])
    disc = np.array([float(r["discrimination_part"]) for r in rows])
    truth = None
    if "ground_truth" in rows[0] and rows[0]["ground_truth"] is not None:
        truth = np.array([int(r["ground_truth"]) for r in rows], dtype=np.int64)
    scores = ScoreSeries(drs=drs, lc=lc, residual_part=res,
                         discrimination_part=disc, lam=float("nan"))
    return scores, truth


def cmd_eval(args) -> int:
    scores, truth = read_scores_csv(args.scores)
    if truth is None:
        raise CliError(f"{args.scores}: no ground_truth column; cannot evaluate")
    covered = scores.covered
    if args.mode == "fixed":
        tau = float(args.tau)
        labels = detector.threshold_labels(scores, tau)
        counts = metrics.confusion(labels.labels, truth, mask=covered)
        print(f"tau={tau:.6g}: precision={metrics.precision(counts):.4f} "
              f"recall={metrics.recall(counts):.4f} f1={metrics.f1(counts):.4f}")
    else:
        table = metrics.sweep_tau(scores, truth)
        for name, row in (("best-precision", table.best_precision),
                          ("best-recall", table.best_recall),
                          ("best-f1", table.best_f1)):
            print(f"{name}: tau={row.tau:.6g} precision={row.precision:.4f} "
                  f"recall={row.recall:.4f} f1={row.f1:.4f}")
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["tau", "quantile", "precision", "recall", "f1"])
                for row in table.rows:
                    writer.writerow([_fmt(row.tau), _fmt(row.quantile),
                                     _fmt(row.precision), _fmt(row.recall),
                                     _fmt(row.f1)])
    uncovered = int((~covered).sum())
    if uncovered:
        print(f"note: {uncovered} uncovered timesteps excluded from evaluation")
    return 0


def _parse_attack(raw: str) -> AttackSpec:
    parts = raw.split(":")
    if len(parts) != 5:
        raise CliError(f"bad attack spec {raw!r}: expected kind:var:start:duration:magnitude")
    kind, var, start, dur, mag = parts
    try:
        return AttackSpec(kind=kind, variable=int(var), start=int(start),
                          duration=int(dur), magnitude=float(mag))
    except ValueError as exc:
        raise CliError(f"bad attack spec {raw!r}: {exc}") from exc


def cmd_synth(args) -> int:
    config = SynthConfig(num_variables=args.variables, length=args.length,
                         noise_std=args.noise,
                         coupling=default_coupling(args.variables, args.coupling))
    rng = make_rng(args.seed)
    series = generate_normal(config, rng)
    if args.attack:
        series = inject_attacks(series, [_parse_attack(a) for a in args.attack], rng)
    write_csv(series, args.out, label_column=args.label_column)
    n_anom = int(series.labels.sum()) if series.labels is not None else 0
    print(f"wrote {series.num_timesteps} timesteps x {series.num_variables} "
          f"variables to {args.out} ({n_anom} anomalous)")
    return 0


def cmd_sweep(args) -> int:
    config = _resolve_config(args)
    train_series = load_csv(args.train, label_column=config.label_column)
    test_series = load_csv(args.test, label_column=config.label_column)
    if test_series.labels is None:
        raise CliError(f"{args.test}: sweep needs a labeled test set")
    values = [int(v) for v in args.values.split(",")]
    rows = []
    for value in values:
        run_cfg = _resolve_config(args)
        if args.axis == "window":
            run_cfg.s_w = 30 * value
        else:
            run_cfg.pc = str(value)
        norm_state = fit_normalizer(train_series)
        normalized = normalize(train_series, norm_state)
        pca_state = None
        if run_cfg.pc != "none":
            k = choose_pc_count(normalized, run_cfg.variance_target) \
                if run_cfg.pc == "auto" else int(run_cfg.pc)
            pca_state = fit_pca(normalized, k)
            normalized = project(normalized, pca_state)
        windows = make_windows(normalized, run_cfg.s_w, run_cfg.s_s)
        rng = make_rng(run_cfg.seed)
        model = train(windows, run_cfg.train_config(), rng,
                      normalization=norm_state, pca=pca_state)
        scores, _ = detector.detect(model, test_series, lam=run_cfg.lam,
                                    tau="q0.99", config=run_cfg.inversion_config(),
                                    rng=make_rng(run_cfg.seed + 1))
        table = metrics.sweep_tau(scores, test_series.labels)
        best = table.best_f1
        rows.append((value, best.precision, best.recall, best.f1))
        print(f"{args.axis}={value}: precision={best.precision:.4f} "
              f"recall={best.recall:.4f} f1={best.f1:.4f}")
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([args.axis, "precision", "recall", "f1"])
        for value, pre, rec, f1v in rows:
            writer.writerow([value, _fmt(pre), _fmt(rec), _fmt(f1v)])
    print(f"sweep table written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="madgan",
        description="GAN-based multivariate time-series anomaly detection")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a model on normal data")
    p_train.add_argument("--config", help="key = value config file")
    p_train.add_argument("--data", required=True, help="training CSV")
    p_train.add_argument("--out", required=True, help="output checkpoint path")
    p_train.add_argument("--log", help="training-log CSV path")
    p_train.add_argument("--verbose", action="store_true")
    _add_config_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_detect = sub.add_parser("detect", help="score a test CSV with a checkpoint")
    p_detect.add_argument("--model", required=True)
    p_detect.add_argument("--data", required=True)
    p_detect.add_argument("--scores", required=True, help="output scores CSV")
    p_detect.add_argument("--labels", help="optional labels-only CSV")
    p_detect.add_argument("--lam", default=None)
    p_detect.add_argument("--tau", default=None,
                          help="float, 'qX' quantile, or 'sweep'")
    p_detect.set_defaults(func=cmd_detect)

    p_eval = sub.add_parser("eval", help="evaluate a scores CSV against truth")
    p_eval.add_argument("--scores", required=True)
    p_eval.add_argument("--mode", choices=["fixed", "sweep"], default="sweep")
    p_eval.add_argument("--tau", default="0.5")
    p_eval.add_argument("--out", help="optional full sweep-table CSV")
    p_eval.set_defaults(func=cmd_eval)

    p_synth = sub.add_parser("synth", help="generate labeled synthetic data")
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--length", type=int, default=2000)
    p_synth.add_argument("--variables", type=int, default=2)
    p_synth.add_argument("--noise", type=float, default=0.05)
    p_synth.add_argument("--coupling", type=float, default=0.3)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--label-column", default="label")
    p_synth.add_argument("--attack", action="append", default=[],
                         metavar="KIND:VAR:START:DURATION:MAGNITUDE")
    p_synth.set_defaults(func=cmd_synth)

    p_sweep = sub.add_parser("sweep", help="train/detect across an axis of settings")
    p_sweep.add_argument("--axis", choices=["window", "pc"], required=True)
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--config")
    p_sweep.add_argument("--train", required=True)
    p_sweep.add_argument("--test", required=True)
    p_sweep.add_argument("--out", required=True)
    _add_config_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ConfigError, DatasetError, CheckpointError,
            TrainingDiverged, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
