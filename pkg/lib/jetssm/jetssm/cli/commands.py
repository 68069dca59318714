"""Subcommand handlers; each takes the parsed argparse namespace and returns an exit code."""

import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pandas as pd
from torchrl._utils import logger as torchrl_logger

from jetssm.audio import featurize, read_wav
from jetssm.cli.config import build_run_config, resolve_seed, split_overrides
from jetssm.data import StairsSchedule, load_profiles_csv, segment_depth_statistics, synthesize_trial
from jetssm.data.pipeline import find_trials, load_dataset, write_trial
from jetssm.data.samples import N_MEL, N_PROFILE
from jetssm.errors import InvalidArgumentError
from jetssm.io import read_json, write_json
from jetssm.nn.registry import spec as model_spec
from jetssm.render import depth_vs_standoff, loss_curves, profile_overlay, write_frame
from jetssm.train import (
    check_profile_information,
    evaluate,
    load_checkpoint,
    make_logger,
    predictions,
    save_checkpoint,
    stream_blocks,
    train,
    trial_search,
)

DEFAULT_FRAMES = 1150


def _run_config(args):
    return build_run_config(args.config, split_overrides(args))


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _trial_frames(wav: Path, frames: int | None) -> int:
    if frames is not None:
        return frames
    meta = wav.with_suffix(".json")
    if meta.is_file():
        return int(read_json(meta).get("frames", DEFAULT_FRAMES))
    return DEFAULT_FRAMES


def _profile_columns(prefix: str = "d") -> list[str]:
    return [f"{prefix}{i}" for i in range(N_PROFILE)]


def cmd_synth(args) -> int:
    run = _run_config(args)
    if args.trials < 1:
        raise InvalidArgumentError(f"--trials must be >= 1, got {args.trials}")
    seed = resolve_seed(args.seed)
    out = _out_dir(args.out)
    for i in range(args.trials):
        trial = synthesize_trial(seed + i, run.schedule, run.generator)
        files = write_trial(out, trial, run.schedule, run.generator)
        torchrl_logger.info(f"wrote {files.wav.name}, {files.profiles.name}, {files.metadata.name} (seed {seed + i})")
    return 0


def cmd_featurize(args) -> int:
    wav = Path(args.wav)
    clip = read_wav(wav)
    mel = featurize(clip, target_frames=_trial_frames(wav, args.frames))
    out = Path(args.out) if args.out else wav.with_suffix(".mel.csv")
    write_frame(pd.DataFrame(mel, columns=[f"mel{i}" for i in range(N_MEL)]), out)
    torchrl_logger.info(f"wrote {mel.shape[0]} x {mel.shape[1]} log-mel frames to {out}")
    return 0


def cmd_train(args) -> int:
    run = _run_config(args)
    model_spec(args.model)
    seed = resolve_seed(args.seed)
    config = replace(run.train, seed=seed)
    dataset = load_dataset(args.data)
    out = _out_dir(args.out)
    logger = make_logger(
        args.logger,
        args.exp_name or f"{args.model}-seed{seed}",
        log_dir=out / "logs",
        config={"model_kind": args.model, **run.to_dict(), "seed": seed},
        offline=args.offline,
        tags=args.tags,
    )
    ckpt, history = train(args.model, run.model, config, dataset, logger=logger)
    check = check_profile_information(ckpt, dataset, run.tau_um)
    torchrl_logger.info(
        f"training half within {run.tau_um:g} um: {check.visible_pct:.2f}% with profiles visible,"
        f" {check.hidden_pct:.2f}% with them zero-filled"
    )
    save_checkpoint(out / "checkpoint.ckpt", ckpt)
    write_json(out / "history.json", {"model_kind": args.model, "seed": seed, **history.to_dict()})
    write_json(out / "run_config.json", {"model_kind": args.model, "seed": seed, **run.to_dict()})
    torchrl_logger.info(f"final train loss {history.epoch_loss[-1]:.6g}; checkpoint at {out / 'checkpoint.ckpt'}")
    return 0


def _write_predictions(directory: Path, kind: str, pred: np.ndarray, truth: np.ndarray):
    write_frame(pd.DataFrame(pred, columns=_profile_columns()), directory / f"{kind}.csv")
    write_frame(pd.DataFrame(truth, columns=_profile_columns()), directory / "truth.csv")


def _summary(report) -> str:
    cols = report.column_summary()
    return (
        f"{report.model_name}: {report.accuracy_pct:.2f}% within {report.threshold_um:g} um"
        f" (normalized {report.normalized_accuracy_pct:.2f}%), mse {report.mse:.6g},"
        f" column error median {cols['median']:.4g} max {cols['max']:.4g} (column {cols['worst_column']})"
    )


def cmd_eval(args) -> int:
    run = _run_config(args)
    out = _out_dir(args.out)
    pred_dir = _out_dir(out / "predictions")
    split = "all" if args.full_timeline else "test"
    if args.compare:
        for kind in args.models:
            model_spec(kind)
        seed = resolve_seed(args.seed)
        config = replace(run.train, seed=seed)
        dataset = load_dataset(args.data)
        rows = []
        for kind in args.models:
            ckpt, _ = train(kind, run.model, config, dataset)
            report = evaluate(ckpt, dataset, run.tau_um, mask=args.mask)
            write_json(out / f"report_{kind}.json", report.to_dict())
            _write_predictions(pred_dir, kind, *predictions(ckpt, dataset, mask=args.mask, split=split))
            rows.append({"model": kind, "accuracy_pct": report.accuracy_pct,
                         "normalized_accuracy_pct": report.normalized_accuracy_pct, "mse": report.mse,
                         "tau_um": run.tau_um, "seed": seed})
            print(_summary(report))
        write_frame(pd.DataFrame(rows), out / "comparison.csv")
        return 0

    if args.checkpoint is None:
        raise InvalidArgumentError("eval needs --checkpoint unless --compare is given")
    ckpt = load_checkpoint(args.checkpoint)
    ckpt.check_compatible(N_MEL + N_PROFILE, N_PROFILE)
    dataset = load_dataset(args.data, ckpt.feature_stats, ckpt.target_stats)
    report = evaluate(ckpt, dataset, run.tau_um, mask=args.mask)
    write_json(out / "report.json", report.to_dict())
    _write_predictions(pred_dir, ckpt.model_kind, *predictions(ckpt, dataset, mask=args.mask, split=split))
    print(_summary(report))
    return 0


def cmd_stream(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    wav = Path(args.wav)
    written = 0
    for rows in stream_blocks(ckpt, wav, _trial_frames(wav, args.frames), args.block_size):
        if not len(rows):
            continue
        block = pd.DataFrame(rows, columns=_profile_columns())
        block.insert(0, "frame", np.arange(written, written + len(rows)))
        block.to_csv(sys.stdout, header=written == 0, index=False)
        sys.stdout.flush()
        written += len(rows)
    return 0


def cmd_search(args) -> int:
    run = _run_config(args)
    model_spec(run.search.model_kind)
    seed = resolve_seed(args.seed)
    dataset = load_dataset(args.data)
    result = trial_search(run.search, dataset, run.model, replace(run.train, seed=seed), seed=seed,
                          tau_um=run.tau_um, workers=args.workers)
    out = _out_dir(args.out)
    write_frame(result.leaderboard, out / "leaderboard.csv")
    save_checkpoint(out / "best.ckpt", result.best.checkpoint)
    write_json(out / "best_config.json", {
        "trial_id": result.best.trial_id,
        "model_kind": run.search.model_kind,
        "params": result.best.params,
        "model": result.best_model_config(run.model).to_dict(),
        "seed": seed,
    })
    torchrl_logger.info(
        f"best trial {result.best.trial_id}: {result.best.accuracy_pct:.2f}% (mse {result.best.mse:.6g})"
    )
    return 0


def _plot_schedule(files, fallback: StairsSchedule) -> StairsSchedule:
    if files[0].metadata is not None:
        return StairsSchedule.from_dict(read_json(files[0].metadata)["schedule"])
    return fallback


def cmd_plot(args) -> int:
    if args.data is None and args.predictions is None and not args.histories:
        raise InvalidArgumentError("plot needs at least one of --data, --predictions or --histories")
    run = _run_config(args)
    out = _out_dir(args.out)
    if args.data is not None:
        files = find_trials(args.data)
        schedule = _plot_schedule(files, run.schedule)
        stats = segment_depth_statistics([load_profiles_csv(f.profiles) for f in files], schedule,
                                         args.sections or None)
        for path in depth_vs_standoff(stats, out):
            torchrl_logger.info(f"wrote {path}")
    if args.predictions is not None:
        pred_dir = Path(args.predictions)
        truth_path = pred_dir / "truth.csv"
        if not truth_path.is_file():
            raise FileNotFoundError(f"missing {truth_path}")
        truth = pd.read_csv(truth_path).to_numpy(dtype=np.float64)
        preds = {p.stem: pd.read_csv(p).to_numpy(dtype=np.float64)
                 for p in sorted(pred_dir.glob("*.csv")) if p.name != "truth.csv"}
        for path in profile_overlay(preds, truth, out, column=args.column):
            torchrl_logger.info(f"wrote {path}")
    if args.histories:
        histories = {}
        for path in args.histories:
            payload = read_json(path)
            histories[payload.get("model_kind", Path(path).parent.name)] = payload["epoch_loss"]
        for path in loss_curves(histories, out):
            torchrl_logger.info(f"wrote {path}")
    return 0
