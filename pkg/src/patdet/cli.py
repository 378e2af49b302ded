"""Command-line front end: synthesize data, attack it, train, detect, eval.

Every command is deterministic given its --seed. Reports are JSON with a
"schema": 1 marker. Exit codes: 0 success, 2 configuration error, 3 data or
format error, 4 internal invariant violation.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .core import FrameLabel
from .data import (
    BackgroundMode,
    SynthConfig,
    load_model,
    read_video,
    save_model,
    synth_videos,
    write_video,
)
from .detector import (
    DEFAULT_THRESHOLD,
    InputMode,
    TrainConfig,
    detect_video,
    train,
    video_scores,
)
from .errors import ConfigError, DataFormatError, PatdetError
from .metrics import auc_from_scores, confusion, fdr, vdr
from .perturb import (
    RngSeed,
    parse_sigma_mode,
    surrogate_dense_attack,
    surrogate_sparse_attack,
)

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


def _write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def _parse_size(text):
    try:
        h, w = text.lower().split("x")
        return int(h), int(w)
    except ValueError as exc:
        raise ConfigError(f"bad --size {text!r}, expected HxW") from exc


def _parse_velocity(text):
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError as exc:
        raise ConfigError(f"bad --velocity {text!r}, expected LO:HI") from exc


def _video_paths(directory):
    """Paths of .vseq files, in manifest order when a manifest exists."""
    directory = Path(directory)
    if not directory.is_dir():
        raise DataFormatError(f"{directory} is not a directory")
    manifest = directory / "manifest.json"
    if manifest.exists():
        try:
            listed = json.loads(manifest.read_text())["files"]
        except (json.JSONDecodeError, KeyError) as exc:
            raise DataFormatError(f"bad manifest {manifest}: {exc}") from exc
        return [directory / name for name in listed]
    paths = sorted(directory.glob("*.vseq"))
    if not paths:
        raise DataFormatError(f"no .vseq files in {directory}")
    return paths


def cmd_synth(args):
    cfg = SynthConfig(
        video_count=args.videos,
        frames_per_video=args.frames,
        height=_parse_size(args.size)[0],
        width=_parse_size(args.size)[1],
        object_count=args.objects,
        velocity_range=_parse_velocity(args.velocity),
        background_mode=BackgroundMode(args.background),
        seed=RngSeed(args.seed),
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    videos = synth_videos(cfg)
    files = []
    for video in videos:
        name = f"{video.id}.vseq"
        write_video(out / name, video)
        files.append(name)
    _write_json(out / "manifest.json", {
        "schema": SCHEMA_VERSION,
        "ids": [v.id for v in videos],
        "files": files,
        "config": {
            "videos": cfg.video_count, "frames": cfg.frames_per_video,
            "height": cfg.height, "width": cfg.width,
            "objects": cfg.object_count, "velocity": list(cfg.velocity_range),
            "background": cfg.background_mode.value, "seed": cfg.seed.seed,
        },
    })
    print(f"wrote {len(files)} videos to {out}")
    return EXIT_OK


def cmd_attack(args):
    if args.mode == "sparse":
        if args.rho is None or args.sigma is None:
            raise ConfigError("sparse mode needs --rho and --sigma")
    elif args.eps is None:
        raise ConfigError("dense mode needs --eps")
    rng = RngSeed(args.seed).generator()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for path in _video_paths(args.in_dir):
        video = read_video(path)
        if args.mode == "sparse":
            attacked, labels = surrogate_sparse_attack(video, args.rho, args.sigma, rng)
            params = {"rho": args.rho, "sigma": args.sigma}
        else:
            attacked, labels = surrogate_dense_attack(video, args.eps, rng,
                                                      circular_shift=args.shift)
            params = {"eps": args.eps, "circular_shift": args.shift}
        name = f"{video.id}.vseq"
        write_video(out / name, attacked)
        _write_json(out / f"{video.id}.labels.json", {
            "schema": SCHEMA_VERSION,
            "id": video.id,
            "mode": args.mode,
            "params": {**params, "seed": args.seed},
            "labels": [int(l) for l in labels],
        })
        files.append(name)
    _write_json(out / "manifest.json", {
        "schema": SCHEMA_VERSION,
        "ids": [Path(f).stem for f in files],
        "files": files,
        "config": {"mode": args.mode, "seed": args.seed},
    })
    print(f"attacked {len(files)} videos into {out}")
    return EXIT_OK


def cmd_train(args):
    config = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        momentum=args.momentum,
        sigma_mode=parse_sigma_mode(args.sigma_mode),
        input_mode=InputMode(args.input_mode),
        seed=RngSeed(args.seed),
    )
    videos = [read_video(p) for p in _video_paths(args.clean)]
    model, history = train(videos, config)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    save_model(out, model)
    history_path = args.history or f"{args.out}.history.json"
    _write_json(history_path, {
        "schema": SCHEMA_VERSION,
        "epochs": config.epochs,
        "loss": history.losses,
        "accuracy": history.accuracies,
        "config": {
            "epochs": config.epochs, "batch_size": config.batch_size,
            "lr": config.learning_rate, "momentum": config.momentum,
            "sigma_mode": args.sigma_mode, "input_mode": args.input_mode,
            "seed": args.seed,
        },
    })
    print(f"trained on {len(videos)} videos; "
          f"final loss {history.losses[-1]:.4f}, accuracy {history.accuracies[-1]:.4f}")
    print(f"model saved to {out}")
    return EXIT_OK


def cmd_detect(args):
    model = load_model(args.model)
    video = read_video(args.video)
    report = detect_video(model, video, threshold=args.threshold)
    payload = {
        "schema": SCHEMA_VERSION,
        "video": video.id,
        "scores": [round(s, 6) for s in report.per_frame_scores],
        "flags": [int(f) for f in report.per_frame_flags],
        "verdict": int(report.video_verdict),
        "threshold": report.threshold_used,
        "elapsed_seconds": report.elapsed_seconds,
    }
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        verdict = "ADVERSARIAL" if report.video_verdict == FrameLabel.ADVERSARIAL else "CLEAN"
        print(f"video {video.id}: {verdict} "
              f"({report.flagged_count}/{video.length} frames flagged, "
              f"threshold {report.threshold_used}, {report.elapsed_seconds:.3f}s)")
    return EXIT_OK


def _read_labels(labels_dir, video_id, length):
    path = Path(labels_dir) / f"{video_id}.labels.json"
    if not path.exists():
        raise DataFormatError(f"missing label file {path}")
    try:
        payload = json.loads(path.read_text())
        labels = [FrameLabel(int(v)) for v in payload["labels"]]
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise DataFormatError(f"bad label file {path}: {exc}") from exc
    if len(labels) != length:
        raise DataFormatError(
            f"label file {path} has {len(labels)} labels for a {length}-frame video"
        )
    return labels


def cmd_eval(args):
    model = load_model(args.model)
    threshold = args.threshold
    if threshold < 1:
        raise ConfigError(f"threshold must be >= 1, got {threshold}")
    labels_dir = args.labels or args.adv

    frame_pred, frame_truth = [], []
    video_flags, video_truth = [], []
    video_max_scores = []
    per_video = []
    elapsed_total = 0.0

    def run(path, kind):
        nonlocal elapsed_total
        video = read_video(path)
        start = time.perf_counter()
        scores = video_scores(model, video)
        elapsed = time.perf_counter() - start
        elapsed_total += elapsed
        flags = [FrameLabel.ADVERSARIAL if s >= 0.5 else FrameLabel.CLEAN for s in scores]
        if kind == "clean":
            truth = [FrameLabel.CLEAN] * video.length
            v_truth = FrameLabel.CLEAN
        else:
            truth = _read_labels(labels_dir, video.id, video.length)
            v_truth = FrameLabel.ADVERSARIAL
        frame_pred.extend(flags)
        frame_truth.extend(truth)
        video_flags.append(flags)
        video_truth.append(v_truth)
        video_max_scores.append(float(np.max(scores)))
        n_flagged = sum(1 for f in flags if f == FrameLabel.ADVERSARIAL)
        verdict = FrameLabel.ADVERSARIAL if n_flagged >= threshold else FrameLabel.CLEAN
        per_video.append({
            "id": video.id, "kind": kind,
            "verdict": int(verdict), "truth": int(v_truth),
            "flagged": n_flagged, "frames": video.length,
            "max_score": round(float(np.max(scores)), 6),
            "elapsed_seconds": elapsed,
        })

    for path in _video_paths(args.clean):
        run(path, "clean")
    for path in _video_paths(args.adv):
        run(path, "adversarial")

    verdicts = [FrameLabel.ADVERSARIAL
                if sum(1 for f in flags if f == FrameLabel.ADVERSARIAL) >= threshold
                else FrameLabel.CLEAN
                for flags in video_flags]
    report = {
        "schema": SCHEMA_VERSION,
        "fdr": fdr(frame_pred, frame_truth),
        "vdr": vdr(video_flags, video_truth, threshold),
        "auc": auc_from_scores(video_max_scores, video_truth),
        "confusion": confusion(verdicts, video_truth).as_dict(),
        "threshold": threshold,
        "per_video": per_video,
        "config": {
            "model": str(args.model), "clean": str(args.clean),
            "adv": str(args.adv), "labels": str(labels_dir),
            "threshold": threshold,
        },
        "timings": {
            "total_seconds": elapsed_total,
            "mean_video_seconds": elapsed_total / max(len(per_video), 1),
        },
    }
    if args.report:
        _write_json(args.report, report)
    print(f"FDR {report['fdr']:.4f}  VDR {report['vdr']:.4f}  AUC {report['auc']:.4f}  "
          f"(threshold {threshold}, {len(per_video)} videos, "
          f"{report['timings']['mean_video_seconds'] * 1e3:.1f} ms/video)")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="patdet",
        description="Detect adversarially perturbed frames in videos.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic videos")
    p.add_argument("--out", required=True)
    p.add_argument("--videos", type=int, required=True)
    p.add_argument("--frames", type=int, default=16)
    p.add_argument("--size", default="64x64", help="HxW, default 64x64")
    p.add_argument("--objects", type=int, default=3)
    p.add_argument("--velocity", default="0.5:2.0", help="LO:HI pixels/frame")
    p.add_argument("--background", choices=["uniform", "gradient"], default="uniform")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("attack", help="apply a surrogate attack to videos")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=["sparse", "dense"], required=True)
    p.add_argument("--rho", type=float, help="fraction of frames to perturb (sparse)")
    p.add_argument("--sigma", type=float, help="noise std per perturbed frame (sparse)")
    p.add_argument("--eps", type=float, help="uniform pattern amplitude (dense)")
    p.add_argument("--shift", action=argparse.BooleanOptionalAction, default=True,
                   help="circularly shift the dense pattern per frame")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("train", help="train the detection network")
    p.add_argument("--clean", required=True, help="directory of clean .vseq videos")
    p.add_argument("--out", required=True, help="output .patm model path")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--sigma-mode", default="varying:0.0001:0.05")
    p.add_argument("--input-mode", choices=["transition", "original"], default="transition")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--history", help="training history JSON path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("detect", help="score one video with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--video", required=True)
    p.add_argument("--threshold", type=int, default=DEFAULT_THRESHOLD)
    p.add_argument("--json", action="store_true", help="print the full JSON report")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="evaluate a model on clean and attacked sets")
    p.add_argument("--model", required=True)
    p.add_argument("--clean", required=True)
    p.add_argument("--adv", required=True)
    p.add_argument("--labels", help="directory of label files (default: --adv)")
    p.add_argument("--threshold", type=int, default=DEFAULT_THRESHOLD)
    p.add_argument("--report", help="write the EvalReport JSON here")
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FileNotFoundError, NotADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PatdetError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
