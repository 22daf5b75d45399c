"""Command-line driver: synthesize data, train, generate, export, serve.

Exit status: 0 on success, 1 on usage errors, 2 on data or model errors.
Set CHOREO_LOG to control log verbosity (DEBUG, INFO, WARNING, ERROR).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import service
from .data import (
    DataError,
    center_and_scale,
    export_animation,
    load_animation,
    remove_orientation,
)
from .mdn import MdnError
from .pca import PcaError, pca_fit
from .pose_ae import AeTrainConfig, PoseAutoencoder, train_pose_autoencoder
from .seq_vae import SequenceVae, VaeTrainConfig, train_seq_vae
from .seqrnn import RnnTrainConfig, SeqRnnModel, train_seq_rnn
from .store import StoreError, load_model
from .synth import HEADING_PAIR, SynthConfig, generate_synthetic
from .tensor import NonFiniteError, ShapeError
from .rng import split_rng

log = logging.getLogger("choreo.cli")

USAGE_ERROR = 1
DATA_ERROR = 2

_HANDLED = (DataError, StoreError, ShapeError, PcaError, MdnError,
            NonFiniteError, OSError, ValueError, KeyError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _read_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _load_config(path) -> dict:
    if not path:
        return {}
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise DataError(f"config {path} must be a JSON object")
    return doc


def _prepare_dataset(path, cfg: dict):
    """Load, optionally canonicalize, and normalize a raw dataset."""
    raw = load_animation(path)
    orientation_removed = bool(cfg.get("orientation_removed", False))
    heading_pair = tuple(cfg.get("heading_pair", HEADING_PAIR))
    if orientation_removed:
        raw = remove_orientation(raw, heading_pair)
    norm, params = center_and_scale(raw, per_frame=bool(cfg.get("per_frame_center", False)))
    manifest_extra = {
        "fps": norm.fps,
        "normalization": params.to_dict(),
        "orientation_removed": orientation_removed,
    }
    if orientation_removed:
        manifest_extra["heading_pair"] = list(heading_pair)
    return norm, manifest_extra


def _log_report(report, label):
    for stats in report.epochs:
        log.info("%s epoch %d: train %.6f test %.6f %s",
                 label, stats.epoch, stats.train_loss, stats.test_loss,
                 stats.extra if stats.extra else "")
    if report.aborted:
        print(f"training aborted: {report.abort_reason}; "
              f"last good checkpoint retained", file=sys.stderr)
        return DATA_ERROR
    return 0


# ---------------------------------------------------------------------------
# subcommands

def cmd_synth(args) -> int:
    cfg = SynthConfig(frames=args.frames, fps=args.fps, max_step=args.max_step,
                      max_hz=args.max_hz)
    ds = generate_synthetic(cfg, split_rng(args.seed, "synth"))
    export_animation(ds, args.out)
    log.info("wrote %d synthetic frames to %s", len(ds), args.out)
    return 0


def cmd_train_ae(args) -> int:
    cfg = _load_config(args.config)
    norm, extra = _prepare_dataset(args.data, cfg)
    model = PoseAutoencoder(
        latent_dim=int(cfg.get("latent_dim", 32)),
        hidden=int(cfg.get("hidden", 64)),
        seed=int(cfg.get("seed", args.seed)),
    )
    train_cfg = AeTrainConfig(
        epochs=int(cfg.get("epochs", 50)),
        batch_size=int(cfg.get("batch_size", 128)),
        lr=float(cfg.get("lr", 1e-4)),
        seed=int(cfg.get("seed", args.seed)),
        offset_augment=bool(cfg.get("offset_augment", False)),
        checkpoint_path=args.out,
        manifest_extra=extra,
    )
    return _log_report(train_pose_autoencoder(model, norm, train_cfg), "pose-ae")


def cmd_train_rnn(args) -> int:
    cfg = _load_config(args.config)
    norm, extra = _prepare_dataset(args.data, cfg)
    pca = None
    if cfg.get("pca_variance"):
        pca = pca_fit(norm.flat(), float(cfg["pca_variance"]))
        log.info("fitted %d-component reduction", pca.k)
    model = SeqRnnModel(
        prompt_len=int(cfg.get("prompt_len", 32)),
        predict_len=int(cfg.get("predict_len", 1)),
        layer_units=tuple(cfg.get("layer_units", (128, 128, 128))),
        num_mixtures=int(cfg.get("num_mixtures", 8)),
        pca=pca,
        seed=int(cfg.get("seed", args.seed)),
    )
    train_cfg = RnnTrainConfig(
        epochs=int(cfg.get("epochs", 50)),
        batch_size=int(cfg.get("batch_size", 64)),
        lr=float(cfg.get("lr", 1e-5)),
        seed=int(cfg.get("seed", args.seed)),
        stride=int(cfg.get("stride", 1)),
        checkpoint_path=args.out,
        manifest_extra=extra,
    )
    return _log_report(train_seq_rnn(model, norm, train_cfg), "seq-rnn")


def cmd_train_vae(args) -> int:
    cfg = _load_config(args.config)
    norm, extra = _prepare_dataset(args.data, cfg)
    model = SequenceVae(
        seq_len=int(cfg.get("seq_len", 128)),
        latent_dim=int(cfg.get("latent_dim", 256)),
        lstm_units=tuple(cfg.get("lstm_units", (384, 384, 384))),
        dense_units=int(cfg.get("dense_units", 256)),
        kl_weight=float(cfg.get("kl_weight", 1e-4)),
        mse_scale=float(cfg.get("mse_scale", 1e4)),
        seed=int(cfg.get("seed", args.seed)),
    )
    train_cfg = VaeTrainConfig(
        epochs=int(cfg.get("epochs", 100)),
        batch_size=int(cfg.get("batch_size", 16)),
        lr=float(cfg.get("lr", 1e-3)),
        seed=int(cfg.get("seed", args.seed)),
        stride=int(cfg["stride"]) if "stride" in cfg else None,
        rotation_augment=bool(cfg.get("rotation_augment", True)),
        checkpoint_path=args.out,
        manifest_extra=extra,
    )
    return _log_report(train_seq_vae(model, norm, train_cfg), "seq-vae")


def _load_kind(path, expected_kind):
    model, manifest = load_model(path)
    if manifest.get("kind") != expected_kind:
        raise StoreError(
            f"{path}: expected a {expected_kind} checkpoint, got {manifest.get('kind')!r}"
        )
    return service.LoadedModel(name=str(path), model=model, manifest=manifest)


def cmd_generate(args) -> int:
    loaded = _load_kind(args.model, "seq_rnn")
    model: SeqRnnModel = loaded.model
    prompt_ds = load_animation(args.prompt)
    if len(prompt_ds) < model.prompt_len:
        raise DataError(
            f"prompt has {len(prompt_ds)} frames, model needs {model.prompt_len}"
        )
    prompt = loaded.prepare(prompt_ds.frames)[-model.prompt_len:]
    rng = split_rng(args.seed, "cli.generate")
    out = model.generate(prompt, args.steps, rng, args.temperature)
    export_animation(loaded.restore(out), args.out, fps=loaded.fps)
    log.info("wrote %d generated frames to %s", out.shape[0], args.out)
    return 0


def cmd_sample(args) -> int:
    loaded = _load_kind(args.model, "seq_vae")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = split_rng(args.seed, "cli.sample")
    for i in range(args.count):
        seq = loaded.model.sample_unconditional(rng, radius=args.radius)
        export_animation(loaded.restore(seq), out_dir / f"sample_{i:03d}.json",
                         fps=loaded.fps)
    log.info("wrote %d samples to %s", args.count, out_dir)
    return 0


def cmd_vary(args) -> int:
    loaded = _load_kind(args.model, "seq_vae")
    model: SequenceVae = loaded.model
    input_ds = load_animation(args.input)
    if len(input_ds) < model.seq_len:
        raise DataError(
            f"input has {len(input_ds)} frames, model needs {model.seq_len}"
        )
    base = loaded.prepare(input_ds.frames[: model.seq_len])
    rng = split_rng(args.seed, "cli.vary")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, seq in enumerate(model.vary(base, args.sigma, args.count, rng)):
        export_animation(loaded.restore(seq), out_dir / f"vary_{i:03d}.json",
                         fps=loaded.fps)
    log.info("wrote %d variations to %s", args.count, out_dir)
    return 0


def cmd_project(args) -> int:
    vae_loaded = _load_kind(args.vae, "seq_vae")
    pose_loaded = _load_kind(args.pose2d, "pose_ae")
    vae: SequenceVae = vae_loaded.model
    input_ds = load_animation(args.input)
    if len(input_ds) < vae.seq_len:
        raise DataError(f"input has {len(input_ds)} frames, model needs {vae.seq_len}")
    base = vae_loaded.prepare(input_ds.frames[: vae.seq_len])
    mean, _ = vae.encode(base)
    recon = vae.decode(mean)
    # hand the sequence-model's view of the phrase to the 2-d pose space
    recon_raw = vae_loaded.restore(recon)
    from .pose_ae import project

    traj = project(pose_loaded.model, pose_loaded.prepare(recon_raw), fps=pose_loaded.fps)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(traj.to_doc(), fh)
    log.info("wrote %d trajectory points to %s", traj.points.shape[0], args.out)
    return 0


def cmd_serve(args) -> int:
    config = service.ServeConfig.from_json(args.config)
    service.run(config)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="choreo",
                     description="generative choreography models over "
                                 "53-vertex motion capture")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic dataset")
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fps", type=float, default=35.0)
    p.add_argument("--max-step", type=float, default=0.08)
    p.add_argument("--max-hz", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_synth)

    for name, fn in (("train-rnn", cmd_train_rnn), ("train-ae", cmd_train_ae),
                     ("train-vae", cmd_train_vae)):
        p = sub.add_parser(name, help=f"{name.replace('-', ' ')} on a dataset")
        p.add_argument("--data", required=True)
        p.add_argument("--config", default=None, help="JSON hyperparameter overrides")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True, help="checkpoint path (.chor)")
        p.set_defaults(fn=fn)

    p = sub.add_parser("generate", help="continue a prompt with a trained predictor")
    p.add_argument("--model", required=True)
    p.add_argument("--prompt", required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("sample", help="unconditional sequences from a trained VAE")
    p.add_argument("--model", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("vary", help="noise-scaled variations of an input phrase")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=cmd_vary)

    p = sub.add_parser("project", help="project a phrase into the 2-d pose space")
    p.add_argument("--vae", required=True)
    p.add_argument("--pose2d", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_project)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=getattr(logging, os.environ.get("CHOREO_LOG", "INFO").upper(), logging.INFO),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        return args.fn(args)
    except _HANDLED as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
