"""Pose autoencoder: a dense bottleneck over single frames.

Two LeakyReLU hidden layers on each side, linear latent and output so
decoded poses may leave the unit cube. A 32-d latent is the generation
default; a 2-d latent model serves projection, drawing and plotting.
Includes latent-trajectory decoding with linear or Catmull-Rom
interpolation and sinusoidal latent perturbations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import store
from .data import DataError, MotionDataset, offset_augment
from .nn import Dense
from .rng import split_rng
from .tensor import Adam, GradientTape, NonFiniteError, ShapeError, Tensor
from .training import EpochStats, TrainReport, iter_batches


@dataclass
class LatentTrajectory:
    points: np.ndarray  # (T, d)
    fps: float | None = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2:
            raise ShapeError(f"trajectory points must be 2-d, got {self.points.shape}")

    @property
    def latent_dim(self) -> int:
        return self.points.shape[1]

    def to_doc(self) -> dict:
        doc = {"version": 1, "latent_dim": self.latent_dim, "points": self.points.tolist()}
        if self.fps is not None:
            doc["fps"] = float(self.fps)
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "LatentTrajectory":
        if doc.get("version") != 1:
            raise DataError(f"unsupported trajectory version {doc.get('version')!r}")
        points = np.asarray(doc["points"], dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != int(doc["latent_dim"]):
            raise DataError("trajectory points do not match latent_dim")
        return cls(points=points, fps=doc.get("fps"))


class PoseAutoencoder:
    kind = "pose_ae"

    def __init__(self, latent_dim: int = 32, frame_dim: int = 159,
                 hidden: int = 64, seed: int = 0):
        if latent_dim >= frame_dim:
            raise ValueError(f"latent_dim must be < {frame_dim}, got {latent_dim}")
        self.latent_dim = latent_dim
        self.frame_dim = frame_dim
        self.hidden = hidden
        rng = split_rng(seed, "pose_ae.init")
        self.encoder = [
            Dense(frame_dim, hidden, rng, "leaky_relu", name="enc0"),
            Dense(hidden, hidden, rng, "leaky_relu", name="enc1"),
            Dense(hidden, latent_dim, rng, None, name="enc2"),
        ]
        self.decoder = [
            Dense(latent_dim, hidden, rng, "leaky_relu", name="dec0"),
            Dense(hidden, hidden, rng, "leaky_relu", name="dec1"),
            Dense(hidden, frame_dim, rng, None, name="dec2"),
        ]

    def named_params(self):
        out = []
        for layer in self.encoder + self.decoder:
            out.extend(layer.named_params())
        return out

    def hyperparams(self) -> dict:
        return {"latent_dim": self.latent_dim, "frame_dim": self.frame_dim,
                "hidden": self.hidden}

    def state(self) -> dict:
        return {name: p.data for name, p in self.named_params()}

    @classmethod
    def from_state(cls, hyper: dict, tensors: dict) -> "PoseAutoencoder":
        model = cls(latent_dim=hyper["latent_dim"], frame_dim=hyper["frame_dim"],
                    hidden=hyper["hidden"])
        for name, p in model.named_params():
            p.data = tensors[name].copy()
        return model

    # -- forward ------------------------------------------------------------
    def _encode_t(self, x: Tensor) -> Tensor:
        for layer in self.encoder:
            x = layer(x)
        return x

    def _decode_t(self, z: Tensor) -> Tensor:
        for layer in self.decoder:
            z = layer(z)
        return z

    def _as_batch(self, x, dim, label) -> tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x[None]
        if x.ndim != 2 or x.shape[1] != dim:
            raise ShapeError(f"{label} must have dimension {dim}, got shape {x.shape}")
        return x, single

    def encode(self, frames) -> np.ndarray:
        x, single = self._as_batch(frames, self.frame_dim, "frame")
        z = self._encode_t(Tensor(x)).data
        return z[0] if single else z

    def decode(self, latents) -> np.ndarray:
        z, single = self._as_batch(latents, self.latent_dim, "latent")
        x = self._decode_t(Tensor(z)).data
        return x[0] if single else x

    def reconstruct(self, frames) -> np.ndarray:
        return self.decode(self.encode(frames))


@dataclass
class AeTrainConfig:
    epochs: int = 50
    batch_size: int = 128
    lr: float = 1e-4
    seed: int = 0
    offset_augment: bool = False  # off by default: no measured test benefit
    checkpoint_path: str | None = None
    manifest_extra: dict | None = None  # merged into every checkpoint manifest


def _dataset_to_flat(dataset, frame_dim):
    if isinstance(dataset, MotionDataset):
        flat = dataset.flat()
    else:
        flat = np.asarray(dataset, dtype=np.float64)
    if flat.ndim != 2 or flat.shape[1] != frame_dim:
        raise ShapeError(f"training data must be (N, {frame_dim}), got {flat.shape}")
    return flat


def _mse(model: PoseAutoencoder, frames: np.ndarray) -> float:
    if frames.shape[0] == 0:
        return float("nan")
    recon = model.reconstruct(frames)
    return float(((recon - frames) ** 2).mean())


def train_pose_autoencoder(model: PoseAutoencoder, dataset,
                           config: AeTrainConfig) -> TrainReport:
    """Minimize frame reconstruction MSE with Adam; temporal 80/20 split."""
    flat = _dataset_to_flat(dataset, model.frame_dim)
    cut = max(1, int(round(flat.shape[0] * 0.8)))
    train_x, test_x = flat[:cut], flat[cut:]

    opt = Adam([p for _, p in model.named_params()], lr=config.lr)
    batch_rng = split_rng(config.seed, "pose_ae.batches")
    augment_rng = split_rng(config.seed, "pose_ae.augment")
    report = TrainReport(checkpoint_path=config.checkpoint_path)
    report.epochs.append(EpochStats(0, _mse(model, train_x), _mse(model, test_x)))

    for epoch in range(1, config.epochs + 1):
        try:
            for idx in iter_batches(train_x.shape[0], config.batch_size, batch_rng):
                batch = train_x[idx]
                if config.offset_augment:
                    shaped = batch.reshape(len(idx), -1, 3)
                    batch = offset_augment(shaped, augment_rng).reshape(len(idx), -1)
                opt.zero_grad()
                with GradientTape() as tape:
                    x = Tensor(batch)
                    recon = model._decode_t(model._encode_t(x))
                    diff = recon - x
                    loss = (diff * diff).mean()
                tape.backward(loss)
                opt.step()
        except NonFiniteError as exc:
            report.aborted = True
            report.abort_reason = str(exc)
            return report
        report.epochs.append(EpochStats(epoch, _mse(model, train_x), _mse(model, test_x)))
        if config.checkpoint_path:
            extra = dict(config.manifest_extra or {})
            extra.update({
                "seed": config.seed,
                "epoch": epoch,
                "metrics": {
                    "train_mse": report.epochs[-1].train_loss,
                    "test_mse": report.epochs[-1].test_loss,
                },
            })
            store.save_model(config.checkpoint_path, model, extra=extra)
    return report


# ---------------------------------------------------------------------------
# latent-space tools

def _interp_linear(points: np.ndarray, samples_per_segment: int) -> np.ndarray:
    out = []
    for a, b in zip(points[:-1], points[1:]):
        for j in range(samples_per_segment):
            t = j / samples_per_segment
            out.append(a + t * (b - a))
    out.append(points[-1])
    return np.asarray(out)


def _interp_catmull_rom(points: np.ndarray, samples_per_segment: int) -> np.ndarray:
    """Uniform Catmull-Rom through the control points, clamped end tangents."""
    padded = np.concatenate([points[:1], points, points[-1:]])
    out = []
    for i in range(len(points) - 1):
        p0, p1, p2, p3 = padded[i], padded[i + 1], padded[i + 2], padded[i + 3]
        m1 = 0.5 * (p2 - p0)
        m2 = 0.5 * (p3 - p1)
        for j in range(samples_per_segment):
            t = j / samples_per_segment
            t2, t3 = t * t, t * t * t
            out.append((2 * t3 - 3 * t2 + 1) * p1 + (t3 - 2 * t2 + t) * m1
                       + (-2 * t3 + 3 * t2) * p2 + (t3 - t2) * m2)
    out.append(points[-1])
    return np.asarray(out)


def decode_trajectory(model: PoseAutoencoder, traj: LatentTrajectory,
                      interpolation: str = "linear",
                      samples_per_segment: int = 1) -> np.ndarray:
    """Decode an interpolated latent path into frames.

    Output length is (len(points) - 1) * samples_per_segment + 1.
    """
    if traj.points.shape[0] < 1:
        raise DataError("trajectory needs at least one point")
    if traj.latent_dim != model.latent_dim:
        raise ShapeError(
            f"trajectory dimension {traj.latent_dim} does not match "
            f"model latent_dim {model.latent_dim}"
        )
    if samples_per_segment < 1:
        raise ValueError("samples_per_segment must be >= 1")
    if traj.points.shape[0] == 1:
        latents = traj.points
    elif interpolation == "linear":
        latents = _interp_linear(traj.points, samples_per_segment)
    elif interpolation == "catmull-rom":
        latents = _interp_catmull_rom(traj.points, samples_per_segment)
    else:
        raise ValueError(f"unknown interpolation {interpolation!r}")
    return model.decode(latents)


def sinusoidal_variation(model: PoseAutoencoder, frames: np.ndarray,
                         amplitude: float, frequency: float, fps: float,
                         rng: np.random.Generator,
                         axes: np.ndarray | None = None) -> np.ndarray:
    """Re-decode frames with sinusoidal latent perturbations.

    Each perturbed latent axis j oscillates as
    ``amplitude * sin(2*pi*frequency*t/fps + phase_j)`` with its own random
    phase. With amplitude 0 this is exactly the plain reconstruction.
    """
    if amplitude < 0 or frequency <= 0:
        raise ValueError("need amplitude >= 0 and frequency > 0")
    frames = np.asarray(frames, dtype=np.float64)
    z = model.encode(frames)
    if axes is None:
        axes = np.arange(model.latent_dim)
    axes = np.asarray(axes, dtype=int)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=axes.size)
    t = np.arange(frames.shape[0], dtype=np.float64) / fps
    wave = amplitude * np.sin(2.0 * np.pi * frequency * t[:, None] + phases[None, :])
    z = z.copy()
    z[:, axes] += wave
    return model.decode(z)


def project(model: PoseAutoencoder, frames: np.ndarray,
            fps: float | None = None) -> LatentTrajectory:
    """Encode frames into a latent trajectory (plotting and UI use)."""
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim == 3:
        frames = frames.reshape(frames.shape[0], -1)
    return LatentTrajectory(points=model.encode(frames), fps=fps)
