"""Variational autoencoder over fixed-length pose sequences.

The encoder LSTM stack reads the whole sequence; its last hidden state
passes through a ReLU dense layer into linear mean and log-variance heads.
The decoder maps a latent point through a ReLU dense layer, repeats it as
the input to a decoder LSTM stack, and projects every step back to frame
space. Training balances scaled reconstruction MSE against the closed-form
Gaussian KL to the standard-normal prior.

Sampling the prior gives unconditional sequences; perturbing an encoded
sequence's latent mean by ``k`` standard normals gives variations whose
departure from the original grows with ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import store
from .data import MotionDataset, make_sequence_windows, rotate_augment
from .nn import Dense, LstmStack
from .rng import split_rng
from .tensor import Adam, GradientTape, NonFiniteError, ShapeError, Tensor
from . import tensor as T
from .training import EpochStats, TrainReport, iter_batches


class SequenceVae:
    kind = "seq_vae"

    def __init__(self, seq_len: int = 128, latent_dim: int = 256,
                 lstm_units: tuple[int, ...] = (384, 384, 384),
                 dense_units: int = 256, frame_dim: int = 159,
                 kl_weight: float = 1e-4, mse_scale: float = 1e4,
                 seed: int = 0):
        if kl_weight < 0:
            raise ValueError(f"kl_weight must be >= 0, got {kl_weight}")
        self.seq_len = seq_len
        self.latent_dim = latent_dim
        self.lstm_units = tuple(lstm_units)
        self.dense_units = dense_units
        self.frame_dim = frame_dim
        self.kl_weight = kl_weight
        self.mse_scale = mse_scale
        rng = split_rng(seed, "seq_vae.init")
        self.enc_lstm = LstmStack(frame_dim, self.lstm_units, rng, name="enc_lstm")
        self.enc_dense = Dense(self.enc_lstm.output_dim, dense_units, rng, "relu",
                               name="enc_dense")
        self.mean_head = Dense(dense_units, latent_dim, rng, name="mean_head")
        self.logvar_head = Dense(dense_units, latent_dim, rng, name="logvar_head")
        self.dec_dense = Dense(latent_dim, dense_units, rng, "relu", name="dec_dense")
        self.dec_lstm = LstmStack(dense_units, self.lstm_units, rng, name="dec_lstm")
        self.out_proj = Dense(self.dec_lstm.output_dim, frame_dim, rng, name="out_proj")

    def named_params(self):
        out = []
        for part in (self.enc_lstm, self.enc_dense, self.mean_head, self.logvar_head,
                     self.dec_dense, self.dec_lstm, self.out_proj):
            out.extend(part.named_params())
        return out

    def hyperparams(self) -> dict:
        return {
            "seq_len": self.seq_len,
            "latent_dim": self.latent_dim,
            "lstm_units": list(self.lstm_units),
            "dense_units": self.dense_units,
            "frame_dim": self.frame_dim,
            "kl_weight": self.kl_weight,
            "mse_scale": self.mse_scale,
        }

    def state(self) -> dict:
        return {name: p.data for name, p in self.named_params()}

    @classmethod
    def from_state(cls, hyper: dict, tensors: dict) -> "SequenceVae":
        model = cls(
            seq_len=hyper["seq_len"],
            latent_dim=hyper["latent_dim"],
            lstm_units=tuple(hyper["lstm_units"]),
            dense_units=hyper["dense_units"],
            frame_dim=hyper["frame_dim"],
            kl_weight=hyper["kl_weight"],
            mse_scale=hyper["mse_scale"],
        )
        for name, p in model.named_params():
            p.data = tensors[name].copy()
        return model

    # -- forward ------------------------------------------------------------
    def _check_batch(self, seqs: np.ndarray) -> np.ndarray:
        seqs = np.asarray(seqs, dtype=np.float64)
        if seqs.ndim == 4:
            seqs = seqs.reshape(seqs.shape[0], seqs.shape[1], -1)
        if seqs.ndim != 3 or seqs.shape[1] != self.seq_len or seqs.shape[2] != self.frame_dim:
            raise ShapeError(
                f"expected (B, {self.seq_len}, {self.frame_dim}) sequences, "
                f"got {seqs.shape}"
            )
        return seqs

    def _encode_t(self, seqs: np.ndarray):
        steps = [Tensor(seqs[:, t, :]) for t in range(self.seq_len)]
        hidden = self.enc_lstm.run(steps)[-1]
        pooled = self.enc_dense(hidden)
        return self.mean_head(pooled), self.logvar_head(pooled)

    def _decode_t(self, z: Tensor) -> list[Tensor]:
        inp = self.dec_dense(z)
        steps = self.dec_lstm.run([inp] * self.seq_len)
        return [self.out_proj(h) for h in steps]

    def encode(self, seq: np.ndarray):
        """Posterior (mean, logvar) for one sequence; deterministic."""
        seqs = self._check_batch(self._one(seq))
        mean, logvar = self._encode_t(seqs)
        return mean.data[0], logvar.data[0]

    def decode(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        if z.shape != (self.latent_dim,):
            raise ShapeError(f"latent must have shape ({self.latent_dim},), got {z.shape}")
        outs = self._decode_t(Tensor(z[None]))
        return np.stack([o.data[0] for o in outs])

    def _one(self, seq: np.ndarray) -> np.ndarray:
        seq = np.asarray(seq, dtype=np.float64)
        if seq.ndim == 3:
            seq = seq.reshape(seq.shape[0], -1)
        return seq[None]

    def reparameterize(self, mean: np.ndarray, logvar: np.ndarray,
                       rng: np.random.Generator) -> np.ndarray:
        return mean + np.exp(0.5 * logvar) * rng.standard_normal(mean.shape)

    # -- generation ---------------------------------------------------------
    def sample_unconditional(self, rng: np.random.Generator,
                             radius: float = 1.0) -> np.ndarray:
        """Decode an isotropically drawn latent point scaled by ``radius``."""
        z = radius * rng.standard_normal(self.latent_dim)
        return self.decode(z)

    def vary(self, base: np.ndarray, noise_scale: float, count: int,
             rng: np.random.Generator) -> list[np.ndarray]:
        """Decode ``count`` perturbations of the base sequence's latent mean.

        ``noise_scale`` is in units of latent standard normals; 0 returns
        identical reconstructions.
        """
        if noise_scale < 0:
            raise ValueError(f"noise_scale must be >= 0, got {noise_scale}")
        mean, _ = self.encode(base)
        out = []
        for _ in range(count):
            z = mean + noise_scale * rng.standard_normal(self.latent_dim)
            out.append(self.decode(z))
        return out


@dataclass
class VariationRequest:
    base: np.ndarray
    noise_scale: float
    count: int
    seed: int


def vary_from_request(model: SequenceVae, req: VariationRequest) -> list[np.ndarray]:
    rng = split_rng(req.seed, "seq_vae.vary")
    return model.vary(req.base, req.noise_scale, req.count, rng)


def vae_loss(model: SequenceVae, batch: np.ndarray,
             eps: np.ndarray | None = None):
    """Total, reconstruction and KL terms for a batch of sequences.

    ``eps`` supplies the reparameterization noise (batch, latent_dim);
    ``None`` disables sampling and uses the posterior mean, which turns the
    model into a deterministic sequence autoencoder.
    """
    batch = model._check_batch(batch)
    mean, logvar = model._encode_t(batch)
    if eps is not None:
        z = mean + T.exp(logvar * 0.5) * eps
    else:
        z = mean
    outs = model._decode_t(z)

    sq_sum = None
    for t, out in enumerate(outs):
        diff = out - batch[:, t, :]
        term = (diff * diff).sum()
        sq_sum = term if sq_sum is None else sq_sum + term
    mse = sq_sum * (1.0 / (batch.shape[0] * model.seq_len * model.frame_dim))

    var = T.exp(logvar)
    kl_per = (mean * mean + var - 1.0 - logvar).sum(axis=1) * 0.5
    kl = kl_per.mean()

    total = model.mse_scale * mse + model.kl_weight * kl
    return total, mse, kl


@dataclass
class VaeTrainConfig:
    epochs: int = 100
    batch_size: int = 16
    lr: float = 1e-3
    seed: int = 0
    stride: int | None = None  # default: seq_len // 2
    rotation_augment: bool = True
    sample_latent: bool = True  # False: z = mean (deterministic autoencoder)
    checkpoint_path: str | None = None
    manifest_extra: dict | None = None  # merged into every checkpoint manifest


def _eval_mse(model: SequenceVae, seqs: np.ndarray, batch: int = 64) -> float:
    """Reconstruction MSE through the posterior mean (no sampling)."""
    if seqs.shape[0] == 0:
        return float("nan")
    total = 0.0
    for start in range(0, seqs.shape[0], batch):
        chunk = seqs[start:start + batch]
        _, mse, _ = vae_loss(model, chunk, eps=None)
        total += mse.item() * chunk.shape[0]
    return total / seqs.shape[0]


def _eval_terms(model: SequenceVae, seqs: np.ndarray, batch: int = 64):
    if seqs.shape[0] == 0:
        return float("nan"), float("nan"), float("nan")
    totals = np.zeros(3)
    for start in range(0, seqs.shape[0], batch):
        chunk = seqs[start:start + batch]
        total, mse, kl = vae_loss(model, chunk, eps=None)
        totals += np.array([total.item(), mse.item(), kl.item()]) * chunk.shape[0]
    return tuple(float(v) for v in totals / seqs.shape[0])


def train_seq_vae(model: SequenceVae, dataset: MotionDataset,
                  config: VaeTrainConfig) -> TrainReport:
    """Adam on the VAE objective over fixed-length excerpts.

    Excerpts are cut at the configured stride, split temporally 80/20, and
    each training batch is rotation-augmented about the vertical axis.
    Per-epoch stats carry the loss term breakdown evaluated without
    sampling.
    """
    stride = config.stride or max(1, model.seq_len // 2)
    seqs = make_sequence_windows(dataset, model.seq_len, stride)
    if seqs.shape[0] == 0:
        raise ShapeError(f"dataset too short for sequences of {model.seq_len}")
    if config.rotation_augment and model.frame_dim != 159:
        raise ShapeError("rotation augmentation requires 53-vertex frames")
    cut = max(1, int(round(seqs.shape[0] * 0.8)))
    flat = seqs.reshape(seqs.shape[0], model.seq_len, -1)
    train_struct, train_flat = seqs[:cut], flat[:cut]
    test_flat = flat[cut:]

    opt = Adam([p for _, p in model.named_params()], lr=config.lr)
    batch_rng = split_rng(config.seed, "seq_vae.batches")
    augment_rng = split_rng(config.seed, "seq_vae.augment")
    eps_rng = split_rng(config.seed, "seq_vae.eps")

    def epoch_stats(epoch):
        tr_total, tr_mse, tr_kl = _eval_terms(model, train_flat)
        te_total, te_mse, te_kl = _eval_terms(model, test_flat)
        return EpochStats(epoch, tr_total, te_total, extra={
            "train_mse": tr_mse, "train_kl": tr_kl,
            "test_mse": te_mse, "test_kl": te_kl,
        })

    report = TrainReport(checkpoint_path=config.checkpoint_path)
    report.epochs.append(epoch_stats(0))
    for epoch in range(1, config.epochs + 1):
        try:
            for idx in iter_batches(train_struct.shape[0], config.batch_size, batch_rng):
                batch = train_struct[idx]
                if config.rotation_augment:
                    batch = rotate_augment(batch, augment_rng)
                batch = batch.reshape(len(idx), model.seq_len, -1)
                eps = (eps_rng.standard_normal((len(idx), model.latent_dim))
                       if config.sample_latent else None)
                opt.zero_grad()
                with GradientTape() as tape:
                    total, _, _ = vae_loss(model, batch, eps)
                tape.backward(total)
                opt.step()
        except NonFiniteError as exc:
            report.aborted = True
            report.abort_reason = str(exc)
            return report
        report.epochs.append(epoch_stats(epoch))
        if config.checkpoint_path:
            stats = report.epochs[-1]
            extra = dict(config.manifest_extra or {})
            extra.update({
                "seed": config.seed,
                "epoch": epoch,
                "metrics": {"train_total": stats.train_loss,
                            "test_total": stats.test_loss, **stats.extra},
            })
            store.save_model(config.checkpoint_path, model, extra=extra)
    return report


def project_to_pose_space(pose_model_2d, seq: np.ndarray,
                          fps: float | None = None):
    """Project a sequence into the 2-d pose-autoencoder latent space."""
    from .pose_ae import project

    return project(pose_model_2d, seq, fps=fps)
