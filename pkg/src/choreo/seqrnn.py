"""LSTM stack with a mixture-density head for conditional frame prediction.

A prompt of ``prompt_len`` frames is threaded through the stack; the last
hidden state projects to mixture parameters over the next ``predict_len``
frames, flattened into one target vector. Generation is autoregressive:
sample the predicted frames, slide the window by exactly that many, repeat.
Each generation step re-runs the stack over its current window, so chaining
two generate calls reproduces one long call exactly (at temperature 0).

An optional framewise linear reduction (see :mod:`choreo.pca`) shrinks the
per-frame dimensionality; sampling then happens in the reduced space and
every emitted frame is mapped back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import mdn, store
from .data import MotionDataset, make_windows, train_test_split
from .nn import Dense, LstmStack
from .pca import PcaModel, pca_inverse, pca_transform
from .rng import split_rng
from .tensor import Adam, GradientTape, NonFiniteError, ShapeError, Tensor
from .training import EpochStats, TrainReport, iter_batches


class SeqRnnModel:
    kind = "seq_rnn"

    def __init__(self, prompt_len: int = 32, predict_len: int = 1,
                 layer_units: tuple[int, ...] = (128, 128, 128),
                 num_mixtures: int = 8, frame_dim: int = 159,
                 pca: PcaModel | None = None, seed: int = 0):
        self.prompt_len = prompt_len
        self.predict_len = predict_len
        self.layer_units = tuple(layer_units)
        self.num_mixtures = num_mixtures
        self.frame_dim = frame_dim
        self.pca = pca
        self.input_dim = pca.k if pca is not None else frame_dim
        self.target_dim = predict_len * self.input_dim
        rng = split_rng(seed, "seq_rnn.init")
        self.lstm = LstmStack(self.input_dim, self.layer_units, rng, name="lstm")
        self.head = Dense(self.lstm.output_dim,
                          mdn.raw_dim(num_mixtures, self.target_dim),
                          rng, name="head")

    # -- parameter plumbing -------------------------------------------------
    def named_params(self):
        return self.lstm.named_params() + self.head.named_params()

    def hyperparams(self) -> dict:
        out = {
            "prompt_len": self.prompt_len,
            "predict_len": self.predict_len,
            "layer_units": list(self.layer_units),
            "num_mixtures": self.num_mixtures,
            "frame_dim": self.frame_dim,
            "pca": self.pca is not None,
        }
        if self.pca is not None:
            out["pca_k"] = self.pca.k
        return out

    def state(self) -> dict:
        tensors = {name: p.data for name, p in self.named_params()}
        if self.pca is not None:
            tensors["pca.mean"] = self.pca.mean
            tensors["pca.components"] = self.pca.components
            tensors["pca.explained_variance"] = self.pca.explained_variance
            tensors["pca.explained_variance_ratio"] = self.pca.explained_variance_ratio
        return tensors

    @classmethod
    def from_state(cls, hyper: dict, tensors: dict) -> "SeqRnnModel":
        pca = None
        if hyper.get("pca"):
            pca = PcaModel(
                mean=tensors["pca.mean"],
                components=tensors["pca.components"],
                explained_variance=tensors["pca.explained_variance"],
                explained_variance_ratio=tensors["pca.explained_variance_ratio"],
            )
        model = cls(
            prompt_len=hyper["prompt_len"],
            predict_len=hyper["predict_len"],
            layer_units=tuple(hyper["layer_units"]),
            num_mixtures=hyper["num_mixtures"],
            frame_dim=hyper["frame_dim"],
            pca=pca,
        )
        for name, p in model.named_params():
            p.data = tensors[name].copy()
        return model

    # -- forward ------------------------------------------------------------
    def _prompt_to_inputs(self, prompt: np.ndarray) -> np.ndarray:
        prompt = np.asarray(prompt, dtype=np.float64)
        if prompt.ndim == 3:
            prompt = prompt.reshape(prompt.shape[0], -1)
        if prompt.shape != (self.prompt_len, self.frame_dim):
            raise ShapeError(
                f"prompt must be ({self.prompt_len}, {self.frame_dim}), got {prompt.shape}"
            )
        if self.pca is not None:
            prompt = pca_transform(self.pca, prompt)
        return prompt

    def forward_raw(self, inputs: np.ndarray) -> Tensor:
        """Raw head outputs for a batch of reduced prompts (B, m, input_dim)."""
        steps = [Tensor(inputs[:, t, :]) for t in range(inputs.shape[1])]
        outputs = self.lstm.run(steps)
        return self.head(outputs[-1])

    def forward(self, prompt: np.ndarray) -> mdn.MdnParams:
        """Mixture parameters over the next predict_len frames."""
        inputs = self._prompt_to_inputs(prompt)
        raw = self.forward_raw(inputs[None])
        return mdn.mdn_activate(raw.data[0], self.num_mixtures, self.target_dim)

    def generate(self, prompt: np.ndarray, steps: int, rng: np.random.Generator,
                 temperature: float = 1.0) -> np.ndarray:
        """Autoregressively emit ``steps * predict_len`` frames, flat (T, frame_dim)."""
        window = self._prompt_to_inputs(prompt)
        emitted = []
        for _ in range(steps):
            raw = self.forward_raw(window[None])
            params = mdn.mdn_activate(raw.data[0], self.num_mixtures, self.target_dim)
            draw = mdn.mdn_sample(params, rng, temperature)
            new = draw.reshape(self.predict_len, self.input_dim)
            window = np.concatenate([window[self.predict_len:], new])
            emitted.append(pca_inverse(self.pca, new) if self.pca is not None else new)
        if not emitted:
            return np.empty((0, self.frame_dim))
        return np.concatenate(emitted)


def unconditional_prompt(model: SeqRnnModel, ds: MotionDataset,
                         index: int | None = None,
                         rng: np.random.Generator | None = None) -> np.ndarray:
    """Seed generation without input: the prompt is one dataset frame repeated."""
    if index is None:
        if rng is None:
            raise ValueError("need an index or an rng to pick the seed frame")
        index = int(rng.integers(len(ds)))
    frame = ds.flat()[index]
    return np.tile(frame, (model.prompt_len, 1))


@dataclass
class RnnTrainConfig:
    epochs: int = 50
    batch_size: int = 64
    lr: float = 1e-5
    seed: int = 0
    stride: int = 1
    checkpoint_path: str | None = None
    manifest_extra: dict | None = None  # merged into every checkpoint manifest


def _windows_to_arrays(model: SeqRnnModel, ds: MotionDataset, stride: int):
    pairs = make_windows(ds, model.prompt_len, model.predict_len, stride)
    if not pairs:
        return (np.empty((0, model.prompt_len, model.input_dim)),
                np.empty((0, model.target_dim)))
    prompts = np.stack([p.prompt.reshape(model.prompt_len, -1) for p in pairs])
    targets = np.stack([p.target.reshape(-1) for p in pairs])
    if model.pca is not None:
        prompts = pca_transform(model.pca, prompts)
        t = targets.reshape(len(pairs) * model.predict_len, model.frame_dim)
        targets = pca_transform(model.pca, t).reshape(len(pairs), model.target_dim)
    return prompts, targets


def _mean_nll(model: SeqRnnModel, prompts: np.ndarray, targets: np.ndarray,
              batch: int = 256) -> float:
    if prompts.shape[0] == 0:
        return float("nan")
    total = 0.0
    for start in range(0, prompts.shape[0], batch):
        chunk = slice(start, start + batch)
        loss = mdn.mdn_nll(model.forward_raw(prompts[chunk]), targets[chunk],
                           model.num_mixtures, model.target_dim)
        total += loss.item() * (min(start + batch, prompts.shape[0]) - start)
    return total / prompts.shape[0]


def train_seq_rnn(model: SeqRnnModel, dataset: MotionDataset,
                  config: RnnTrainConfig) -> TrainReport:
    """Minimize mixture NLL with Adam over windowed prompt/target pairs.

    The dataset is split temporally 80/20; both splits are evaluated each
    epoch. A non-finite loss aborts the run, keeping the last epoch's
    checkpoint when a path is configured.
    """
    train_ds, test_ds = train_test_split(dataset)
    train_x, train_y = _windows_to_arrays(model, train_ds, config.stride)
    test_x, test_y = _windows_to_arrays(model, test_ds, config.stride)

    opt = Adam([p for _, p in model.named_params()], lr=config.lr)
    batch_rng = split_rng(config.seed, "seq_rnn.batches")
    report = TrainReport(checkpoint_path=config.checkpoint_path)
    report.epochs.append(EpochStats(
        epoch=0,
        train_loss=_mean_nll(model, train_x, train_y),
        test_loss=_mean_nll(model, test_x, test_y),
    ))
    for epoch in range(1, config.epochs + 1):
        try:
            for idx in iter_batches(train_x.shape[0], config.batch_size, batch_rng):
                opt.zero_grad()
                with GradientTape() as tape:
                    loss = mdn.mdn_nll(model.forward_raw(train_x[idx]), train_y[idx],
                                       model.num_mixtures, model.target_dim)
                tape.backward(loss)
                opt.step()
        except NonFiniteError as exc:
            report.aborted = True
            report.abort_reason = str(exc)
            return report
        report.epochs.append(EpochStats(
            epoch=epoch,
            train_loss=_mean_nll(model, train_x, train_y),
            test_loss=_mean_nll(model, test_x, test_y),
        ))
        if config.checkpoint_path:
            extra = dict(config.manifest_extra or {})
            extra.update({
                "seed": config.seed,
                "epoch": epoch,
                "metrics": {
                    "train_nll": report.epochs[-1].train_loss,
                    "test_nll": report.epochs[-1].test_loss,
                },
            })
            store.save_model(config.checkpoint_path, model, extra=extra)
    return report
