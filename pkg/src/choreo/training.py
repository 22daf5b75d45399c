"""Shared training-loop plumbing: epoch stats, reports, batch iteration."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    test_loss: float
    extra: dict = field(default_factory=dict)


@dataclass
class TrainReport:
    epochs: list[EpochStats] = field(default_factory=list)
    aborted: bool = False
    abort_reason: str | None = None
    checkpoint_path: str | None = None

    @property
    def initial_train_loss(self) -> float:
        return self.epochs[0].train_loss

    @property
    def final_train_loss(self) -> float:
        return self.epochs[-1].train_loss

    def loss_curve(self) -> list[float]:
        return [e.train_loss for e in self.epochs]


def iter_batches(count: int, batch_size: int, rng: np.random.Generator):
    """Yield shuffled index batches covering range(count) once."""
    order = rng.permutation(count)
    for start in range(0, count, batch_size):
        yield order[start:start + batch_size]
