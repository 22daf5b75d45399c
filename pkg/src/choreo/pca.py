"""Linear dimensionality reduction via SVD, with exact inverse on the retained subspace.

Used as an optional preprocessing stage for the sequence predictor: frames
are transformed individually, sequences framewise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class PcaError(ValueError):
    pass


@dataclass
class PcaModel:
    mean: np.ndarray                      # (features,)
    components: np.ndarray                # (k, features), orthonormal rows
    explained_variance: np.ndarray        # (k,) eigenvalues of the sample covariance
    explained_variance_ratio: np.ndarray  # (k,) nonincreasing, sums to <= 1

    @property
    def k(self) -> int:
        return self.components.shape[0]

    @property
    def features(self) -> int:
        return self.components.shape[1]


def pca_fit(data: np.ndarray, variance_target: float = 0.95) -> PcaModel:
    """Fit on row vectors, retaining the smallest prefix of components whose
    cumulative explained variance reaches ``variance_target``.

    Components follow a fixed sign convention (largest-magnitude entry
    positive) so fits are deterministic across platforms.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 2:
        raise PcaError(f"need an (N>=2, features) matrix, got shape {data.shape}")
    if not (0.0 < variance_target <= 1.0):
        raise PcaError(f"variance_target must be in (0, 1], got {variance_target}")

    mean = data.mean(axis=0)
    centered = data - mean
    u, s, vt = np.linalg.svd(centered, full_matrices=False)

    var = s ** 2 / (data.shape[0] - 1)
    total = var.sum()
    if total < 1e-20:
        raise PcaError("constant data: no variance to explain")
    ratios = var / total

    rank_tol = s.max() * max(data.shape) * np.finfo(np.float64).eps
    rank = int((s > rank_tol).sum())

    cumulative = np.cumsum(ratios)
    k = int(np.searchsorted(cumulative, variance_target - 1e-12) + 1)
    k = min(k, rank)

    components = vt[:k].copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return PcaModel(
        mean=mean,
        components=components,
        explained_variance=var[:k].copy(),
        explained_variance_ratio=ratios[:k].copy(),
    )


def pca_transform(model: PcaModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.features:
        raise PcaError(f"expected {model.features} features, got {x.shape[-1]}")
    return (x - model.mean) @ model.components.T


def pca_inverse(model: PcaModel, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.shape[-1] != model.k:
        raise PcaError(f"expected {model.k} components, got {y.shape[-1]}")
    return y @ model.components + model.mean
