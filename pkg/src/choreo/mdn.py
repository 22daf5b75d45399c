"""Gaussian mixture density head: activations, density, NLL loss, sampling.

The head's raw output vector packs [M weight logits | M*c means | M spread
pre-activations]. Weights go through a softmax, spreads through a clamped
exponential; each mixture component is an isotropic Gaussian over the
c-dimensional target. The training loss is the mean negative log
likelihood, evaluated in log space throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .tensor import LOG_2PI, Tensor

SIGMA_MIN = 1e-4
SIGMA_MAX = 1e4

# pre-activation guard so exp() cannot overflow before the sigma clamp
_PRE_CLIP = 25.0


class MdnError(ValueError):
    pass


@dataclass
class MdnParams:
    alpha: np.ndarray  # (M,) positive, sums to 1
    mu: np.ndarray     # (M, c)
    sigma: np.ndarray  # (M,) positive isotropic spreads

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=np.float64)
        self.mu = np.asarray(self.mu, dtype=np.float64)
        self.sigma = np.asarray(self.sigma, dtype=np.float64)
        if self.mu.ndim != 2 or self.alpha.shape != (self.mu.shape[0],) \
                or self.sigma.shape != (self.mu.shape[0],):
            raise MdnError(
                f"inconsistent mixture shapes: alpha {self.alpha.shape}, "
                f"mu {self.mu.shape}, sigma {self.sigma.shape}"
            )
        if abs(self.alpha.sum() - 1.0) > 1e-9 or np.any(self.alpha < 0):
            raise MdnError("mixture weights must be nonnegative and sum to 1")
        if np.any(self.sigma <= 0):
            raise MdnError("sigma must be positive")

    @property
    def num_mixtures(self) -> int:
        return self.mu.shape[0]

    @property
    def num_components(self) -> int:
        return self.mu.shape[1]


def raw_dim(num_mixtures: int, num_components: int) -> int:
    return num_mixtures * (2 + num_components)


def mdn_activate(raw: np.ndarray, num_mixtures: int, num_components: int) -> MdnParams:
    """Map a raw head output vector to mixture parameters."""
    raw = np.asarray(raw, dtype=np.float64)
    expected = raw_dim(num_mixtures, num_components)
    if raw.shape != (expected,):
        raise MdnError(
            f"raw vector must have length {expected} for M={num_mixtures}, "
            f"c={num_components}, got shape {raw.shape}"
        )
    m, c = num_mixtures, num_components
    logits = raw[:m]
    shifted = logits - logits.max()
    e = np.exp(shifted)
    alpha = e / e.sum()
    mu = raw[m:m + m * c].reshape(m, c)
    sigma = np.clip(np.exp(np.clip(raw[m + m * c:], -_PRE_CLIP, _PRE_CLIP)),
                    SIGMA_MIN, SIGMA_MAX)
    return MdnParams(alpha=alpha, mu=mu, sigma=sigma)


def _log_phi(params: MdnParams, t: np.ndarray) -> np.ndarray:
    """Per-component isotropic Gaussian log densities at t."""
    c = params.num_components
    sq = ((t[None, :] - params.mu) ** 2).sum(axis=1)
    return -0.5 * c * LOG_2PI - c * np.log(params.sigma) - sq / (2.0 * params.sigma ** 2)


def mdn_log_density(params: MdnParams, t: np.ndarray) -> float:
    t = np.asarray(t, dtype=np.float64)
    if t.shape != (params.num_components,):
        raise MdnError(f"target must have shape ({params.num_components},), got {t.shape}")
    with np.errstate(divide="ignore"):
        logs = np.log(params.alpha) + _log_phi(params, t)
    m = logs.max()
    return float(m + np.log(np.exp(logs - m).sum()))


def mdn_density(params: MdnParams, t: np.ndarray) -> float:
    return float(np.exp(mdn_log_density(params, t)))


def mdn_nll(raw: Tensor, targets: np.ndarray, num_mixtures: int,
            num_components: int) -> Tensor:
    """Mean negative log likelihood of a raw head batch; differentiable.

    ``raw`` is (batch, M*(2+c)); ``targets`` is (batch, c).
    """
    m, c = num_mixtures, num_components
    targets = np.asarray(targets, dtype=np.float64)
    if raw.ndim != 2 or raw.shape[1] != raw_dim(m, c):
        raise MdnError(f"raw batch must be (B, {raw_dim(m, c)}), got {raw.shape}")
    if targets.shape != (raw.shape[0], c):
        raise MdnError(f"targets must be ({raw.shape[0]}, {c}), got {targets.shape}")

    log_alpha = T.log_softmax(raw[:, :m], axis=1)                        # (B, M)
    mu = raw[:, m:m + m * c].reshape(raw.shape[0], m, c)                 # (B, M, c)
    sigma = T.clip(T.exp(T.clip(raw[:, m + m * c:], -_PRE_CLIP, _PRE_CLIP)),
                   SIGMA_MIN, SIGMA_MAX)                                 # (B, M)
    log_sigma = T.log(sigma)

    diff = mu - targets[:, None, :]
    sq = (diff * diff).sum(axis=2)                                       # (B, M)
    inv_two_var = T.exp(-2.0 * log_sigma) * 0.5
    log_phi = -0.5 * c * LOG_2PI - c * log_sigma - sq * inv_two_var
    log_p = T.logsumexp(log_alpha + log_phi, axis=1)                     # (B,)
    return -log_p.mean()


def mdn_sample(params: MdnParams, rng: np.random.Generator,
               temperature: float = 1.0) -> np.ndarray:
    """Draw one target vector.

    The component choice sharpens with temperature (logits divided by tau
    before the softmax) and the component spread scales by tau, so tau=1
    samples the mixture faithfully and tau=0 deterministically returns the
    most likely component's mean.
    """
    if temperature < 0:
        raise MdnError(f"temperature must be >= 0, got {temperature}")
    if temperature == 0.0:
        idx = int(np.argmax(params.alpha))
        return params.mu[idx].copy()
    with np.errstate(divide="ignore"):
        logits = np.log(params.alpha) / temperature
    shifted = logits - logits.max()
    probs = np.exp(shifted)
    probs /= probs.sum()
    idx = int(rng.choice(params.num_mixtures, p=probs))
    eps = rng.standard_normal(params.num_components)
    return params.mu[idx] + temperature * params.sigma[idx] * eps
