"""Synthetic 53-vertex motion generator.

An articulated figure with fixed bone lengths is driven by band-limited
random joint-angle trajectories (sums of low-frequency sinusoids) plus a
slowly wandering, turning root. Per-frame vertex displacement is kept
under a configurable bound by uniformly damping all trajectories until the
scanned maximum satisfies it. Output is deterministic for a given rng.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import VERTEX_COUNT, MotionDataset
from .rng import as_rng

# (name, parent index, rest offset from parent) with z vertical.
_SKELETON: list[tuple[str, int, tuple[float, float, float]]] = [
    ("pelvis", -1, (0.0, 0.0, 0.0)),
    ("hip_l", 0, (0.0, 0.10, -0.02)),
    ("hip_r", 0, (0.0, -0.10, -0.02)),
    ("thigh_l", 1, (0.0, 0.0, -0.22)),
    ("knee_l", 3, (0.0, 0.0, -0.22)),
    ("shin_l", 4, (0.0, 0.0, -0.21)),
    ("ankle_l", 5, (0.0, 0.0, -0.21)),
    ("heel_l", 6, (-0.06, 0.0, -0.04)),
    ("foot_l", 6, (0.10, 0.0, -0.05)),
    ("toe_l", 8, (0.08, 0.0, -0.02)),
    ("thigh_r", 2, (0.0, 0.0, -0.22)),
    ("knee_r", 10, (0.0, 0.0, -0.22)),
    ("shin_r", 11, (0.0, 0.0, -0.21)),
    ("ankle_r", 12, (0.0, 0.0, -0.21)),
    ("heel_r", 13, (-0.06, 0.0, -0.04)),
    ("foot_r", 13, (0.10, 0.0, -0.05)),
    ("toe_r", 15, (0.08, 0.0, -0.02)),
    ("spine_low", 0, (0.0, 0.0, 0.10)),
    ("spine_mid", 17, (0.0, 0.0, 0.10)),
    ("spine_high", 18, (0.0, 0.0, 0.10)),
    ("chest", 19, (0.0, 0.0, 0.10)),
    ("neck", 20, (0.0, 0.0, 0.09)),
    ("head_base", 21, (0.0, 0.0, 0.07)),
    ("head_top", 22, (0.0, 0.0, 0.12)),
    ("head_front", 22, (0.09, 0.0, 0.02)),
    ("head_l", 22, (0.0, 0.07, 0.05)),
    ("head_r", 22, (0.0, -0.07, 0.05)),
    ("clav_l", 20, (0.02, 0.08, 0.02)),
    ("shoulder_l", 27, (0.0, 0.12, 0.0)),
    ("uparm_l", 28, (0.0, 0.02, -0.14)),
    ("elbow_l", 29, (0.0, 0.02, -0.14)),
    ("forearm_l", 30, (0.0, 0.01, -0.13)),
    ("wrist_l", 31, (0.0, 0.01, -0.13)),
    ("hand_l", 32, (0.0, 0.01, -0.06)),
    ("finger_l", 33, (0.0, 0.01, -0.06)),
    ("clav_r", 20, (0.02, -0.08, 0.02)),
    ("shoulder_r", 35, (0.0, -0.12, 0.0)),
    ("uparm_r", 36, (0.0, -0.02, -0.14)),
    ("elbow_r", 37, (0.0, -0.02, -0.14)),
    ("forearm_r", 38, (0.0, -0.01, -0.13)),
    ("wrist_r", 39, (0.0, -0.01, -0.13)),
    ("hand_r", 40, (0.0, -0.01, -0.06)),
    ("finger_r", 41, (0.0, -0.01, -0.06)),
    ("shoulder_top_l", 28, (0.0, 0.0, 0.04)),
    ("shoulder_top_r", 36, (0.0, 0.0, 0.04)),
    ("thumb_l", 32, (0.04, 0.02, -0.03)),
    ("thumb_r", 40, (0.04, -0.02, -0.03)),
    ("kneecap_l", 4, (0.05, 0.0, 0.0)),
    ("kneecap_r", 11, (0.05, 0.0, 0.0)),
    ("chest_l", 20, (0.0, 0.09, 0.0)),
    ("chest_r", 20, (0.0, -0.09, 0.0)),
    ("belly", 18, (0.09, 0.0, 0.0)),
    ("back", 18, (-0.09, 0.0, 0.0)),
]

assert len(_SKELETON) == VERTEX_COUNT

# Heading is measured between the hip markers.
HEADING_PAIR = (1, 2)

HIP_HEIGHT = 0.95


def skeleton_edges() -> list[tuple[int, int]]:
    """Parent-child vertex pairs, for rendering."""
    return [(parent, idx) for idx, (_, parent, _) in enumerate(_SKELETON) if parent >= 0]


def vertex_names() -> list[str]:
    return [name for name, _, _ in _SKELETON]


@dataclass
class SynthConfig:
    frames: int
    fps: float = 35.0
    max_step: float = 0.08  # per-frame vertex displacement bound, meters
    max_hz: float = 1.0     # band limit for joint trajectories
    name: str = "synthetic"


def _skew(axis: np.ndarray) -> np.ndarray:
    x, y, z = axis
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def _axis_angle_rots(axis: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """Rodrigues rotation matrices for one axis and many angles, (F, 3, 3)."""
    k = _skew(axis)
    k2 = k @ k
    s = np.sin(angles)[:, None, None]
    c = (1.0 - np.cos(angles))[:, None, None]
    return np.eye(3)[None] + s * k + c * k2


def _band_limited(rng, ts: np.ndarray, harmonics: int, f_lo: float, f_hi: float,
                  amplitude: float) -> np.ndarray:
    """Zero-mean sum of random sinusoids with peak magnitude <= amplitude."""
    freqs = rng.uniform(f_lo, f_hi, size=harmonics)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=harmonics)
    weights = rng.uniform(0.3, 1.0, size=harmonics)
    weights = weights / weights.sum() * amplitude
    out = np.zeros_like(ts)
    for f, p, w in zip(freqs, phases, weights):
        out += w * np.sin(2.0 * np.pi * f * ts + p)
    return out


def generate_synthetic(config: SynthConfig, rng_or_seed) -> MotionDataset:
    """Generate a raw (meter-scale) synthetic dataset."""
    rng = as_rng(rng_or_seed)
    n = len(_SKELETON)
    ts = np.arange(config.frames, dtype=np.float64) / config.fps

    axes = rng.normal(size=(n, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    amps = rng.uniform(0.15, 0.5, size=n)
    joint_angles = np.stack([
        _band_limited(rng, ts, 3, 0.02, config.max_hz, amps[j]) for j in range(n)
    ], axis=1)  # (F, n)

    heading = _band_limited(rng, ts, 2, 0.01, 0.3 * config.max_hz, rng.uniform(0.8, 1.6))
    root_path = np.stack([
        _band_limited(rng, ts, 2, 0.01, 0.3 * config.max_hz, rng.uniform(0.2, 0.6)),
        _band_limited(rng, ts, 2, 0.01, 0.3 * config.max_hz, rng.uniform(0.2, 0.6)),
        HIP_HEIGHT + _band_limited(rng, ts, 2, 0.05, 0.5 * config.max_hz, 0.04),
    ], axis=1)  # (F, 3)

    damping = 1.0
    for _ in range(40):
        frames = _forward_kinematics(axes, joint_angles * damping,
                                     heading * damping,
                                     _damp_path(root_path, damping))
        if config.frames < 2:
            break
        step = np.linalg.norm(np.diff(frames, axis=0), axis=2).max()
        if step <= config.max_step:
            break
        damping *= 0.9 * config.max_step / step
    return MotionDataset(frames, fps=config.fps, name=config.name)


def _damp_path(path: np.ndarray, damping: float) -> np.ndarray:
    return path[0] + (path - path[0]) * damping


def _forward_kinematics(axes: np.ndarray, joint_angles: np.ndarray,
                        heading: np.ndarray, root_path: np.ndarray) -> np.ndarray:
    frames_count = joint_angles.shape[0]
    n = len(_SKELETON)
    world_rot = np.empty((n, frames_count, 3, 3))
    world_pos = np.empty((n, frames_count, 3))

    z_axis = np.array([0.0, 0.0, 1.0])
    for j, (_, parent, offset) in enumerate(_SKELETON):
        local = _axis_angle_rots(axes[j], joint_angles[:, j])
        if parent < 0:
            turn = _axis_angle_rots(z_axis, heading)
            world_rot[j] = turn @ local
            world_pos[j] = root_path
        else:
            world_rot[j] = world_rot[parent] @ local
            world_pos[j] = world_pos[parent] + (world_rot[parent] @ np.asarray(offset))
    return np.transpose(world_pos, (1, 0, 2))
