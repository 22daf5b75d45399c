"""Motion-capture data pipeline: normalization, canonicalization, windowing.

A frame is a (53, 3) float64 array of vertex positions with z vertical; a
dataset stacks frames into a (F, 53, 3) array. Normalization is a recorded,
invertible affine transform into the unit cube; orientation removal
re-expresses every frame in a heading-canonical body frame. Both store
their parameters on the dataset so round trips are exact to float noise.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

VERTEX_COUNT = 53
FRAME_DIM = VERTEX_COUNT * 3
DEFAULT_FPS = 35.0

_DEGENERATE_SPAN = 1e-12


class DataError(ValueError):
    """Malformed or degenerate motion data."""


@dataclass
class NormalizationParams:
    """Recorded affine and per-frame canonicalization parameters.

    ``scale`` and ``cube_min`` map centered coordinates into [0, 1];
    ``center_offset`` is the removed dataset-mean (x, y). The optional
    per-frame lists hold removed heading angles and (x, y) centroids when
    orientation removal or per-frame recentering was applied.
    """

    scale: float = 1.0
    center_offset: np.ndarray = field(default_factory=lambda: np.zeros(2))
    cube_min: np.ndarray = field(default_factory=lambda: np.zeros(3))
    per_frame_heading: np.ndarray | None = None
    per_frame_centroid: np.ndarray | None = None
    heading_pair: tuple[int, int] | None = None

    def __post_init__(self):
        if self.scale <= 0:
            raise DataError(f"scale must be positive, got {self.scale}")

    def to_dict(self) -> dict:
        out = {
            "scale": float(self.scale),
            "center_offset": [float(v) for v in self.center_offset],
            "cube_min": [float(v) for v in self.cube_min],
        }
        if self.per_frame_heading is not None:
            out["per_frame_heading"] = [float(v) for v in self.per_frame_heading]
        if self.per_frame_centroid is not None:
            out["per_frame_centroid"] = np.asarray(self.per_frame_centroid).tolist()
        if self.heading_pair is not None:
            out["heading_pair"] = list(self.heading_pair)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationParams":
        return cls(
            scale=float(d["scale"]),
            center_offset=np.asarray(d["center_offset"], dtype=np.float64),
            cube_min=np.asarray(d["cube_min"], dtype=np.float64),
            per_frame_heading=(np.asarray(d["per_frame_heading"], dtype=np.float64)
                               if "per_frame_heading" in d else None),
            per_frame_centroid=(np.asarray(d["per_frame_centroid"], dtype=np.float64)
                                if "per_frame_centroid" in d else None),
            heading_pair=tuple(d["heading_pair"]) if "heading_pair" in d else None,
        )


@dataclass
class MotionDataset:
    frames: np.ndarray  # (F, 53, 3)
    fps: float = DEFAULT_FPS
    name: str = ""
    norm: NormalizationParams | None = None

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.frames.ndim != 3 or self.frames.shape[1:] != (VERTEX_COUNT, 3):
            raise DataError(
                f"expected frames shaped (F, {VERTEX_COUNT}, 3), got {self.frames.shape}"
            )
        if self.fps <= 0:
            raise DataError(f"fps must be positive, got {self.fps}")

    def __len__(self) -> int:
        return self.frames.shape[0]

    def flat(self) -> np.ndarray:
        """Frames as (F, 159) row vectors ordered v0x, v0y, v0z, ..."""
        return self.frames.reshape(len(self), FRAME_DIM)


@dataclass
class WindowPair:
    prompt: np.ndarray  # (m, 53, 3)
    target: np.ndarray  # (n, 53, 3)


# ---------------------------------------------------------------------------
# normalization

def center_and_scale(ds: MotionDataset, per_frame: bool = False):
    """Center (x, y) and scale all coordinates into the unit cube.

    By default the dataset-mean (x, y) is removed once, preserving
    locomotion; ``per_frame=True`` instead pins every frame's (x, y)
    centroid to the same point. A single isotropic scale then maps the
    data into [0, 1] with per-axis minima at 0.

    Returns the normalized dataset and its recorded parameters.
    """
    if len(ds) == 0:
        raise DataError("cannot normalize an empty dataset")
    work = ds.frames.copy()
    params = NormalizationParams()
    if ds.norm is not None:
        params = replace(ds.norm)

    if per_frame:
        centroids = work[:, :, :2].mean(axis=1)
        work[:, :, :2] -= centroids[:, None, :]
        params.per_frame_centroid = centroids
    else:
        center = work[:, :, :2].mean(axis=(0, 1))
        work[:, :, :2] -= center
        params.center_offset = center

    lo = work.min(axis=(0, 1))
    span = float((work.max(axis=(0, 1)) - lo).max())
    if span < _DEGENERATE_SPAN:
        raise DataError("degenerate dataset: zero spatial extent, scale undefined")
    params.scale = 1.0 / span
    params.cube_min = lo
    work = (work - lo) * params.scale
    out = MotionDataset(work, fps=ds.fps, name=ds.name, norm=params)
    return out, params


def denormalize(ds: MotionDataset) -> MotionDataset:
    """Invert :func:`center_and_scale` and, when present, orientation removal."""
    if ds.norm is None:
        return ds
    p = ds.norm
    work = ds.frames / p.scale + p.cube_min
    work[:, :, :2] += p.center_offset
    if p.per_frame_heading is not None:
        work = _reapply_heading(work, p.per_frame_heading, p.per_frame_centroid)
    elif p.per_frame_centroid is not None:
        work[:, :, :2] += p.per_frame_centroid[:, None, :]
    return MotionDataset(work, fps=ds.fps, name=ds.name, norm=None)


def apply_global_normalization(frames: np.ndarray, params: NormalizationParams) -> np.ndarray:
    """Normalize new frames using a dataset's global parameters only."""
    work = np.asarray(frames, dtype=np.float64).copy()
    work[:, :, :2] -= params.center_offset
    return (work - params.cube_min) * params.scale


def invert_global_normalization(frames: np.ndarray, params: NormalizationParams) -> np.ndarray:
    work = np.asarray(frames, dtype=np.float64) / params.scale + params.cube_min
    work[:, :, :2] += params.center_offset
    return work


# ---------------------------------------------------------------------------
# orientation removal

def _rotz(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def canonicalize_frames(frames: np.ndarray, heading_pair: tuple[int, int],
                        eps: float = 1e-9):
    """Orientation-remove raw frames; returns (canonical, headings, centroids).

    Per frame the (x, y) centroid is subtracted and the frame is rotated
    about the vertical axis so the heading vector (vertex a to vertex b,
    horizontal projection) points along +x. Frames whose heading vertices
    coincide in the horizontal plane inherit the previous frame's heading.
    """
    a, b = heading_pair
    if a == b:
        raise DataError(f"heading vertices must be distinct, got ({a}, {b})")
    frames = np.asarray(frames, dtype=np.float64)
    out = np.empty_like(frames)
    headings = np.zeros(frames.shape[0])
    centroids = frames[:, :, :2].mean(axis=1)
    prev_theta = 0.0
    for i, frame in enumerate(frames):
        shifted = frame.copy()
        shifted[:, :2] -= centroids[i]
        vec = shifted[b, :2] - shifted[a, :2]
        norm = float(np.hypot(vec[0], vec[1]))
        theta = prev_theta if norm < eps else float(np.arctan2(vec[1], vec[0]))
        out[i] = shifted @ _rotz(-theta).T
        headings[i] = theta
        prev_theta = theta
    return out, headings, centroids


def remove_orientation(ds: MotionDataset, heading_pair: tuple[int, int]) -> MotionDataset:
    """Return a heading-canonical copy of the dataset with stored inversion data."""
    canonical, headings, centroids = canonicalize_frames(ds.frames, heading_pair)
    params = replace(ds.norm) if ds.norm is not None else NormalizationParams()
    params.per_frame_heading = headings
    params.per_frame_centroid = centroids
    params.heading_pair = tuple(heading_pair)
    return MotionDataset(canonical, fps=ds.fps, name=ds.name, norm=params)


def _reapply_heading(frames: np.ndarray, headings: np.ndarray,
                     centroids: np.ndarray | None) -> np.ndarray:
    out = np.empty_like(frames)
    for i, frame in enumerate(frames):
        rotated = frame @ _rotz(headings[i]).T
        if centroids is not None:
            rotated[:, :2] += centroids[i]
        out[i] = rotated
    return out


def restore_orientation(ds: MotionDataset) -> MotionDataset:
    if ds.norm is None or ds.norm.per_frame_heading is None:
        raise DataError("dataset has no recorded orientation to restore")
    frames = _reapply_heading(ds.frames, ds.norm.per_frame_heading,
                              ds.norm.per_frame_centroid)
    params = replace(ds.norm)
    params.per_frame_heading = None
    params.per_frame_centroid = None
    params.heading_pair = None
    return MotionDataset(frames, fps=ds.fps, name=ds.name, norm=None)


# ---------------------------------------------------------------------------
# augmentation

def rotate_augment(sequences: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Rigidly rotate each sequence about the vertical axis through its mean (x, y).

    One angle per sequence, uniform on [0, 2pi). Input shape (B, T, 53, 3).
    """
    sequences = np.asarray(sequences, dtype=np.float64)
    out = sequences.copy()
    thetas = rng.uniform(0.0, 2.0 * np.pi, size=sequences.shape[0])
    for i, theta in enumerate(thetas):
        pivot = sequences[i, :, :, :2].mean(axis=(0, 1))
        shifted = out[i].copy()
        shifted[:, :, :2] -= pivot
        rotated = shifted @ _rotz(theta).T
        rotated[:, :, :2] += pivot
        out[i] = rotated
    return out


def offset_augment(frames: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Translate each frame by independent uniform [0, 1] offsets on x and y."""
    frames = np.asarray(frames, dtype=np.float64)
    out = frames.copy()
    offsets = rng.uniform(0.0, 1.0, size=(frames.shape[0], 2))
    out[:, :, 0] += offsets[:, 0:1]
    out[:, :, 1] += offsets[:, 1:2]
    return out


# ---------------------------------------------------------------------------
# windowing

def make_windows(ds: MotionDataset, prompt_len: int, target_len: int,
                 stride: int = 1) -> list[WindowPair]:
    """Cut (prompt, target) pairs of consecutive frames at the given stride."""
    if prompt_len < 1 or target_len < 1 or stride < 1:
        raise DataError("prompt_len, target_len and stride must all be >= 1")
    total = prompt_len + target_len
    if len(ds) < total:
        warnings.warn(
            f"dataset of {len(ds)} frames is too short for windows of {total}",
            stacklevel=2,
        )
        return []
    count = (len(ds) - total) // stride + 1
    pairs = []
    for k in range(count):
        start = k * stride
        pairs.append(WindowPair(
            prompt=ds.frames[start:start + prompt_len].copy(),
            target=ds.frames[start + prompt_len:start + total].copy(),
        ))
    return pairs


def make_sequence_windows(ds: MotionDataset, length: int, stride: int) -> np.ndarray:
    """Contiguous fixed-length excerpts stacked as (N, length, 53, 3)."""
    if length < 1 or stride < 1:
        raise DataError("length and stride must be >= 1")
    if len(ds) < length:
        warnings.warn(f"dataset of {len(ds)} frames is too short for length {length}",
                      stacklevel=2)
        return np.empty((0, length, VERTEX_COUNT, 3))
    count = (len(ds) - length) // stride + 1
    return np.stack([ds.frames[k * stride:k * stride + length] for k in range(count)])


def train_test_split(ds: MotionDataset, train_fraction: float = 0.8):
    """Temporal split: first fraction trains, the rest tests. No shuffling."""
    cut = int(round(len(ds) * train_fraction))
    cut = min(max(cut, 1), len(ds))
    train = MotionDataset(ds.frames[:cut].copy(), fps=ds.fps, name=ds.name, norm=ds.norm)
    test = MotionDataset(ds.frames[cut:].copy(), fps=ds.fps, name=ds.name, norm=ds.norm)
    return train, test


# ---------------------------------------------------------------------------
# animation documents

def animation_doc(frames: np.ndarray, fps: float) -> dict:
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim == 2 and frames.shape[1] == FRAME_DIM:
        frames = frames.reshape(-1, VERTEX_COUNT, 3)
    if frames.ndim != 3 or frames.shape[1:] != (VERTEX_COUNT, 3):
        raise DataError(f"expected (T, {VERTEX_COUNT}, 3) frames, got {frames.shape}")
    return {
        "version": 1,
        "fps": float(fps),
        "vertex_count": VERTEX_COUNT,
        "frames": frames.tolist(),
    }


def parse_animation_doc(doc: dict):
    """Validate an animation document; returns (frames, fps)."""
    if not isinstance(doc, dict):
        raise DataError("animation document must be an object")
    if doc.get("version") != 1:
        raise DataError(f"unsupported animation version {doc.get('version')!r}")
    if doc.get("vertex_count") != VERTEX_COUNT:
        raise DataError(
            f"vertex_count must be {VERTEX_COUNT}, got {doc.get('vertex_count')!r}"
        )
    fps = float(doc.get("fps", 0))
    if fps <= 0:
        raise DataError(f"fps must be positive, got {doc.get('fps')!r}")
    raw = doc.get("frames")
    if raw is None:
        raise DataError("animation document is missing 'frames'")
    frames = np.asarray(raw, dtype=np.float64)
    if frames.size == 0:
        frames = np.empty((0, VERTEX_COUNT, 3))
    if frames.ndim != 3 or frames.shape[1:] != (VERTEX_COUNT, 3):
        raise DataError(f"frames must be (T, {VERTEX_COUNT}, 3), got {frames.shape}")
    if not np.all(np.isfinite(frames)):
        raise DataError("frames contain non-finite coordinates")
    return frames, fps


def export_animation(ds_or_frames, path, fps: float | None = None) -> None:
    """Write frames as a JSON animation document."""
    if isinstance(ds_or_frames, MotionDataset):
        frames, fps = ds_or_frames.frames, ds_or_frames.fps
    else:
        frames = np.asarray(ds_or_frames, dtype=np.float64)
        if fps is None:
            fps = DEFAULT_FPS
    doc = animation_doc(frames, fps)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)
    except OSError as exc:
        raise DataError(f"cannot write animation to {path}: {exc}") from exc


def load_animation(path) -> MotionDataset:
    """Load a JSON animation document or a 159-column CSV."""
    if str(path).lower().endswith(".csv"):
        return _load_csv(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read animation from {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path} is not valid JSON: {exc}") from exc
    frames, fps = parse_animation_doc(doc)
    return MotionDataset(frames, fps=fps, name=str(path))


def _load_csv(path) -> MotionDataset:
    rows = []
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            for row in csv.reader(fh):
                if not row:
                    continue
                if len(row) != FRAME_DIM:
                    raise DataError(
                        f"CSV rows must have {FRAME_DIM} columns, got {len(row)}"
                    )
                rows.append([float(v) for v in row])
    except OSError as exc:
        raise DataError(f"cannot read CSV from {path}: {exc}") from exc
    frames = (np.asarray(rows, dtype=np.float64).reshape(-1, VERTEX_COUNT, 3)
              if rows else np.empty((0, VERTEX_COUNT, 3)))
    return MotionDataset(frames, fps=DEFAULT_FPS, name=str(path))
