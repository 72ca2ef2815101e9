"""Multi-stream weight fusion and summary statistics."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._rounding import round_half_up
from .errors import DimensionMismatchError, KeyframeError


@dataclass(frozen=True)
class FusionWeights:
    """Integer stream weights derived from per-stream accuracy rates.

    ``t0``, ``t1`` and ``t2`` are the intermediate vectors of the derivation;
    they are kept for reporting.
    """

    rates: tuple[float, ...]
    t0: tuple[float, ...]
    t1: tuple[int, ...]
    t2: tuple[float, ...]
    w: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"rates": list(self.rates), "t0": list(self.t0), "t1": list(self.t1),
                "t2": list(self.t2), "w": list(self.w)}


def compute_fusion_weights(rates: Sequence[float]) -> FusionWeights:
    """Map accuracy percentages to small integer weights.

    The lowest rate always gets weight 1. The others are scaled from their
    distance above the minimum, measured in tenths of the minimum's headroom
    to 100, rescaled so the largest lands on the rounded top value, then
    rounded half-up. Equal rates, or rates too close to produce a rounded
    spread above one, give all-ones weights.
    """
    r = [float(x) for x in rates]
    if not r:
        raise KeyframeError("at least one rate is required")
    if any(not 0.0 <= x <= 100.0 for x in r):
        raise KeyframeError("rates must be percentages in [0, 100]")
    lo = min(r)
    if lo == 100.0:
        # every rate is 100, the headroom divisor would be zero
        t0 = [0.0] * len(r)
    else:
        scale = (100.0 - lo) / 10.0
        t0 = [(x - lo) / scale for x in r]
    t1 = [round_half_up(x) for x in t0]
    top0, top1 = max(t0), max(t1)
    if top0 == 0.0 or top1 <= 1:
        t2 = [1.0] * len(r)
    else:
        t2 = [x * (top1 - 1) / top0 + 1.0 for x in t0]
    w = [round_half_up(x) for x in t2]
    return FusionWeights(tuple(r), tuple(t0), tuple(t1), tuple(t2), tuple(w))


def weighted_combine(predictions, weights) -> np.ndarray:
    """Weight-normalized mean of per-stream video predictions.

    ``predictions`` holds :class:`~keyframe_dpc.lstm.PredictionMatrix`
    objects or bare probability vectors; ``weights`` is a
    :class:`FusionWeights` or a plain sequence.
    """
    w = np.asarray(weights.w if isinstance(weights, FusionWeights) else weights, dtype=np.float64)
    vecs = [np.asarray(getattr(p, "video_prediction", p), dtype=np.float64) for p in predictions]
    if not vecs:
        raise KeyframeError("no predictions to combine")
    if len(vecs) != w.shape[0]:
        raise DimensionMismatchError(f"{len(vecs)} predictions but {w.shape[0]} weights")
    if any(v.shape != vecs[0].shape for v in vecs):
        raise DimensionMismatchError("predictions have different class counts")
    if np.any(w <= 0):
        raise KeyframeError("weights must be positive")
    total = np.zeros_like(vecs[0])
    for wi, v in zip(w, vecs):
        total += wi * v
    return total / w.sum()


def compression_ratio(n_key: int, n_total: int) -> float:
    """Fraction of frames discarded, ``1 - n_key / n_total``."""
    if not 1 <= n_key <= n_total:
        raise KeyframeError(f"need 1 <= n_key <= n_total, got {n_key}, {n_total}")
    return 1.0 - n_key / n_total


@dataclass(frozen=True)
class SummaryStats:
    total_frames: int
    key_frames: int
    compression_ratio: float
    extraction_ms: float

    @classmethod
    def from_counts(cls, key_frames: int, total_frames: int, extraction_ms: float = 0.0):
        return cls(total_frames, key_frames, compression_ratio(key_frames, total_frames),
                   float(extraction_ms))

    def to_json(self) -> str:
        return json.dumps({
            "total_frames": self.total_frames,
            "key_frames": self.key_frames,
            "compression_ratio": self.compression_ratio,
            "extraction_ms": self.extraction_ms,
        }, indent=2) + "\n"
