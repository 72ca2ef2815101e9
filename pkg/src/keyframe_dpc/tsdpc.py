"""Temporal segment density peaks clustering.

The video's frames are cut into K contiguous segments of (nearly) equal
length, density peaks clustering runs independently inside each one, and the
per-segment centers are merged into a single sorted list of key frames.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import dpc
from .dpc import DecisionGraph, DpcConfig
from .errors import DimensionMismatchError, MalformedInputError
from .features import FeatureMatrix

DEFAULT_K = 3


@dataclass(frozen=True)
class SegmentSpec:
    k: int
    boundaries: tuple[tuple[int, int], ...]

    @property
    def total_frames(self) -> int:
        return self.boundaries[-1][1]


@dataclass(frozen=True)
class SegmentKeyFrames:
    start: int
    end: int
    n_c: int
    indices: tuple[int, ...]


@dataclass(frozen=True)
class KeyFrameSet:
    """Selected key frames (global indices) and which segment contributed each."""

    total_frames: int
    segments: tuple[SegmentKeyFrames, ...]
    indices: tuple[int, ...] = field(default=())

    def __post_init__(self):
        merged = tuple(sorted(i for s in self.segments for i in s.indices))
        if self.indices and tuple(self.indices) != merged:
            raise MalformedInputError("indices disagree with the per-segment indices")
        object.__setattr__(self, "indices", merged)
        for s in self.segments:
            if not s.indices or len(s.indices) != s.n_c:
                raise MalformedInputError(f"segment [{s.start}, {s.end}) has bad n_c")
            if any(not s.start <= i < s.end for i in s.indices):
                raise MalformedInputError(f"index outside segment [{s.start}, {s.end})")
        if any(b <= a for a, b in zip(merged, merged[1:])):
            raise MalformedInputError("key frame indices are not strictly increasing")

    def __len__(self):
        return len(self.indices)

    def to_dict(self) -> dict:
        return {
            "total_frames": self.total_frames,
            "segments": [
                {"start": s.start, "end": s.end, "n_c": s.n_c, "indices": list(s.indices)}
                for s in self.segments
            ],
            "indices": list(self.indices),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "KeyFrameSet":
        try:
            segments = tuple(
                SegmentKeyFrames(int(s["start"]), int(s["end"]), int(s["n_c"]),
                                 tuple(int(i) for i in s["indices"]))
                for s in data["segments"]
            )
            return cls(int(data["total_frames"]), segments,
                       tuple(int(i) for i in data["indices"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInputError(f"invalid key frame JSON: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "KeyFrameSet":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedInputError(f"invalid key frame JSON: {exc}") from None
        return cls.from_dict(data)


def segment_video(n_frames: int, k: int = DEFAULT_K) -> SegmentSpec:
    """Split ``n_frames`` into ``min(k, n_frames)`` contiguous segments.

    The first ``n_frames % k`` segments take one extra frame.
    """
    if n_frames < 1 or k < 1:
        raise ValueError("n_frames and k must both be positive")
    k = min(k, n_frames)
    base, extra = divmod(n_frames, k)
    bounds = []
    start = 0
    for j in range(k):
        end = start + base + (1 if j < extra else 0)
        bounds.append((start, end))
        start = end
    return SegmentSpec(k, tuple(bounds))


def _degenerate_graph(n: int) -> DecisionGraph:
    # all distances zero: every density is zero and the tie rule points everything at 0
    zero = np.zeros(n)
    return DecisionGraph(zero, zero.copy(), zero.copy(), np.zeros(n, np.int64), 0.0)


def _cluster_segment(rows: np.ndarray, start: int, end: int, config: DpcConfig):
    n = end - start
    if n == 1 or np.all(rows == rows[0]):
        return _degenerate_graph(n), [(start + end - 1) // 2]
    dmat = dpc.compute_distances(rows, config.metric)
    if not np.any(dmat.entries > 0):
        return _degenerate_graph(n), [(start + end - 1) // 2]
    graph = dpc.graph_from_distances(dmat, config)
    n_c = None if config.n_c_override is None else min(config.n_c_override, n)
    centers = dpc.select_centers(graph, n_c)
    return graph, [start + c for c in centers]


def extract_key_frames(features: FeatureMatrix, spec: SegmentSpec,
                       config: DpcConfig = DpcConfig(), workers: int = 1):
    """Cluster each segment and merge the centers.

    Returns the :class:`KeyFrameSet` and the per-segment decision graphs in
    segment order. ``workers > 1`` clusters segments on a thread pool; the
    result is identical to sequential execution.

    An ``n_c_override`` larger than a segment is clamped to the segment length.
    """
    if features.n != spec.total_frames:
        raise DimensionMismatchError(
            f"{features.n} feature rows for a {spec.total_frames}-frame segmentation"
        )
    jobs = [(features.rows[a:b], a, b, config) for a, b in spec.boundaries]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: _cluster_segment(*job), jobs))
    else:
        results = [_cluster_segment(*job) for job in jobs]
    segments = tuple(
        SegmentKeyFrames(a, b, len(idx), tuple(idx))
        for (a, b), (_, idx) in zip(spec.boundaries, results)
    )
    graphs = [g for g, _ in results]
    return KeyFrameSet(spec.total_frames, segments), graphs


def summarize(features: FeatureMatrix, config: DpcConfig = DpcConfig(),
              k: int = DEFAULT_K, workers: int = 1) -> KeyFrameSet:
    """Key frames with the default three segments and ``t = 0.2``."""
    kfs, _ = extract_key_frames(features, segment_video(features.n, k), config, workers)
    return kfs
