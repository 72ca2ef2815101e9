"""Density peaks clustering over a single set of feature vectors.

The pipeline is pairwise distances -> cutoff distance -> local density
``rho`` -> distance to the nearest denser point ``delta`` -> ``gamma = rho *
delta`` -> center selection. Only centers are computed; non-center points are
never assigned to clusters.

Density ties are resolved by index: among equal densities the lower index
counts as denser, so there is always exactly one density maximum.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ._rounding import round_half_up
from .errors import DegenerateInputError, DimensionMismatchError, KeyframeError
from .features import FeatureMatrix

METRICS = ("euclidean", "cosine")
KERNELS = ("gaussian", "cutoff")

GAP_EPS = 1e-12

GRAPH_HEADER = ("index", "rho", "delta", "gamma", "nhd")


@dataclass(frozen=True)
class DpcConfig:
    t: float = 0.2
    kernel: str = "gaussian"
    metric: str = "euclidean"
    n_c_override: int | None = None

    def __post_init__(self):
        if not (0.0 < self.t <= 1.0):
            raise ValueError(f"t must lie in (0, 1], got {self.t}")
        if self.kernel not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}, got {self.kernel!r}")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.n_c_override is not None and self.n_c_override < 1:
            raise ValueError("n_c_override must be a positive integer")


@dataclass(frozen=True)
class DistanceMatrix:
    """Condensed pairwise distances.

    ``entries`` holds the ``n(n-1)/2`` upper-triangle distances in row-major
    order: (0,1), (0,2), ..., (0,n-1), (1,2), ...
    """

    n: int
    entries: np.ndarray
    metric_tag: str = "euclidean"

    def __post_init__(self):
        m = self.n * (self.n - 1) // 2
        if self.entries.shape != (m,):
            raise DimensionMismatchError(
                f"{self.n} points need {m} distances, got {self.entries.shape}"
            )

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    def square(self) -> np.ndarray:
        sq = np.zeros((self.n, self.n))
        iu = np.triu_indices(self.n, 1)
        sq[iu] = self.entries
        sq[iu[::-1]] = self.entries
        return sq


@dataclass(frozen=True)
class DecisionGraph:
    """Per-point density diagnostics.

    ``nhd[i]`` is the nearest point of higher density, or ``i`` itself for the
    density maximum. ``d_c`` records the cutoff used (NaN when undefined).
    """

    rho: np.ndarray
    delta: np.ndarray
    gamma: np.ndarray
    nhd: np.ndarray
    d_c: float = math.nan

    def __len__(self):
        return self.rho.shape[0]


def compute_distances(features, metric: str = "euclidean") -> DistanceMatrix:
    """Pairwise distances between the rows of ``features``.

    Squared differences and dot products are accumulated one feature
    dimension at a time, so each distance is summed in the same fixed order
    whatever the point count.
    """
    x = features.rows if isinstance(features, FeatureMatrix) else np.asarray(features, float)
    if x.ndim != 2 or x.shape[0] < 1:
        raise DimensionMismatchError(f"expected an N x D array, got shape {x.shape}")
    n, dim = x.shape
    a, b = np.triu_indices(n, 1)
    if metric == "euclidean":
        acc = np.zeros(a.shape[0])
        for k in range(dim):
            diff = x[a, k] - x[b, k]
            acc += diff * diff
        entries = np.sqrt(acc)
    elif metric == "cosine":
        norms = np.zeros(n)
        for k in range(dim):
            norms += x[:, k] * x[:, k]
        norms = np.sqrt(norms)
        if np.any(norms == 0.0):
            raise DegenerateInputError("cosine distance undefined for a zero-norm row")
        dot = np.zeros(a.shape[0])
        for k in range(dim):
            dot += x[a, k] * x[b, k]
        entries = np.clip(1.0 - dot / (norms[a] * norms[b]), 0.0, 2.0)
    else:
        raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")
    return DistanceMatrix(n, entries, metric)


def select_cutoff(dmat: DistanceMatrix, t: float) -> float:
    """The ``round(M*t)``-th smallest pairwise distance (1-based, clamped to [1, M])."""
    if dmat.m == 0:
        raise DegenerateInputError("cutoff distance needs at least two points")
    if not (0.0 < t <= 1.0):
        raise ValueError(f"t must lie in (0, 1], got {t}")
    k = min(max(round_half_up(dmat.m * t), 1), dmat.m)
    return float(np.sort(dmat.entries)[k - 1])


def local_density_cutoff(dmat: DistanceMatrix, d_c: float) -> np.ndarray:
    """Neighbor counts strictly inside ``d_c``."""
    if d_c < 0:
        raise ValueError("d_c must be non-negative")
    close = dmat.square() < d_c
    np.fill_diagonal(close, False)
    return close.sum(axis=1).astype(np.float64)


def local_density_gaussian(dmat: DistanceMatrix, d_c: float) -> np.ndarray:
    """Gaussian-kernel density ``sum_j exp(-(d_ij / d_c)**2)`` over ``j != i``."""
    if not d_c > 0:
        raise KeyframeError(f"invalid Gaussian bandwidth d_c={d_c}")
    weights = np.exp(-np.square(dmat.square() / d_c))
    np.fill_diagonal(weights, 0.0)
    rho = np.zeros(dmat.n)
    # column-by-column so every row is summed in index order
    for j in range(dmat.n):
        rho += weights[:, j]
    return rho


def density_rank(rho: np.ndarray) -> np.ndarray:
    """Rank 0 is the densest point; equal densities rank by ascending index."""
    order = np.argsort(-np.asarray(rho), kind="stable")
    rank = np.empty(len(order), dtype=np.int64)
    rank[order] = np.arange(len(order))
    return rank


def compute_delta(dmat: DistanceMatrix, rho) -> tuple[np.ndarray, np.ndarray]:
    """Distance to, and index of, the nearest point of higher density."""
    rho = np.asarray(rho, dtype=np.float64)
    if rho.shape != (dmat.n,):
        raise DimensionMismatchError(f"rho has shape {rho.shape}, expected ({dmat.n},)")
    n = dmat.n
    sq = dmat.square()
    rank = density_rank(rho)
    denser = rank[None, :] < rank[:, None]
    masked = np.where(denser, sq, np.inf)
    nhd = np.argmin(masked, axis=1) if n else np.zeros(0, dtype=np.int64)
    delta = masked[np.arange(n), nhd] if n else np.zeros(0)
    top = np.flatnonzero(rank == 0)
    for i in top:
        nhd[i] = i
        delta[i] = sq[i].max()
    return delta.astype(np.float64), nhd.astype(np.int64)


def compute_gamma(rho, delta) -> np.ndarray:
    rho = np.asarray(rho, dtype=np.float64)
    delta = np.asarray(delta, dtype=np.float64)
    if rho.shape != delta.shape:
        raise DimensionMismatchError("rho and delta differ in length")
    return rho * delta


def _gamma_order(gamma: np.ndarray) -> np.ndarray:
    return np.argsort(-gamma, kind="stable")


def largest_gap_count(gamma) -> int:
    """Position ``k`` (1-based) of the largest relative drop ``(g_k - g_{k+1}) / (g_k + eps)``
    in ``gamma`` sorted descending; 1 when there are fewer than two values."""
    g = np.sort(np.asarray(gamma, dtype=np.float64))[::-1]
    if g.shape[0] < 2:
        return 1
    gaps = (g[:-1] - g[1:]) / (g[:-1] + GAP_EPS)
    return int(np.argmax(gaps)) + 1


def auto_center_count(gamma) -> int:
    """Automatic center count: the largest relative gap, capped at ``ceil(n/4)``."""
    n = len(gamma)
    if n == 0:
        raise DegenerateInputError("no points")
    cap = max(1, math.ceil(n / 4))
    return max(1, min(largest_gap_count(gamma), cap))


def select_centers(graph, n_c_override: int | None = None) -> list[int]:
    """Indices of the ``n_c`` largest gamma values, in ascending index order.

    ``graph`` may be a :class:`DecisionGraph` or a bare gamma vector. Ties in
    gamma favour the lower index.
    """
    gamma = graph.gamma if isinstance(graph, DecisionGraph) else np.asarray(graph, float)
    n = gamma.shape[0]
    if n == 0:
        raise DegenerateInputError("cannot select centers of an empty graph")
    if n_c_override is not None:
        if not 1 <= n_c_override <= n:
            raise ValueError(f"n_c_override must lie in [1, {n}], got {n_c_override}")
        n_c = n_c_override
    else:
        n_c = auto_center_count(gamma)
    return sorted(int(i) for i in _gamma_order(gamma)[:n_c])


def decision_graph(features, config: DpcConfig = DpcConfig()) -> DecisionGraph:
    """Run distances, cutoff, density, delta and gamma for one point set."""
    return graph_from_distances(compute_distances(features, config.metric), config)


def graph_from_distances(dmat: DistanceMatrix, config: DpcConfig = DpcConfig()) -> DecisionGraph:
    """Decision graph from precomputed distances.

    A single point gets ``rho = delta = gamma = 0``. When the Gaussian kernel
    meets a zero cutoff (many duplicate points) the smallest positive distance
    is used as bandwidth instead; an all-zero matrix raises
    :class:`DegenerateInputError`.
    """
    if dmat.n == 1:
        zero = np.zeros(1)
        return DecisionGraph(zero, zero.copy(), zero.copy(), np.zeros(1, np.int64))
    d_c = select_cutoff(dmat, config.t)
    if config.kernel == "cutoff":
        rho = local_density_cutoff(dmat, d_c)
    else:
        if d_c == 0.0:
            positive = dmat.entries[dmat.entries > 0]
            if positive.size == 0:
                raise DegenerateInputError("all pairwise distances are zero")
            d_c = float(positive.min())
        rho = local_density_gaussian(dmat, d_c)
    delta, nhd = compute_delta(dmat, rho)
    return DecisionGraph(rho, delta, compute_gamma(rho, delta), nhd, d_c)


def write_decision_graph_csv(graphs: Iterable[tuple[int, DecisionGraph]], path) -> None:
    """Write ``(offset, graph)`` pairs as one CSV; ``index`` and ``nhd`` are
    shifted by ``offset`` so rows from several segments share global indices."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GRAPH_HEADER)
        for offset, g in graphs:
            for i in range(len(g)):
                w.writerow([
                    offset + i,
                    repr(float(g.rho[i])),
                    repr(float(g.delta[i])),
                    repr(float(g.gamma[i])),
                    offset + int(g.nhd[i]),
                ])


def read_decision_graph_csv(path) -> list[tuple[int, float, float, float, int]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != GRAPH_HEADER:
            raise ValueError(f"unexpected decision graph header {header}")
        return [(int(r[0]), float(r[1]), float(r[2]), float(r[3]), int(r[4])) for r in reader]
