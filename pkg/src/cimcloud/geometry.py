"""
Reference distances, exact sampling/grouping oracles and the approximate lattice query.

All functions take quantized points (tile rows) and work in exact integer arithmetic;
every tie is broken toward the lowest index.
"""
from dataclasses import dataclass
from enum import Enum
import logging, math

import numpy as np

from .errors import ConfigError, IndexRangeError, SampleCountError, SimulationError
from .pointcloud import Tile


logger = logging.getLogger(__name__)

DISTANCE_BITS = 19
DISTANCE_MAX = (1 << DISTANCE_BITS) - 1
INTERPOLATION_EPS = 1.0


class Metric(str, Enum):
    L1 = "L1"
    L2 = "L2"



@dataclass(frozen=True)
class QueryConfig:
    """
    Neighbor query parameters in quantized units.
    """
    radius_R: int = 6554
    scale_factor: float = 1.6
    max_neighbors_K: int = 32

    def __post_init__(self):
        if self.radius_R < 0:
            raise ConfigError("radius_R", f"must be non-negative, got {self.radius_R}")
        if not self.scale_factor > 0:
            raise ConfigError("scale_factor", f"must be positive, got {self.scale_factor}")
        if self.max_neighbors_K < 1:
            raise ConfigError("max_neighbors_K", f"must be at least 1, got {self.max_neighbors_K}")



def _points(points: Tile | np.ndarray) -> np.ndarray:
    raw = points.points if isinstance(points, Tile) else points
    return np.asarray(raw, dtype=np.int64).reshape(-1, 3)


def l2_sq(a, b) -> int:
    """
    Exact squared Euclidean distance between two quantized points.
    """
    diff = np.asarray(a, dtype=np.int64) - np.asarray(b, dtype=np.int64)
    return int(np.dot(diff, diff))


def l1(a, b) -> int:
    """
    Exact Manhattan distance between two quantized points (at most 3 x 65535, inside 19 bits).
    """
    return int(np.abs(np.asarray(a, dtype=np.int64) - np.asarray(b, dtype=np.int64)).sum())


def l2_sq_to_all(points: Tile | np.ndarray, reference) -> np.ndarray:
    diff = _points(points) - np.asarray(reference, dtype=np.int64)
    return np.einsum("ij,ij->i", diff, diff)


def l1_to_all(points: Tile | np.ndarray, reference) -> np.ndarray:
    return np.abs(_points(points) - np.asarray(reference, dtype=np.int64)).sum(axis=1)


def distances_to_all(points: Tile | np.ndarray, reference, metric: Metric | str) -> np.ndarray:
    if Metric(metric) is Metric.L1:
        return l1_to_all(points, reference)
    return l2_sq_to_all(points, reference)



def nearest_first(distances: np.ndarray, candidates: np.ndarray | None = None) -> np.ndarray:
    """
    Candidate indices ordered by (distance, index).
    """
    if candidates is None:
        candidates = np.arange(len(distances), dtype=np.int64)
    return candidates[np.lexsort((candidates, distances[candidates]))]



def exact_fps(points: Tile | np.ndarray, m: int, seed_index: int = 0, metric: Metric | str = Metric.L1) -> list[int]:
    """
    Farthest point sampling.<br>
    D_s holds every point's minimal distance to the sampled set; each step samples the argmax of D_s
    (lowest index on ties). A sampled point has D_s = 0, so it is only picked again once every
    D_s is 0 (duplicate points).

    Args:
        `points`: The tile (or (n, 3) quantized array) to sample.
        `m`: The number of centroids, 1 <= m <= n.
        `seed_index`: The first centroid.
        `metric`: `L1` (the accelerator's approximation) or `L2` (squared Euclidean).
    """
    coords = _points(points)
    n = len(coords)
    if not 1 <= m <= n:
        raise SampleCountError(m, n)
    if not 0 <= seed_index < n:
        raise IndexRangeError(seed_index, n)

    centroids = [seed_index]
    d_s = distances_to_all(coords, coords[seed_index], metric)
    for _ in range(m - 1):
        nxt = int(np.argmax(d_s))
        centroids.append(nxt)
        np.minimum(d_s, distances_to_all(coords, coords[nxt], metric), out=d_s)
    return centroids



def within(points: Tile | np.ndarray, center, threshold: int, metric: Metric | str) -> np.ndarray:
    """
    Every index whose distance to `center` is at most `threshold`, ascending.<br>
    For `L2` the threshold is a radius and is compared against the squared distance as `threshold**2`.
    """
    if Metric(metric) is Metric.L1:
        return np.flatnonzero(l1_to_all(points, center) <= threshold)
    return np.flatnonzero(l2_sq_to_all(points, center) <= int(threshold) ** 2)



def ball_query(points: Tile | np.ndarray, center_idx: int, R: int, K: int) -> list[int]:
    """
    Points within L2 radius `R` of the center (itself included), the nearest `K` of them.
    """
    coords = _points(points)
    if not 0 <= center_idx < len(coords):
        raise IndexRangeError(center_idx, len(coords))
    d = l2_sq_to_all(coords, coords[center_idx])
    candidates = np.flatnonzero(d <= int(R) ** 2)
    return nearest_first(d, candidates)[:K].tolist()



def lattice_range(cfg: QueryConfig) -> int:
    """
    The lattice query range L = scale_factor x R, rounded half up to whole quantized units.
    """
    return int(math.floor(cfg.scale_factor * cfg.radius_R + 0.5))



def lattice_query(points: Tile | np.ndarray, center_idx: int, cfg: QueryConfig) -> list[int]:
    """
    Points within L1 range L = round(scale_factor x R) of the center, the nearest `K` of them by L1.
    """
    coords = _points(points)
    if not 0 <= center_idx < len(coords):
        raise IndexRangeError(center_idx, len(coords))
    d = l1_to_all(coords, coords[center_idx])
    candidates = np.flatnonzero(d <= lattice_range(cfg))
    return nearest_first(d, candidates)[:cfg.max_neighbors_K].tolist()



def knn(points: Tile | np.ndarray, center, k: int, metric: Metric | str = Metric.L1) -> list[int]:
    """
    The `k` points nearest to an arbitrary quantized point.
    """
    coords = _points(points)
    if not 1 <= k <= len(coords):
        raise SampleCountError(k, len(coords))
    return nearest_first(distances_to_all(coords, center, metric))[:k].tolist()



def interpolate_weights(distances) -> np.ndarray:
    """
    Inverse-distance weights w_i = (1/(d_i+eps)) / sum_j (1/(d_j+eps)), eps = 1 quantized unit.
    """
    d = np.asarray(distances, dtype=np.float64)
    if d.size == 0:
        raise SimulationError("interpolate_weights needs at least one distance")
    inverse = 1.0 / (d + INTERPOLATION_EPS)
    return inverse / inverse.sum()



def coverage_radius(points: Tile | np.ndarray, centroids) -> float:
    """
    The largest L2 distance from any point to its nearest centroid; smaller means better coverage.
    """
    coords = _points(points)
    nearest = np.full(len(coords), np.iinfo(np.int64).max, dtype=np.int64)
    for c in centroids:
        np.minimum(nearest, l2_sq_to_all(coords, coords[c]), out=nearest)
    return math.sqrt(int(nearest.max()))



def neighbor_recall(approx: list[list[int]], exact: list[list[int]]) -> float:
    """
    Pooled recall of approximate neighbor lists against exact ones: sum |A & E| / sum |E|.
    """
    hits = sum(len(set(a) & set(e)) for a, e in zip(approx, exact, strict=True))
    total = sum(len(e) for e in exact)
    return hits / total if total else 1.0
