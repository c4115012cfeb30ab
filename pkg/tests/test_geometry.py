import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies

from cimcloud.errors import ConfigError, SampleCountError
from cimcloud.geometry import (
    Metric, QueryConfig, ball_query, coverage_radius, exact_fps, interpolate_weights, knn, l1, l2_sq, lattice_query,
    lattice_range, neighbor_recall, within,
)
from cimcloud.partition import msp_partition
from cimcloud.pointcloud import generate_cloud

from conftest import random_tile


coords = strategies.tuples(*[strategies.integers(0, 65535)] * 3)


def test_distance_examples():
    assert l2_sq((0, 0, 0), (0, 0, 0)) == 0
    assert l2_sq((1, 2, 3), (4, 6, 9)) == 61
    assert l1((1, 2, 3), (4, 6, 9)) == 13
    assert l1((0, 0, 0), (65535, 65535, 65535)) == 196605


@given(coords, coords, coords)
def test_metric_properties(a, b, c):
    assert l2_sq(a, b) == l2_sq(b, a)
    assert l1(a, b) == l1(b, a)
    assert l1(a, c) <= l1(a, b) + l1(b, c)
    assert l2_sq(a, b) <= l1(a, b) ** 2 <= 3 * l2_sq(a, b)
    assert (l1(a, b) == 0) == (a == b)


def test_query_config_validation():
    with pytest.raises(ConfigError):
        QueryConfig(radius_R=-1)
    with pytest.raises(ConfigError):
        QueryConfig(scale_factor=0)
    with pytest.raises(ConfigError):
        QueryConfig(max_neighbors_K=0)


def test_fps_collinear_example():
    points = np.array([[x, 0, 0] for x in (0, 10, 1, 9, 5)])
    assert exact_fps(points, 3, 0, Metric.L1) == [0, 1, 4]


def test_fps_edges(rng):
    tile = random_tile(rng, 50)
    assert exact_fps(tile, 1, seed_index=7) == [7]
    assert sorted(exact_fps(tile, 50)) == list(range(50))
    with pytest.raises(SampleCountError):
        exact_fps(tile, 51)
    with pytest.raises(SampleCountError):
        exact_fps(tile, 0)


def _textbook_fps(points, m, seed):
    chosen = [seed]
    for _ in range(m - 1):
        best, best_d = 0, -1
        for i, p in enumerate(points):
            d = min(l2_sq(p, points[c]) for c in chosen)
            if d > best_d:
                best, best_d = i, d
        chosen.append(best)
    return chosen


def test_fps_l2_matches_textbook(rng):
    for _ in range(5):
        tile = random_tile(rng, 40, high=64)
        points = tile.points.astype(np.int64).tolist()
        assert exact_fps(tile, 12, 0, Metric.L2) == _textbook_fps(points, 12, 0)


def test_ball_query_edges(rng):
    tile = random_tile(rng, 100, high=8)
    center = 3
    same = [i for i, p in enumerate(tile.points.tolist()) if p == tile.points[center].tolist()]
    assert ball_query(tile, center, 0, 100) == same

    d = [l2_sq(p, tile.points[center]) for p in tile.points]
    expected = sorted(range(100), key=lambda i: (d[i], i))[:10]
    assert ball_query(tile, center, 10**6, 10) == expected


def test_ball_query_matches_brute_force(rng):
    tile = random_tile(rng, 300, high=2000)
    for center in range(0, 300, 37):
        d = [l2_sq(p, tile.points[center]) for p in tile.points]
        expected = sorted((i for i in range(300) if d[i] <= 400**2), key=lambda i: (d[i], i))[:16]
        assert ball_query(tile, center, 400, 16) == expected


def test_lattice_range_rounds_half_up():
    assert lattice_range(QueryConfig(5, 1.5, 1)) == 8
    assert lattice_range(QueryConfig(6554, 1.6, 32)) == 10486


def test_lattice_sandwich(rng):
    """
    Before truncation the L1 range L = round(sqrt(3) R) contains the L2 ball of radius R,
    and any L1 range L lies inside the L2 ball of radius L.
    """
    for case in range(10_000):
        tile = random_tile(rng, 32, high=int(rng.integers(16, 4096)))
        center = tile.points[int(rng.integers(0, 32))]
        R = int(rng.integers(0, 3000))
        L = lattice_range(QueryConfig(R, math.sqrt(3), 32))
        ball = set(within(tile, center, R, Metric.L2).tolist())
        lattice = set(within(tile, center, L, Metric.L1).tolist())
        assert ball <= lattice
        assert lattice <= set(within(tile, center, L, Metric.L2).tolist())


def test_lattice_query_truncates_nearest_first(rng):
    tile = random_tile(rng, 200, high=300)
    cfg = QueryConfig(100, 1.6, 5)
    d = [l1(p, tile.points[0]) for p in tile.points]
    expected = sorted((i for i in range(200) if d[i] <= 160), key=lambda i: (d[i], i))[:5]
    assert lattice_query(tile, 0, cfg) == expected


def test_lattice_recall_on_uniform_tiles():
    cfg = QueryConfig(6554, 1.6, 32)
    approx, exact = [], []
    for seed in range(100):
        tile = msp_partition(generate_cloud("uniform", 2048, seed), 2048)[0]
        for center in range(0, 2048, 32):
            approx.append(lattice_query(tile, center, cfg))
            exact.append(ball_query(tile, center, cfg.radius_R, cfg.max_neighbors_K))
    assert neighbor_recall(approx, exact) >= 0.95


def test_knn(rng):
    tile = random_tile(rng, 60, high=50)
    assert sorted(knn(tile, tile.points[0], 60)) == list(range(60))
    target = tile.points[17]
    first = knn(tile, target, 1)
    assert l1(tile.points[first[0]], target) == 0 and first[0] <= 17
    d = [l1(p, target) for p in tile.points]
    assert knn(tile, target, 7, Metric.L1) == sorted(range(60), key=lambda i: (d[i], i))[:7]
    with pytest.raises(SampleCountError):
        knn(tile, target, 61)


def test_interpolate_weights():
    assert interpolate_weights([42]).tolist() == [1.0]
    assert np.allclose(interpolate_weights([5, 5, 5]), [1 / 3] * 3)
    assert np.allclose(interpolate_weights([0, 9]), [10 / 11, 1 / 11])


@given(strategies.lists(strategies.integers(0, 196605), min_size=1, max_size=16))
def test_interpolate_weights_sum_to_one(distances):
    assert abs(interpolate_weights(distances).sum() - 1.0) <= 1e-12


def test_coverage_radius_and_recall():
    points = np.array([[0, 0, 0], [3, 4, 0], [10, 0, 0]])
    assert coverage_radius(points, [0]) == 10.0
    assert coverage_radius(points, [0, 2]) == 5.0
    assert neighbor_recall([[1, 2], [5]], [[1, 2, 3], [5]]) == 0.75
