import numpy as np
import pytest
from hypothesis import given, settings, strategies

from cimcloud.errors import EmptyCloudError, SimulationError
from cimcloud.partition import (
    Axis, PartitionLeaf, build_partition_tree, grid_partition, leaves, median_split, msp_partition, tree_depth,
    tree_to_json, utilization, widest_axis,
)
from cimcloud.pointcloud import PointCloud, generate_cloud


def test_median_split_ties_by_index():
    points = np.array([[1.0, 0, 0], [0.0, 0, 0], [1.0, 0, 0], [0.0, 0, 0]])
    left, right = median_split([0, 1, 2, 3], points, Axis.X)
    assert left.tolist() == [1, 3]
    assert right.tolist() == [0, 2]


def test_median_split_odd_count_gives_left_floor_half():
    points = np.array([[float(v), 0, 0] for v in (5, 3, 1, 4, 2)])
    left, right = median_split(range(5), points, 0)
    assert left.tolist() == [2, 4]
    assert right.tolist() == [0, 1, 3]


def test_median_split_needs_two_points():
    with pytest.raises(SimulationError):
        median_split([0], np.zeros((1, 3)), Axis.Y)


def test_widest_axis_prefers_lower_on_tie():
    points = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 0.5]])
    assert widest_axis([0, 1], points) is Axis.X


def test_uniform_16k_gives_8_full_tiles():
    cloud = generate_cloud("uniform", 16384, seed=1)
    tiles = msp_partition(cloud, 2048)
    assert len(tiles) == 8
    assert [len(t) for t in tiles] == [2048] * 8
    assert utilization(tiles, 2048) == 1.0


@settings(max_examples=40, deadline=None)
@given(strategies.integers(1, 3000), strategies.integers(8, 600), strategies.integers(0, 2**32 - 1))
def test_tiles_cover_cloud_exactly_once(n, capacity, seed):
    cloud = generate_cloud("clustered", n, seed)
    tiles = msp_partition(cloud, capacity)
    indices = np.concatenate([t.global_indices for t in tiles])
    assert sorted(indices.tolist()) == list(range(n))
    sizes = [len(t) for t in tiles]
    assert max(sizes) <= capacity
    assert max(sizes) - min(sizes) <= tree_depth(build_partition_tree(cloud, capacity))
    for t in tiles:
        assert t.global_indices.tolist() == sorted(t.global_indices.tolist())


def test_tree_depth_and_leaves():
    cloud = generate_cloud("gaussian", 1000, seed=2)
    tree = build_partition_tree(cloud, 100)
    assert len(leaves(tree)) == 16
    assert tree_depth(tree) == 4
    assert isinstance(leaves(build_partition_tree(cloud, 1000))[0], PartitionLeaf)


def test_small_cloud_is_one_tile():
    cloud = PointCloud(np.array([[0.1, 0.2, 0.3]]))
    tiles = msp_partition(cloud, 2048)
    assert len(tiles) == 1 and tiles[0].global_indices.tolist() == [0]


def test_empty_cloud_rejected():
    with pytest.raises(EmptyCloudError):
        msp_partition(PointCloud(np.zeros((0, 3))), 16)


def test_grid_underfills_on_uniform_cloud():
    cloud = generate_cloud("uniform", 16384, seed=4)
    grid = grid_partition(cloud, 2048)
    msp = msp_partition(cloud, 2048)
    assert sorted(np.concatenate([t.global_indices for t in grid]).tolist()) == list(range(16384))
    assert all(len(t) <= 2048 for t in grid)
    assert utilization(msp, 2048) == 1.0
    assert utilization(grid, 2048) < utilization(msp, 2048)


def test_tree_to_json_shape():
    cloud = PointCloud(np.array([[0.0, 0, 0], [1.0, 0, 0], [2.0, 0, 0]]))
    data = tree_to_json(build_partition_tree(cloud, 2))
    assert data["axis"] == "X"
    assert data["left"] == {"leaf": [0]}
    assert data["right"] == {"leaf": [1, 2]}
    assert data["median"] == 0.0


def test_utilization_of_sizes():
    assert utilization([1024, 2048], 2048) == 0.75


def test_nine_points_capacity_four():
    cloud = PointCloud(np.array([[float(i), 0.0, 0.0] for i in range(9)]))
    tiles = msp_partition(cloud, 4)
    assert [len(t) for t in tiles] == [4, 2, 3]
    assert utilization(tiles, 4) == 0.75


def test_split_by_coordinate_order():
    points = np.array([[5.0, 0, 0], [1.0, 0, 0], [9.0, 0, 0], [3.0, 0, 0]])
    left, right = median_split(range(4), points, Axis.X)
    assert sorted(points[left, 0].tolist()) == [1.0, 3.0]
    assert sorted(points[right, 0].tolist()) == [5.0, 9.0]


def test_monotone_transform_keeps_leaves():
    cloud = generate_cloud("gaussian", 700, seed=9)
    warped = PointCloud(cloud.points * 2.5 + np.array([0.0, -2.0, 7.0]))
    a = [leaf.indices.tolist() for leaf in leaves(build_partition_tree(cloud, 64))]
    b = [leaf.indices.tolist() for leaf in leaves(build_partition_tree(warped, 64))]
    assert a == b
