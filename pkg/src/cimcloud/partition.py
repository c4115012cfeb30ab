"""
Median-based spatial partitioning (MSP) of a cloud into equally sized, capacity-bounded tiles,
plus the fixed-cube grid partitioner it is compared against.
"""
from dataclasses import dataclass
from enum import IntEnum
import logging, math

import numpy as np

from .errors import EmptyCloudError, SimulationError
from .pointcloud import PointCloud, Tile, quantize_tile


logger = logging.getLogger(__name__)


class Axis(IntEnum):
    X = 0
    Y = 1
    Z = 2



@dataclass(frozen=True, eq=False)
class PartitionLeaf:
    indices: np.ndarray   # ascending global indices


@dataclass(frozen=True, eq=False)
class PartitionNode:
    axis: Axis
    median_value: float   # largest left coordinate on `axis`
    left: "PartitionNode | PartitionLeaf"
    right: "PartitionNode | PartitionLeaf"


type PartitionTree = PartitionNode | PartitionLeaf



def _coords(points: PointCloud | np.ndarray) -> np.ndarray:
    return points.points if isinstance(points, PointCloud) else np.asarray(points, dtype=np.float64)


def median_split(indices, points: PointCloud | np.ndarray, axis: Axis | int) -> tuple[np.ndarray, np.ndarray]:
    """
    Splits an index set at the median of one axis.

    The left half holds the floor(n/2) smallest coordinates, the right half the rest; equal coordinates
    are ordered by global index. Both halves are returned in ascending index order.
    """
    indices = np.asarray(indices, dtype=np.int64)
    if len(indices) < 2:
        raise SimulationError(f"median_split needs at least 2 indices, got {len(indices)}")

    values = _coords(points)[indices, int(axis)]
    order = np.lexsort((indices, values))   # primary key: coordinate, secondary: index
    half = len(indices) // 2
    return np.sort(indices[order[:half]]), np.sort(indices[order[half:]])



def widest_axis(indices, points: PointCloud | np.ndarray) -> Axis:
    """
    The axis with the largest raw-coordinate extent over `indices`; ties go to the lower axis.
    """
    subset = _coords(points)[np.asarray(indices, dtype=np.int64)]
    extent = subset.max(axis=0) - subset.min(axis=0)
    return Axis(int(np.argmax(extent)))



def build_partition_tree(cloud: PointCloud, capacity: int) -> PartitionTree:
    """
    Recursively median-splits the cloud along the widest axis until every leaf fits `capacity`.
    """
    if len(cloud) == 0:
        raise EmptyCloudError(cloud.source)
    if capacity < 1:
        raise SimulationError(f"capacity must be at least 1, got {capacity}")

    def build(indices: np.ndarray) -> PartitionTree:
        if len(indices) <= capacity:
            return PartitionLeaf(indices)
        axis = widest_axis(indices, cloud)
        left, right = median_split(indices, cloud, axis)
        median_value = float(cloud.points[left, int(axis)].max())
        return PartitionNode(axis, median_value, build(left), build(right))

    return build(np.arange(len(cloud), dtype=np.int64))



def leaves(tree: PartitionTree) -> list[PartitionLeaf]:
    """
    The leaves of a partition tree, depth-first, left before right.
    """
    if isinstance(tree, PartitionLeaf):
        return [tree]
    return leaves(tree.left) + leaves(tree.right)


def tree_depth(tree: PartitionTree) -> int:
    if isinstance(tree, PartitionLeaf):
        return 0
    return 1 + max(tree_depth(tree.left), tree_depth(tree.right))



def msp_partition(cloud: PointCloud, capacity: int) -> list[Tile]:
    """
    Partitions a cloud with MSP and quantizes every leaf into a tile.
    """
    tiles = [quantize_tile(cloud.points[leaf.indices], leaf.indices, capacity)
             for leaf in leaves(build_partition_tree(cloud, capacity))]
    logger.info(f"MSP: {len(cloud)} points -> {len(tiles)} tiles (capacity {capacity})")
    return tiles



def grid_partition(cloud: PointCloud, capacity: int) -> list[Tile]:
    """
    Fixed-shape comparison partitioner.<br>
    The bounding box is cut into ceil((n/capacity)^(1/3)) equal cubes per axis; a cube holding more than
    `capacity` points is cut into index-ordered chunks, and empty cubes produce no tile.
    """
    if len(cloud) == 0:
        raise EmptyCloudError(cloud.source)

    cells_per_axis = max(1, math.ceil((len(cloud) / capacity) ** (1 / 3) - 1e-9))
    low = cloud.points.min(axis=0)
    extent = cloud.points.max(axis=0) - low
    with np.errstate(divide="ignore", invalid="ignore"):
        cell = np.where(extent > 0, np.floor((cloud.points - low) / np.where(extent > 0, extent, 1.0) * cells_per_axis), 0)
    cell = np.clip(cell, 0, cells_per_axis - 1).astype(np.int64)
    cell_id = (cell[:, 0] * cells_per_axis + cell[:, 1]) * cells_per_axis + cell[:, 2]

    tiles = []
    for cid in np.unique(cell_id):
        members = np.flatnonzero(cell_id == cid)
        for start in range(0, len(members), capacity):
            chunk = members[start:start + capacity]
            tiles.append(quantize_tile(cloud.points[chunk], chunk, capacity))
    logger.debug(f"Grid: {cells_per_axis}^3 cubes -> {len(tiles)} tiles")
    return tiles



def utilization(tiles, capacity: int) -> float:
    """
    Mean fill of the on-chip array over the tiles: the mean of size / capacity.
    """
    sizes = [len(t) if hasattr(t, "__len__") else int(t) for t in tiles]
    if not sizes:
        raise SimulationError("utilization of an empty tile list")
    return sum(sizes) / (len(sizes) * capacity)



def tree_to_json(tree: PartitionTree) -> dict:
    if isinstance(tree, PartitionLeaf):
        return {"leaf": tree.indices.tolist()}
    return {
        "axis": tree.axis.name,
        "median": tree.median_value,
        "left": tree_to_json(tree.left),
        "right": tree_to_json(tree.right),
    }
