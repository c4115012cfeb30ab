"""
Behavioral and cycle model of the approximate-distance CIM array.

The array stores up to 2048 quantized points in 4 point groups (PTGs) of 16 point clusters (PTCs)
of 32 points. Activating one row of a PTG yields the L1 distances of its 16 PTCs to the reference
registers, so a full array streams 2048 distances in 128 cycles.
"""
from dataclasses import dataclass
import logging, math

import numpy as np

from . import hooks
from .costmodel import AccessCounters, Stage
from .errors import CapacityError, IndexRangeError, SimulationError
from .pointcloud import POINT_BITS, Tile


logger = logging.getLogger(__name__)

PTG_COUNT = 4
PTC_PER_PTG = 16
POINTS_PER_PTC = 32
CAPACITY = PTG_COUNT * PTC_PER_PTG * POINTS_PER_PTC


def address(local_index: int) -> tuple[int, int, int]:
    """
    Physical (ptg, ptc, row) of a tile-local index; consecutive groups of 16 indices share a PTG row.
    """
    ptg, offset = divmod(local_index, PTC_PER_PTG * POINTS_PER_PTC)
    row, ptc = divmod(offset, PTC_PER_PTG)
    return ptg, ptc, row



@dataclass(frozen=True, eq=False)
class DistanceBatch:
    """
    The L1 distances of every loaded point to one reference, in tile-local index order.
    """
    distances: np.ndarray      # (loaded_count,) int64
    point_indices: np.ndarray  # tile-local indices the distances belong to
    reference_index: int       # tile-local index of the reference, -1 for an external point
    cycles_used: int

    def __len__(self):
        return len(self.distances)



class ApdCimArray:
    """
    One distance array; a single simulation context, so its operations are sequential.
    """
    def __init__(self, counters: AccessCounters | None = None, distances_per_cycle: int = PTC_PER_PTG):
        if distances_per_cycle < 1:
            raise SimulationError(f"distances_per_cycle must be at least 1, got {distances_per_cycle}")
        self.counters = counters if counters is not None else AccessCounters()
        self.distances_per_cycle = distances_per_cycle
        self.storage = np.zeros((CAPACITY, 3), dtype=np.int64)
        self.loaded_count = 0
        self.reference: np.ndarray | None = None
        self.reference_index = -1
        self.cycles = 0

    def load_tile(self, tile: Tile) -> "ApdCimArray":
        """
        Writes a tile's points into the SRAM rows; 48 bits are written per point.
        """
        if len(tile) > CAPACITY:
            raise CapacityError(len(tile), CAPACITY)
        self.storage[:len(tile)] = tile.points
        self.loaded_count = len(tile)
        self.reference = None
        self.reference_index = -1
        self.counters.add(Stage.LOAD, sram_bits_written=len(tile) * POINT_BITS)
        return self

    def load_cycles(self) -> int:
        # one PTG row of 16 points is written per cycle
        return math.ceil(self.loaded_count / PTC_PER_PTG)

    def set_reference(self, local_index: int) -> np.ndarray:
        """
        Reads a stored point into the reference registers (1 cycle, 48 SRAM read bits).
        """
        if not 0 <= local_index < self.loaded_count:
            raise IndexRangeError(local_index, self.loaded_count)
        self._latch(self.storage[local_index], local_index)
        return self.reference

    def set_reference_point(self, point) -> np.ndarray:
        """
        Latches an external quantized point (from the point buffer) into the reference registers.
        """
        self._latch(np.asarray(point, dtype=np.int64), -1)
        return self.reference

    def _latch(self, point: np.ndarray, index: int):
        self.reference = point.copy()
        self.reference_index = index
        self.cycles += 1
        self.counters.add(Stage.PREPROCESS, sram_bits_read=POINT_BITS)

    def compute_all(self, reference=None) -> DistanceBatch:
        """
        Streams the L1 distance of every loaded point to the reference, `distances_per_cycle` per cycle.
        """
        if reference is not None:
            self.set_reference_point(reference)
        if self.reference is None:
            raise SimulationError("compute_all needs a reference; call set_reference first")

        n = self.loaded_count
        distances = np.abs(self.storage[:n] - self.reference).sum(axis=1)
        cycles = math.ceil(n / self.distances_per_cycle)
        self.cycles += cycles
        self.counters.add(Stage.PREPROCESS, cim_distance_results=n)

        if hooks.is_hooked(ApdCimArray, "compute_all"):
            for cycle in range(cycles):
                lo = cycle * self.distances_per_cycle
                ptg, _, row = address(lo)
                hooks.call_hook("row", [self.cycles - cycles + cycle, ptg * POINTS_PER_PTC + row, *distances[lo:lo + self.distances_per_cycle].tolist()])

        return DistanceBatch(distances, np.arange(n, dtype=np.int64), self.reference_index, cycles)



def load_tile(tile: Tile, counters: AccessCounters | None = None, distances_per_cycle: int = PTC_PER_PTG) -> ApdCimArray:
    """
    A fresh array holding `tile`.
    """
    return ApdCimArray(counters, distances_per_cycle).load_tile(tile)
