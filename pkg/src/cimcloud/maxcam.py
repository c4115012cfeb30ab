"""
Behavioral and cycle model of the two-level Ping-Pong-MAX CAM.

Every point owns a pair of 19-bit temporary distances (TDP); the live D_s of the point is the smaller
one. A new distance always overwrites the larger slot, so the pair keeps a running minimum while the
smaller slot stays searchable. The maximum is found by a 19-cycle MSB-to-LSB bit search and its
address by a 1-cycle data search. Two arrays alternate between search and load roles across tiles.
"""
from dataclasses import dataclass, replace
from enum import Enum
import logging, math

import numpy as np

from . import hooks
from .apdcim import DistanceBatch
from .costmodel import AccessCounters, Stage
from .errors import (
    CamModeError, CapacityError, EmptySearchError, MisalignedBatchError, NoMatchError, PingPongConflictError,
)
from .geometry import DISTANCE_BITS, DISTANCE_MAX


logger = logging.getLogger(__name__)

GROUP_COUNT = 16
PAIRS_PER_GROUP = 128
CAPACITY = GROUP_COUNT * PAIRS_PER_GROUP
BIT_CAM_CYCLES = DISTANCE_BITS
DATA_CAM_CYCLES = 1
PIPELINE_FILL_CYCLES = 1


class CamMode(str, Enum):
    IDLE = "idle"
    LOAD = "load"
    SEARCH = "search"


class Slot(str, Enum):
    UPPER_LARGER = "upper_larger"
    LOWER_LARGER = "lower_larger"



@dataclass(frozen=True)
class TdPair:
    upper: int = DISTANCE_MAX
    lower: int = DISTANCE_MAX
    point_index: int = 0
    search_enabled: bool = True

    @property
    def effective(self) -> int:
        return min(self.upper, self.lower)



def in_situ_compare(pair: TdPair) -> Slot:
    """
    Which slot holds the larger temporary distance; a tie reports the upper slot.
    """
    return Slot.UPPER_LARGER if pair.upper >= pair.lower else Slot.LOWER_LARGER



def update_pair(pair: TdPair, d: int) -> TdPair:
    """
    Overwrites the larger slot with `d`, leaving the smaller one (the live D_s) untouched.
    """
    if in_situ_compare(pair) is Slot.UPPER_LARGER:
        return replace(pair, upper=int(d))
    return replace(pair, lower=int(d))



@dataclass(frozen=True)
class SearchResult:
    max_value: int
    centroid_index: int
    address: int
    cycles: int = BIT_CAM_CYCLES + DATA_CAM_CYCLES



class CamArray:
    """
    One CAM array of 16 temporary distance groups x 128 pairs, flattened group-major:
    pair address a lives in group a // 128.
    """
    def __init__(self, counters: AccessCounters | None = None):
        self.counters = counters if counters is not None else AccessCounters()
        self.upper = np.empty(0, dtype=np.int64)
        self.lower = np.empty(0, dtype=np.int64)
        self.point_index = np.empty(0, dtype=np.int64)
        self.search_enabled = np.empty(0, dtype=bool)
        self.mode = CamMode.IDLE

    def __len__(self):
        return len(self.upper)

    def pair(self, address: int) -> TdPair:
        return TdPair(int(self.upper[address]), int(self.lower[address]), int(self.point_index[address]),
                      bool(self.search_enabled[address]))

    def group(self, g: int) -> list[TdPair]:
        return [self.pair(a) for a in range(g * PAIRS_PER_GROUP, min(len(self), (g + 1) * PAIRS_PER_GROUP))]

    @property
    def effective(self) -> np.ndarray:
        return np.minimum(self.upper, self.lower)

    def _require(self, operation: str, *modes: CamMode):
        if self.mode not in modes:
            raise CamModeError(operation, self.mode.value)

    def init_array(self, n: int) -> "CamArray":
        """
        Loads n pairs at 2^19-1 in both slots (the +infinity of the running minimum), all searchable.
        """
        self._require("init_array", CamMode.IDLE, CamMode.LOAD)
        if not 0 <= n <= CAPACITY:
            raise CapacityError(n, CAPACITY)
        self.mode = CamMode.LOAD
        self.upper = np.full(n, DISTANCE_MAX, dtype=np.int64)
        self.lower = np.full(n, DISTANCE_MAX, dtype=np.int64)
        self.point_index = np.arange(n, dtype=np.int64)
        self.search_enabled = np.ones(n, dtype=bool)
        self.counters.add(Stage.LOAD, sram_bits_written=n * 2 * DISTANCE_BITS)
        return self

    @staticmethod
    def load_cycles(n: int) -> int:
        # the 16 groups are written in parallel, one pair each per cycle
        return math.ceil(n / GROUP_COUNT)

    def activate(self):
        self._require("activate", CamMode.LOAD, CamMode.SEARCH)
        self.mode = CamMode.SEARCH

    def release(self):
        self.mode = CamMode.IDLE

    def stream_update(self, batch: DistanceBatch) -> int:
        """
        Applies `update_pair` to every pair with its streamed distance.

        The updates ride on the distance array's output cycles, so the only added latency is the
        pipeline fill.

        Returns:
            The cycles added beyond the distance stream (1, or 0 for an empty batch).
        """
        self._require("stream_update", CamMode.SEARCH)
        if len(batch) != len(self) or not np.array_equal(batch.point_indices, self.point_index):
            raise MisalignedBatchError(len(self), len(batch))
        if len(batch) == 0:
            return 0

        d = np.asarray(batch.distances, dtype=np.int64)
        upper_larger = self.upper >= self.lower
        self.upper = np.where(upper_larger, d, self.upper)
        self.lower = np.where(upper_larger, self.lower, d)
        self.counters.add(Stage.PREPROCESS, cam_pair_update_cycles=len(batch))
        return PIPELINE_FILL_CYCLES

    def bit_cam_max(self) -> tuple[int, int]:
        """
        Serial MSB-to-LSB search for the largest effective value.<br>
        At every bit, if any surviving pair has a 1 there, the pairs with a 0 drop out of the
        following bit cycles. The drop-out latches are local to one search.

        Returns:
            `(max_value, 19)`
        """
        self._require("bit_cam_max", CamMode.SEARCH)
        enabled = self.search_enabled.copy()
        participating = int(enabled.sum())
        if participating == 0:
            raise EmptySearchError()

        effective = self.effective
        surviving = enabled
        max_value = 0
        traced = hooks.is_hooked(CamArray, "bit_cam_max")
        for bit in range(DISTANCE_BITS - 1, -1, -1):
            ones = surviving & (((effective >> bit) & 1) == 1)
            if ones.any():
                surviving = ones
                max_value |= 1 << bit
            if traced:
                hooks.call_hook("bit", [bit, int(surviving.sum())])

        self.counters.add(Stage.PREPROCESS, cam_search_cycles=BIT_CAM_CYCLES * participating)
        return max_value, BIT_CAM_CYCLES

    def data_cam_index(self, value: int) -> int:
        """
        Bit-parallel match of `value` against every enabled pair; the lowest matching address wins.

        Returns:
            The tile-local point index held by the matching pair.
        """
        return int(self.point_index[self._match_address(value)])

    def _match_address(self, value: int) -> int:
        self._require("data_cam_index", CamMode.SEARCH)
        matches = np.flatnonzero(self.search_enabled & (self.effective == value))
        self.counters.add(Stage.PREPROCESS, cam_search_cycles=DATA_CAM_CYCLES * int(self.search_enabled.sum()))
        if len(matches) == 0:
            raise NoMatchError(value)
        return int(matches[0])

    def find_centroid(self) -> SearchResult:
        """
        Bit search for the maximal D_s followed by a data search for its address (20 cycles).
        """
        max_value, bit_cycles = self.bit_cam_max()
        address = self._match_address(max_value)
        return SearchResult(max_value, int(self.point_index[address]), address, bit_cycles + DATA_CAM_CYCLES)



def init_array(n: int, counters: AccessCounters | None = None) -> CamArray:
    return CamArray(counters).init_array(n)


def stream_update(array: CamArray, batch: DistanceBatch) -> int:
    return array.stream_update(batch)


def bit_cam_max(array: CamArray) -> tuple[int, int]:
    return array.bit_cam_max()


def data_cam_index(array: CamArray, value: int) -> int:
    return array.data_cam_index(value)


def find_centroid(array: CamArray) -> SearchResult:
    return array.find_centroid()



@dataclass(frozen=True)
class CamWork:
    """Cycles of work issued to one of the two arrays (`"a"` or `"b"`)."""
    target: str
    cycles: int



class PingPongCam:
    """
    Two CAM arrays sharing a global selector: while one searches the current tile, the other is loaded
    for the next one, and the roles swap at the tile boundary.
    """
    def __init__(self, counters: AccessCounters | None = None):
        self.counters = counters if counters is not None else AccessCounters()
        self.arrays = {"a": CamArray(self.counters), "b": CamArray(self.counters)}
        self.active: str | None = None

    @property
    def array_a(self) -> CamArray:
        return self.arrays["a"]

    @property
    def array_b(self) -> CamArray:
        return self.arrays["b"]

    @property
    def standby(self) -> str:
        return "b" if self.active == "a" else "a"

    def search_array(self) -> CamArray:
        return self.arrays[self.active]

    def load_array(self) -> CamArray:
        return self.arrays[self.standby]

    def swap(self):
        """
        Tile boundary: the freshly loaded array starts searching, the other one becomes loadable.
        """
        incoming = self.standby
        if self.active is not None:
            self.arrays[self.active].release()
        self.arrays[incoming].activate()
        self.active = incoming
        logger.debug(f"Ping-pong CAM: array '{incoming}' now searching")



def pingpong_step(cam: PingPongCam, search_work: CamWork | None, load_work: CamWork | None) -> int:
    """
    Runs search work on one array and load work on the other in the same simulated cycles.

    Returns:
        The step latency: the longer of the two.
    """
    if search_work is not None and load_work is not None and search_work.target == load_work.target:
        raise PingPongConflictError(search_work.target)
    if search_work is not None and cam.arrays[search_work.target].mode is not CamMode.SEARCH:
        raise CamModeError("search work", cam.arrays[search_work.target].mode.value)
    if load_work is not None and cam.arrays[load_work.target].mode is CamMode.SEARCH:
        raise CamModeError("load work", CamMode.SEARCH.value)
    return max(search_work.cycles if search_work else 0, load_work.cycles if load_work else 0)



def schedule_tiles(search_cycles: list[int], load_cycles: list[int]) -> dict:
    """
    Total cycles of a sequence of tiles with and without the array-level ping-pong.

    Pipelined: load tile 0, then each step searches tile i while loading tile i+1.
    Sequential: every tile loads and then searches on a single array.
    """
    if len(search_cycles) != len(load_cycles):
        raise MisalignedBatchError(len(search_cycles), len(load_cycles))

    sequential = sum(search_cycles) + sum(load_cycles)
    if not search_cycles:
        return {"pipelined": 0, "sequential": 0, "exposed_load": []}

    cam = PingPongCam()
    cam.load_array().init_array(0)
    exposed = [load_cycles[0]]
    pipelined = pingpong_step(cam, None, CamWork(cam.standby, load_cycles[0]))
    for i, search in enumerate(search_cycles):
        cam.swap()
        nxt = load_cycles[i + 1] if i + 1 < len(load_cycles) else 0
        if i + 1 < len(load_cycles):
            cam.load_array().init_array(0)
        step = pingpong_step(cam, CamWork(cam.active, search), CamWork(cam.standby, nxt))
        pipelined += step
        if i + 1 < len(load_cycles):
            exposed.append(step - search)
    return {"pipelined": pipelined, "sequential": sequential, "exposed_load": exposed}
