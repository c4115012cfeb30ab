import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cimcloud.apdcim import DistanceBatch
from cimcloud.context import capture_trace
from cimcloud.costmodel import AccessCounters, Stage
from cimcloud.errors import (
    CamModeError, CapacityError, EmptySearchError, MisalignedBatchError, NoMatchError, PingPongConflictError,
)
from cimcloud.geometry import DISTANCE_MAX
from cimcloud.maxcam import (
    CAPACITY, CamArray, CamMode, CamWork, PingPongCam, Slot, TdPair, in_situ_compare, init_array, pingpong_step,
    schedule_tiles, update_pair,
)


def batch(values) -> DistanceBatch:
    values = np.asarray(values, dtype=np.int64)
    return DistanceBatch(values, np.arange(len(values), dtype=np.int64), -1, 0)


def searching(values, counters=None) -> CamArray:
    """An active array whose effective values are `values`."""
    array = init_array(len(values), counters)
    array.activate()
    if len(values):
        array.stream_update(batch(values))
    return array


distances = st.integers(min_value=0, max_value=DISTANCE_MAX)


def test_init_array_fills_with_max():
    counters = AccessCounters()
    array = init_array(CAPACITY, counters)
    assert CAPACITY == 2048
    assert array.mode is CamMode.LOAD
    assert np.all(array.effective == 524287)
    assert array.pair(2047) == TdPair(524287, 524287, 2047, True)
    assert len(array.group(15)) == 128
    assert counters.stage(Stage.LOAD).sram_bits_written == 2048 * 38
    assert CamArray.load_cycles(2048) == 128
    with pytest.raises(CapacityError):
        init_array(2049)


def test_in_situ_compare():
    assert in_situ_compare(TdPair(100, 50)) is Slot.UPPER_LARGER
    assert in_situ_compare(TdPair(50, 100)) is Slot.LOWER_LARGER
    assert in_situ_compare(TdPair(7, 7)) is Slot.UPPER_LARGER


def test_update_pair_examples():
    assert update_pair(TdPair(100, 50), 70) == TdPair(70, 50)
    first = update_pair(TdPair(), 40)
    assert (first.upper, first.lower, first.effective) == (40, 524287, 40)
    stale = update_pair(TdPair(30, 50), 90)
    assert (stale.upper, stale.lower, stale.effective) == (30, 90, 30)


@given(st.lists(distances, max_size=64))
def test_update_pair_keeps_running_min(values):
    pair = TdPair()
    for d in values:
        pair = update_pair(pair, d)
    assert pair.effective == min([DISTANCE_MAX, *values])


def test_stream_update_keeps_running_min_over_many_sequences(rng):
    array = searching(np.full(10_000, DISTANCE_MAX))
    running = np.full(10_000, DISTANCE_MAX)
    for _ in range(64):
        d = rng.integers(0, DISTANCE_MAX + 1, size=10_000)
        array.stream_update(batch(d))
        running = np.minimum(running, d)
        assert np.array_equal(array.effective, running)


def test_stream_update_cycles_and_counters():
    counters = AccessCounters()
    array = searching([], counters)
    assert array.stream_update(batch([])) == 0
    array = init_array(2048, counters)
    array.activate()
    assert array.stream_update(batch(np.arange(2048))) == 1
    assert counters.stage(Stage.PREPROCESS).cam_pair_update_cycles == 2048


def test_stream_update_rejects_misaligned_batch():
    array = searching([1, 2, 3])
    with pytest.raises(MisalignedBatchError):
        array.stream_update(batch([1, 2]))
    shuffled = DistanceBatch(np.array([1, 2, 3]), np.array([0, 2, 1]), -1, 0)
    with pytest.raises(MisalignedBatchError):
        array.stream_update(shuffled)


def test_bit_cam_max_examples():
    assert searching([5, 12, 9]).bit_cam_max() == (12, 19)
    assert searching([0, 0, 0]).bit_cam_max() == (0, 19)


def test_bit_cam_max_random_full_array(rng):
    counters = AccessCounters()
    values = rng.integers(0, DISTANCE_MAX + 1, size=2048)
    assert searching(values, counters).bit_cam_max() == (int(values.max()), 19)
    assert counters.stage(Stage.PREPROCESS).cam_search_cycles == 19 * 2048


def test_bit_cam_max_restores_exclusion_latches():
    array = searching([5, 12, 9])
    array.bit_cam_max()
    assert array.search_enabled.all()


def test_disabled_pairs_do_not_participate():
    array = searching([5, 12, 9])
    array.search_enabled[1] = False
    assert array.bit_cam_max() == (9, 19)
    with pytest.raises(NoMatchError):
        array.data_cam_index(12)
    array.search_enabled[:] = False
    with pytest.raises(EmptySearchError):
        array.bit_cam_max()


def test_data_cam_index_lowest_address():
    array = searching([7, 7, 3])
    assert array.data_cam_index(7) == 0
    assert array.data_cam_index(3) == 2
    with pytest.raises(NoMatchError):
        array.data_cam_index(8)


def test_find_centroid_examples():
    result = searching([0, DISTANCE_MAX, 3]).find_centroid()
    assert (result.max_value, result.centroid_index, result.cycles) == (524287, 1, 20)
    assert searching([4, 4, 4, 4]).find_centroid().centroid_index == 0


def test_empty_array_search_fails():
    with pytest.raises(EmptySearchError):
        searching([]).find_centroid()


def test_find_centroid_matches_brute_force_argmax(rng):
    for _ in range(10_000):
        n = int(rng.integers(1, 2049))
        high = int(rng.choice([4, 64, DISTANCE_MAX + 1]))
        array = searching(rng.integers(0, high, size=n))
        if rng.random() < 0.5:
            array.stream_update(batch(rng.integers(0, high, size=n)))
        effective = array.effective
        result = array.find_centroid()
        assert result.max_value == int(effective.max())
        assert result.centroid_index == int(np.argmax(effective))
        assert result.cycles == 20


def test_sampled_point_never_reselected(rng):
    values = rng.integers(1, 1000, size=64)
    array = searching(values)
    first = array.find_centroid().centroid_index
    d = np.abs(values - values[first])
    array.stream_update(batch(d))
    assert array.effective[first] == 0
    assert array.find_centroid().centroid_index != first


def test_mode_safety():
    array = CamArray()
    with pytest.raises(CamModeError):
        array.activate()
    array.init_array(4)
    with pytest.raises(CamModeError):
        array.stream_update(batch([1, 2, 3, 4]))
    with pytest.raises(CamModeError):
        array.bit_cam_max()
    with pytest.raises(CamModeError):
        array.data_cam_index(1)
    array.activate()
    with pytest.raises(CamModeError):
        array.init_array(4)
    array.release()
    assert array.mode is CamMode.IDLE


def test_bit_search_trace(tmp_path):
    path = tmp_path / "bits.csv"
    with capture_trace(CamArray, "bit_cam_max", "bit", path, ["bit", "surviving"]) as trace:
        searching([5, 12, 9]).bit_cam_max()
    assert trace.rows == 19
    with open(path, encoding="utf-8") as file:
        rows = list(csv.reader(file))
    assert rows[0] == ["bit", "surviving"]
    # bit 3 separates 12 and 9 (1xxx) from 5 (0101)
    assert rows[-4] == ["3", "2"]
    assert rows[-1] == ["0", "1"]


def test_pingpong_step():
    cam = PingPongCam()
    cam.load_array().init_array(8)
    assert pingpong_step(cam, None, CamWork(cam.standby, 16)) == 16
    cam.swap()
    assert cam.search_array().mode is CamMode.SEARCH
    cam.load_array().init_array(8)
    assert pingpong_step(cam, CamWork(cam.active, 20), CamWork(cam.standby, 16)) == 20
    with pytest.raises(PingPongConflictError):
        pingpong_step(cam, CamWork(cam.active, 20), CamWork(cam.active, 16))
    with pytest.raises(CamModeError):
        pingpong_step(cam, CamWork(cam.standby, 20), None)
    with pytest.raises(CamModeError):
        pingpong_step(cam, None, CamWork(cam.active, 16))


def test_swap_alternates_arrays():
    cam = PingPongCam()
    cam.array_a.init_array(4)
    cam.swap()
    assert cam.active == "a"
    cam.array_b.init_array(4)
    cam.swap()
    assert cam.active == "b"
    assert cam.array_a.mode is CamMode.IDLE


def test_schedule_tiles():
    schedule = schedule_tiles([150, 150], [128, 128])
    assert schedule["sequential"] == 556
    assert schedule["pipelined"] == 128 + 150 + 150
    assert schedule["pipelined"] < schedule["sequential"]
    assert schedule["exposed_load"] == [128, 0]
    assert schedule_tiles([10, 10], [128, 128])["exposed_load"] == [128, 118]
    assert schedule_tiles([], []) == {"pipelined": 0, "sequential": 0, "exposed_load": []}
    with pytest.raises(MisalignedBatchError):
        schedule_tiles([1], [])
