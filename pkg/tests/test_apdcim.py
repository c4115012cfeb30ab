import csv

import numpy as np
import pytest

from cimcloud.apdcim import CAPACITY, ApdCimArray, address, load_tile
from cimcloud.context import capture_trace
from cimcloud.costmodel import AccessCounters, Stage
from cimcloud.errors import CapacityError, IndexRangeError, SimulationError
from cimcloud.geometry import l1, l1_to_all
from cimcloud.pointcloud import Tile

from conftest import random_tile


def test_capacity_is_4_ptg_16_ptc_32_points():
    assert CAPACITY == 2048


def test_address_map():
    assert address(0) == (0, 0, 0)
    assert address(15) == (0, 15, 0)
    assert address(16) == (0, 0, 1)
    assert address(511) == (0, 15, 31)
    assert address(512) == (1, 0, 0)
    assert address(2047) == (3, 15, 31)


def test_load_full_tile_counts_write_bits(rng):
    counters = AccessCounters()
    array = load_tile(random_tile(rng, 2048), counters)
    assert array.loaded_count == 2048
    assert counters.stage(Stage.LOAD).sram_bits_written == 98304
    assert array.load_cycles() == 128


def test_load_small_and_oversized(rng):
    assert load_tile(random_tile(rng, 100)).loaded_count == 100
    points = np.zeros((2049, 3), dtype=np.uint16)
    oversized = Tile(points, np.arange(2049), np.zeros(3), np.ones(3), 4096)
    with pytest.raises(CapacityError):
        load_tile(oversized)


def test_set_reference_charges_one_cycle_and_48_bits(rng):
    counters = AccessCounters()
    array = load_tile(random_tile(rng, 64), counters)
    for k in range(1, 4):
        array.set_reference(k)
        assert array.cycles == k
        assert counters.stage(Stage.PREPROCESS).sram_bits_read == 48 * k
    with pytest.raises(IndexRangeError):
        array.set_reference(64)


def test_compute_requires_reference(rng):
    with pytest.raises(SimulationError):
        load_tile(random_tile(rng, 4)).compute_all()


@pytest.mark.parametrize("n, cycles", [(2048, 128), (17, 2), (16, 1), (1, 1)])
def test_compute_all_cycles(rng, n, cycles):
    array = load_tile(random_tile(rng, n))
    array.set_reference(0)
    batch = array.compute_all()
    assert batch.cycles_used == cycles
    assert len(batch) == n
    assert batch.distances[0] == 0


def test_compute_all_matches_l1_oracle(rng):
    counters = AccessCounters()
    tile = random_tile(rng, 777)
    array = load_tile(tile, counters)
    for reference in (0, 5, 776):
        array.set_reference(reference)
        batch = array.compute_all()
        assert batch.reference_index == reference
        assert batch.distances.tolist() == [l1(p, tile.points[reference]) for p in tile.points]
    assert counters.stage(Stage.PREPROCESS).cim_distance_results == 3 * 777


def test_external_reference_point(rng):
    tile = random_tile(rng, 40)
    array = load_tile(tile)
    batch = array.compute_all(reference=(1, 2, 3))
    assert batch.reference_index == -1
    assert np.array_equal(batch.distances, l1_to_all(tile, (1, 2, 3)))
    assert array.cycles == 1 + 3


def test_distances_per_cycle_knob(rng):
    array = ApdCimArray(distances_per_cycle=64).load_tile(random_tile(rng, 2048))
    array.set_reference(1)
    assert array.compute_all().cycles_used == 32


def test_row_trace(rng, tmp_path):
    tile = random_tile(rng, 40)
    array = load_tile(tile)
    array.set_reference(2)
    path = tmp_path / "rows.csv"
    with capture_trace(ApdCimArray, "compute_all", "row", path) as trace:
        batch = array.compute_all()
    array.compute_all()

    with open(path, encoding="utf-8") as file:
        rows = list(csv.reader(file))
    assert trace.rows == 3 == len(rows)
    assert [int(r[1]) for r in rows] == [0, 1, 2]
    assert [int(v) for r in rows for v in r[2:]] == batch.distances.tolist()
