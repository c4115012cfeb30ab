import json

import pytest

from cimcloud.config import RunConfig, load_config_file
from cimcloud.errors import ConfigError
from cimcloud.geometry import QueryConfig


def test_defaults():
    cfg = RunConfig().validate()
    assert (cfg.capacity, cfg.quant_bits, cfg.generator_n, cfg.threads) == (2048, 16, 16384, 1)
    assert cfg.query == QueryConfig(6554, 1.6, 32)
    assert cfg.energy_params().dram_pj_per_bit == 4.5


def test_precedence_defaults_file_flags():
    file_dict = {"seed": 3, "capacity": 512, "query": {"radius_R": 100}, "energy": {"sram_pj_per_bit": 0.5}}
    flag_dict = {"seed": 9, "capacity": None, "query": {"radius_R": None, "max_neighbors_K": 8}}
    cfg = RunConfig.from_sources(file_dict, flag_dict)
    assert cfg.seed == 9
    assert cfg.capacity == 512
    assert cfg.query == QueryConfig(100, 1.6, 8)
    assert cfg.energy_params().sram_pj_per_bit == 0.5


@pytest.mark.parametrize("overrides", [
    {"capacity": 0},
    {"capacity": 4096},
    {"quant_bits": 8},
    {"threads": 0},
    {"seed": -1},
    {"generator_n": 0},
    {"input_format": "ply"},
    {"generator_kind": "spiral"},
    {"energy": {"dram_pj_per_bit": 0}},
    {"energy": {"flux": 1}},
    {"query": {"scale_factor": 0}},
    {"query": {"radius": 1}},
    {"query": {"radius_R": "far"}},
    {"query": 5},
    {"energy": {"dram_pj_per_bit": "fast"}},
    {"energy": [1, 2]},
    {"bogus": 1},
])
def test_invalid_values(overrides):
    with pytest.raises(ConfigError):
        RunConfig.from_sources(overrides)


def test_json_round_trip(tmp_path):
    cfg = RunConfig(seed=5, energy={"clock_hz": 1e9})
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_json()))
    assert RunConfig.from_dict(load_config_file(path)) == cfg


def test_bad_config_files(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config_file(path)
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config_file(path)
