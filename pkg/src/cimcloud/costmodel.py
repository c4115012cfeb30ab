"""
Energy, latency and memory-traffic accounting, plus the traffic models of the two digital baselines.

Energy is never stored: it is recomputed from a counter snapshot and an `EnergyParams`, so any
report can be re-costed under other parameters.
"""
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
import csv, logging, math, typing

from .errors import ConfigError, ParamsMismatchError, SampleCountError, SimulationError


logger = logging.getLogger(__name__)

POINT_BITS = 48
TD_BITS = 19


class Stage(str, Enum):
    LOAD = "load"
    PREPROCESS = "preprocess"
    FEATURE = "feature"


COMPONENTS = ("dram", "sram", "cim", "cam", "mac")



@dataclass(frozen=True)
class EnergyParams:
    """
    Per-bit and per-operation energies (pJ) and the clock.

    The SRAM, DRAM, MAC and clock defaults are the accelerator's published figures
    (0.7 pJ/bit, 4.5 pJ/bit, 2.53 TOPS/W at 16 bit, 250 MHz). No per-operation CAM or distance-CIM
    energy is published; those two are placeholders.
    """
    sram_pj_per_bit: float = 0.7
    dram_pj_per_bit: float = 4.5
    mac_pj_per_16b_op: float = 0.3953
    """Aggregate-derived: the reciprocal of 2.53 TOPS/W."""
    cam_pj_per_pair_cycle: float = 0.01
    cim_dist_pj_per_result: float = 0.3953
    clock_hz: float = 2.5e8

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, (int, float)) or not value > 0:
                raise ConfigError(f.name, f"must be strictly positive, got {value!r}")

    @classmethod
    def from_overrides(cls, overrides: dict | None = None) -> "EnergyParams":
        overrides = dict(overrides or {})
        known = {f.name for f in fields(cls)}
        for key in overrides:
            if key not in known:
                raise ConfigError(key, "unknown energy parameter")
        values = {}
        for key, value in overrides.items():
            try:
                values[key] = float(value)
            except (TypeError, ValueError):
                raise ConfigError(key, f"must be a number, got {value!r}") from None
        return cls(**values)



@dataclass(frozen=True)
class BaselineParams:
    """
    Assumptions about the baselines. Per-bit energies come from `EnergyParams`.
    """
    digital_lanes: int = 16
    """Distances computed and temporary distances updated per cycle."""
    dram_bits_per_cycle: int = 128
    """Off-chip bandwidth of the global-access baseline."""
    bit_serial_mac_energy_ratio: float = 4.0
    """Energy of a 16-bit MAC on the bit-serial macro over the SC-CIM one: 16 active cycles against 4."""



@dataclass
class StageCounters:
    """
    Bit-level traffic and operation counters of one stage.<br>
    CAM counters are in pair-cycles: one pair taking part in one cycle.
    """
    dram_bits_read: int = 0
    dram_bits_written: int = 0
    sram_bits_read: int = 0
    sram_bits_written: int = 0
    cim_distance_results: int = 0
    cam_pair_update_cycles: int = 0
    cam_search_cycles: int = 0
    mac_ops_16b: int = 0
    mac_tile_calls: int = 0
    total_cycles: int = 0

    def __add__(self, other: "StageCounters") -> "StageCounters":
        return StageCounters(**{f.name: getattr(self, f.name) + getattr(other, f.name) for f in fields(self)})


COUNTER_FIELDS = tuple(f.name for f in fields(StageCounters))



class AccessCounters:
    """
    Counters of one simulation context, partitioned by stage. They only ever grow.
    """
    def __init__(self):
        self.stages: dict[Stage, StageCounters] = {stage: StageCounters() for stage in Stage}

    def add(self, stage: Stage | str, **deltas: int):
        target = self.stages[Stage(stage)]
        for name, delta in deltas.items():
            if name not in COUNTER_FIELDS:
                raise SimulationError(f"unknown counter '{name}'")
            delta = int(delta)
            if delta < 0:
                raise SimulationError(f"counter '{name}' cannot decrease (delta {delta})")
            setattr(target, name, getattr(target, name) + delta)

    def stage(self, stage: Stage | str) -> StageCounters:
        return self.stages[Stage(stage)]

    def total(self) -> StageCounters:
        result = StageCounters()
        for counters in self.stages.values():
            result = result + counters
        return result

    def merge(self, other: "AccessCounters") -> "AccessCounters":
        merged = AccessCounters()
        for stage in Stage:
            merged.stages[stage] = self.stages[stage] + other.stages[stage]
        return merged

    def snapshot(self) -> dict[str, dict[str, int]]:
        return {stage.value: asdict(counters) for stage, counters in self.stages.items()}

    @classmethod
    def from_snapshot(cls, snapshot: dict) -> "AccessCounters":
        counters = cls()
        for stage, values in snapshot.items():
            counters.add(stage, **values)
        return counters

    def __eq__(self, other):
        return isinstance(other, AccessCounters) and self.snapshot() == other.snapshot()

    def __repr__(self):
        return f"AccessCounters({self.snapshot()})"



@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy in pJ per stage and per component."""
    stages: dict[str, dict[str, float]]

    def stage_total(self, stage: Stage | str) -> float:
        return sum(self.stages[Stage(stage).value].values())

    def component_total(self, component: str) -> float:
        return sum(parts[component] for parts in self.stages.values())

    @property
    def total(self) -> float:
        return sum(self.stage_total(stage) for stage in Stage)

    def on_chip(self, stage: Stage | str | None = None) -> float:
        """Energy without the off-chip DRAM component."""
        stages = [Stage(stage)] if stage is not None else list(Stage)
        return sum(v for s in stages for c, v in self.stages[s.value].items() if c != "dram")



def _component_energy(c: StageCounters, params: EnergyParams) -> dict[str, float]:
    return {
        "dram": (c.dram_bits_read + c.dram_bits_written) * params.dram_pj_per_bit,
        "sram": (c.sram_bits_read + c.sram_bits_written) * params.sram_pj_per_bit,
        "cim": c.cim_distance_results * params.cim_dist_pj_per_result,
        "cam": (c.cam_pair_update_cycles + c.cam_search_cycles) * params.cam_pj_per_pair_cycle,
        "mac": c.mac_ops_16b * params.mac_pj_per_16b_op,
    }


def energy(counters: AccessCounters, params: EnergyParams) -> EnergyBreakdown:
    """
    Energy (pJ) of a counter snapshot: a linear combination of counters and per-unit energies.
    """
    return EnergyBreakdown({stage.value: _component_energy(counters.stage(stage), params) for stage in Stage})



def latency(total_cycles: int, clock_hz: float) -> float:
    """
    Seconds taken by `total_cycles` at `clock_hz`.
    """
    if not clock_hz > 0:
        raise ConfigError("clock_hz", f"must be strictly positive, got {clock_hz!r}")
    return total_cycles / clock_hz



def baseline_global_fps_traffic(n: int, m: int, bits_per_point: int = POINT_BITS) -> dict:
    """
    DRAM traffic of global FPS, which re-reads all n points from DRAM for every sample,
    against a tiled flow that reads each point once.
    """
    if not 0 <= m <= n:
        raise SampleCountError(m, n)
    baseline = m * n * bits_per_point
    tiled = n * bits_per_point
    reduction = 1 - tiled / baseline if baseline else 0.0
    return {"dram_bits_baseline": baseline, "dram_bits_tiled": tiled, "reduction": reduction}



def baseline_local_fps_breakdown(n: int, m: int, td_bits: int = TD_BITS, bits_per_point: int = POINT_BITS) -> dict:
    """
    On-chip traffic of digital local FPS on a tile of n points: every sample reads all n points
    and reads then writes all n temporary distances.
    """
    if not 0 <= m <= n:
        raise SampleCountError(m, n)
    point_access = m * n * bits_per_point
    td_update = m * n * 2 * td_bits
    total = point_access + td_update
    shares = {
        "point_access": point_access / total if total else 0.0,
        "td_update": td_update / total if total else 0.0,
    }
    return {"point_access_bits": point_access, "td_update_bits": td_update, "shares": shares}



def baseline_global_fps_cycles(n: int, m: int, baseline: BaselineParams = BaselineParams()) -> int:
    per_sample = math.ceil(n * POINT_BITS / baseline.dram_bits_per_cycle) + math.ceil(n / baseline.digital_lanes) + 1
    return m * per_sample


def baseline_local_fps_cycles(n: int, m: int, baseline: BaselineParams = BaselineParams()) -> int:
    # one pass computes and updates the distances, a second pass scans them for the maximum
    return m * (2 * math.ceil(n / baseline.digital_lanes) + 1)



@dataclass
class Report:
    counters: AccessCounters
    params: EnergyParams = field(default_factory=EnergyParams)
    config: dict = field(default_factory=dict)

    @property
    def energy(self) -> EnergyBreakdown:
        return energy(self.counters, self.params)

    @property
    def total_cycles(self) -> int:
        return self.counters.total().total_cycles

    @property
    def latency_s(self) -> float:
        return latency(self.total_cycles, self.params.clock_hz)

    def to_json(self) -> dict:
        breakdown = self.energy
        stages = {}
        for stage in Stage:
            cycles = self.counters.stage(stage).total_cycles
            stages[stage.value] = {
                "energy_pj": breakdown.stage_total(stage),
                "components_pj": breakdown.stages[stage.value],
                "cycles": cycles,
                "latency_s": latency(cycles, self.params.clock_hz),
            }
        return {
            "config": self.config,
            "params": asdict(self.params),
            "counters": self.counters.snapshot(),
            "energy_pj": {
                "total": breakdown.total,
                "on_chip": breakdown.on_chip(),
                "components": {c: breakdown.component_total(c) for c in COMPONENTS},
            },
            "latency_s": self.latency_s,
            "stages": stages,
        }


def report_from_json(data: dict) -> Report:
    return Report(AccessCounters.from_snapshot(data["counters"]), EnergyParams(**data["params"]), data.get("config", {}))



def merge_reports(reports: typing.Iterable[Report]) -> Report:
    """
    Counter-wise sum of reports produced under the same energy parameters; the first report's config is kept.
    """
    reports = list(reports)
    if not reports:
        raise SimulationError("merge_reports needs at least one report")
    params = reports[0].params
    counters = AccessCounters()
    for report in reports:
        if report.params != params:
            raise ParamsMismatchError()
        counters = counters.merge(report.counters)
    return Report(counters, params, dict(reports[0].config))



def counters_to_csv(counters: AccessCounters, stream: typing.TextIO):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["stage", *COUNTER_FIELDS])
    for stage, values in counters.snapshot().items():
        writer.writerow([stage, *(values[name] for name in COUNTER_FIELDS)])
