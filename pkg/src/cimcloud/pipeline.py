"""
End-to-end simulation of a point-based network on the accelerator.

Every tile is an independent simulation context. Inside a tile, the PSA layers sample and group level after
level (FPS on the distance array and CAM, grouping on the same distance stream) and the PFP layers walk the
levels back up. Across tiles, CAM initialisation of the next tile hides behind the current tile's search.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
import json, logging, math, os, typing

import numpy as np

from . import apdcim, maxcam, sccim
from .costmodel import (
    AccessCounters, BaselineParams, EnergyParams, Report, Stage, baseline_global_fps_cycles, baseline_global_fps_traffic,
    baseline_local_fps_breakdown, baseline_local_fps_cycles, energy, merge_reports,
)
from .errors import ConfigError, DimensionError, SampleCountError, SimulationError, StaleBatchError
from .geometry import QueryConfig, interpolate_weights, lattice_range, nearest_first
from .partition import msp_partition
from .pointcloud import POINT_BITS, PointCloud, Tile, sub_tile


logger = logging.getLogger(__name__)

INT16_MIN = sccim.INT16_MIN
INT16_MAX = sccim.INT16_MAX
REQUANT_SHIFT = 4
WEIGHT_RANGE = 4



@dataclass(frozen=True)
class PsaLayerConfig:
    """Point set abstraction: sample, group, per-point MLP, max pooling."""
    samples_per_tile: int = 512
    """Centroids sampled per tile; a smaller tile samples all of its points."""
    radius_R: int = 6554
    scale_factor: float = 1.6
    max_neighbors_K: int = 32
    mlp_dims: tuple[int, ...] = (16, 32)
    weight_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mlp_dims", tuple(int(d) for d in self.mlp_dims))
        if not 1 <= self.samples_per_tile <= apdcim.CAPACITY:
            raise ConfigError("samples_per_tile", f"must be in [1, {apdcim.CAPACITY}], got {self.samples_per_tile}")
        if not self.mlp_dims or min(self.mlp_dims) < 1:
            raise ConfigError("mlp_dims", f"must be a non-empty list of positive widths, got {list(self.mlp_dims)}")
        self.query  # QueryConfig validates R, scale factor and K

    @property
    def query(self) -> QueryConfig:
        return QueryConfig(self.radius_R, self.scale_factor, self.max_neighbors_K)



@dataclass(frozen=True)
class PfpLayerConfig:
    """Point feature propagation: kNN, inverse-distance interpolation, skip concat, MLP."""
    k: int = 3
    mlp_dims: tuple[int, ...] = (32,)
    weight_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mlp_dims", tuple(int(d) for d in self.mlp_dims))
        if self.k < 1:
            raise ConfigError("k", f"must be at least 1, got {self.k}")
        if not self.mlp_dims or min(self.mlp_dims) < 1:
            raise ConfigError("mlp_dims", f"must be a non-empty list of positive widths, got {list(self.mlp_dims)}")


type LayerConfig = PsaLayerConfig | PfpLayerConfig
type NetworkConfig = tuple[LayerConfig, ...]


DEFAULT_NETWORK: NetworkConfig = (
    PsaLayerConfig(512, 6554, 1.6, 32, (16, 32), weight_seed=1),
    PsaLayerConfig(128, 13107, 1.6, 32, (32, 64), weight_seed=2),
    PfpLayerConfig(3, (32,), weight_seed=3),
    PfpLayerConfig(3, (16,), weight_seed=4),
)



def validate_network(network: typing.Sequence[LayerConfig]) -> NetworkConfig:
    """
    A network is one or more PSA layers followed by at most as many PFP layers.
    """
    network = tuple(network)
    psa = [layer for layer in network if isinstance(layer, PsaLayerConfig)]
    pfp = [layer for layer in network if isinstance(layer, PfpLayerConfig)]
    if not psa:
        raise ConfigError("layers", "a network needs at least one PSA layer")
    if len(psa) + len(pfp) != len(network) or network[:len(psa)] != tuple(psa):
        raise ConfigError("layers", "PSA layers must all come before PFP layers")
    if len(pfp) > len(psa):
        raise ConfigError("layers", f"{len(pfp)} PFP layers cannot restore only {len(psa)} PSA levels")
    return network


def network_from_json(data: dict) -> NetworkConfig:
    layers = []
    for position, entry in enumerate(data.get("layers", [])):
        entry = dict(entry)
        kind = entry.pop("type", None)
        cls = {"psa": PsaLayerConfig, "pfp": PfpLayerConfig}.get(kind)
        if cls is None:
            raise ConfigError(f"layers[{position}].type", f"expected 'psa' or 'pfp', got {kind!r}")
        known = {f.name for f in fields(cls)}
        unknown = set(entry) - known
        if unknown:
            raise ConfigError(f"layers[{position}]", f"unknown fields {sorted(unknown)}")
        layers.append(cls(**entry))
    return validate_network(layers)


def with_query(network: typing.Sequence[LayerConfig], **query) -> NetworkConfig:
    """
    The network with `query` (any of `radius_R`, `scale_factor`, `max_neighbors_K`) applied to every PSA layer.
    """
    return tuple(replace(layer, **query) if isinstance(layer, PsaLayerConfig) else layer for layer in network)


def network_to_json(network: NetworkConfig) -> dict:
    return {"layers": [
        {"type": "psa" if isinstance(layer, PsaLayerConfig) else "pfp", **asdict(layer)} for layer in network
    ]}


def load_network_config(path: str | os.PathLike) -> NetworkConfig:
    with open(path, "r", encoding="utf-8") as file:
        try:
            data = json.load(file)
        except json.JSONDecodeError as e:
            raise ConfigError("network", f"{path} is not valid JSON ({e.msg} at line {e.lineno})") from e
    return network_from_json(data)



@dataclass(frozen=True, eq=False)
class FeatureTensor:
    """Per-point signed 16-bit feature vectors of one dimension."""
    values: np.ndarray   # (points, dim) int64

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.int64)
        if values.ndim != 2:
            raise DimensionError("(points, dim)", values.shape)
        if values.size and (values.min() < INT16_MIN or values.max() > INT16_MAX):
            raise SimulationError("feature values must be signed 16-bit")
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __len__(self):
        return self.values.shape[0]



def initial_features(tile: Tile) -> FeatureTensor:
    # quantized coordinates halved into the signed 16-bit range
    return FeatureTensor(tile.points.astype(np.int64) >> 1)



def saturate(values) -> np.ndarray:
    return np.clip(values, INT16_MIN, INT16_MAX).astype(np.int64)



class Mlp:
    """
    A stack of signed 16-bit weight matrices run on SC-CIM tiles.

    Between layers the accumulator is shifted right by `requant_shift` and saturated to 16 bits.

    Args:
        `in_dim`: The width of the input features.
        `dims`: The output width of every layer.
        `seed`: Seeds the synthetic weights, uniform in [-4, 4].
        `weights`: Explicit `(in, out)` matrices instead of seeded ones.
    """
    def __init__(self, in_dim: int, dims: typing.Sequence[int], seed: int = 0, requant_shift: int = REQUANT_SHIFT,
                 weights: list | None = None):
        if weights is None:
            rng = np.random.default_rng(seed)
            widths = [in_dim, *dims]
            weights = [rng.integers(-WEIGHT_RANGE, WEIGHT_RANGE + 1, size=(a, b)) for a, b in zip(widths, widths[1:])]
        self.weights = [np.asarray(w, dtype=np.int64) for w in weights]
        self.requant_shift = requant_shift
        previous = in_dim
        for w in self.weights:
            if w.shape[0] != previous:
                raise DimensionError(previous, w.shape[0])
            previous = w.shape[1]

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[1]

    def __call__(self, features: FeatureTensor, counters: AccessCounters | None = None) -> FeatureTensor:
        if features.dim != self.in_dim:
            raise DimensionError(self.in_dim, features.dim)
        x = features.values
        for w in self.weights:
            x = self._layer(x, w, counters)
        return FeatureTensor(x)

    def _layer(self, x: np.ndarray, w: np.ndarray, counters: AccessCounters | None) -> np.ndarray:
        points, (in_dim, out_dim) = len(x), w.shape
        chunks = math.ceil(in_dim / sccim.ROWS)
        padded_x = np.zeros((points, chunks * sccim.ROWS), dtype=np.int64)
        padded_x[:, :in_dim] = x
        padded_w = np.zeros((chunks * sccim.ROWS, out_dim), dtype=np.int64)
        padded_w[:in_dim] = w

        accumulator = np.zeros((points, out_dim), dtype=np.int64)
        if points:
            for c in range(chunks):
                rows = slice(c * sccim.ROWS, (c + 1) * sccim.ROWS)
                accumulator += sccim.SccimTile(padded_w[rows]).matmul(padded_x[:, rows])

        if counters is not None:
            calls = sccim.layer_mac_calls(points, in_dim, out_dim)
            counters.add(Stage.FEATURE, mac_ops_16b=points * in_dim * out_dim, mac_tile_calls=calls,
                         total_cycles=calls * sccim.CLUSTER_CYCLES)
        return saturate(accumulator >> self.requant_shift)



@dataclass(frozen=True, eq=False)
class FpsResult:
    centroids: list[int]
    batches: list[apdcim.DistanceBatch]   # batches[i] holds the distances to centroids[i]
    cycles: int



def accel_fps(tile: Tile, m: int, seed_index: int = 0, counters: AccessCounters | None = None,
              apd: apdcim.ApdCimArray | None = None, cam: maxcam.CamArray | None = None) -> FpsResult:
    """
    Farthest point sampling on the distance array and the MAX-CAM.

    Each sample latches the current centroid as reference (1 cycle), streams its distances into the CAM
    (ceil(n/16) cycles plus 1 fill) and searches the next centroid (19 + 1 cycles).

    Args:
        `tile`: The points to sample.
        `m`: Centroids to return, 0 <= m <= n.
        `seed_index`: The first centroid.
        `counters`: Where loads and accesses are charged when the arrays are created here.
        `apd`, `cam`: Arrays already holding the tile (the CAM freshly initialised); created and loaded when omitted.
    """
    n = len(tile)
    if not 0 <= m <= n:
        raise SampleCountError(m, n)
    if m == 0:
        return FpsResult([], [], 0)

    counters = counters if counters is not None else AccessCounters()
    if apd is None:
        apd = apdcim.load_tile(tile, counters)
        counters.add(Stage.LOAD, total_cycles=apd.load_cycles())
    if cam is None:
        cam = maxcam.init_array(n, counters)
        counters.add(Stage.LOAD, total_cycles=maxcam.CamArray.load_cycles(n))
    if cam.mode is not maxcam.CamMode.SEARCH:
        cam.activate()

    centroids, batches = [seed_index], []
    cycles = 0
    for s in range(m):
        apd.set_reference(centroids[s])
        batch = apd.compute_all()
        fill = cam.stream_update(batch)
        found = cam.find_centroid()
        batches.append(batch)
        cycles += 1 + batch.cycles_used + fill + found.cycles
        if s + 1 < m:
            centroids.append(found.centroid_index)

    counters.add(Stage.PREPROCESS, total_cycles=cycles)
    logger.debug(f"FPS: {m} centroids from {n} points in {cycles} cycles")
    return FpsResult(centroids, batches, cycles)



def fused_grouping(tile: Tile, centroid: int, distance_batch: apdcim.DistanceBatch, cfg: QueryConfig) -> list[int]:
    """
    Lattice query of one centroid on the distances already streamed for it during FPS.<br>
    The sorter keeps the nearest K inside L; no distance is recomputed.
    """
    if distance_batch.reference_index != centroid:
        raise StaleBatchError(centroid, distance_batch.reference_index)
    if len(distance_batch) != len(tile):
        raise DimensionError(len(tile), len(distance_batch))
    d = distance_batch.distances
    candidates = np.flatnonzero(d <= lattice_range(cfg))
    return nearest_first(d, candidates)[:cfg.max_neighbors_K].tolist()



@dataclass(frozen=True, eq=False)
class PsaLevel:
    """One sampled level of a tile: its centroids, their neighborhoods and the pooled features."""
    tile: Tile                     # the points the level sampled from
    centroids: list[int]           # local indices into `tile`
    neighbors: list[list[int]]
    features: FeatureTensor        # one pooled row per centroid
    computed_points: int           # distinct points the MLP ran on
    fps_cycles: int


def _psa_on_tile(tile: Tile, features: FeatureTensor, cfg: PsaLayerConfig, counters: AccessCounters,
                 cam_preloaded: bool = False) -> PsaLevel:
    if len(features) != len(tile):
        raise DimensionError(len(tile), len(features))
    m = min(cfg.samples_per_tile, len(tile))

    apd = apdcim.load_tile(tile, counters)
    counters.add(Stage.LOAD, total_cycles=apd.load_cycles())
    cam = maxcam.init_array(len(tile), counters)
    if not cam_preloaded:
        counters.add(Stage.LOAD, total_cycles=maxcam.CamArray.load_cycles(len(tile)))

    fps = accel_fps(tile, m, 0, counters, apd, cam)
    neighbors = [fused_grouping(tile, c, batch, cfg.query) for c, batch in zip(fps.centroids, fps.batches)]

    # delayed aggregation: every point in some neighborhood goes through the MLP once, then max pooling
    mlp = Mlp(features.dim, cfg.mlp_dims, cfg.weight_seed)
    members = np.unique(np.concatenate([np.asarray(group, dtype=np.int64) for group in neighbors]))
    computed = mlp(FeatureTensor(features.values[members]), counters)
    row_of = np.full(len(tile), -1, dtype=np.int64)
    row_of[members] = np.arange(len(members))
    pooled = np.stack([computed.values[row_of[group]].max(axis=0) for group in neighbors])

    return PsaLevel(tile, fps.centroids, neighbors, FeatureTensor(pooled), len(members), fps.cycles)



def run_pfp_layer(source_points: Tile, source_features: FeatureTensor, target_points: Tile, cfg: PfpLayerConfig,
                  target_features: FeatureTensor | None = None, counters: AccessCounters | None = None) -> FeatureTensor:
    """
    Up-samples features from `source_points` to `target_points`.

    Every target is latched into the distance array's reference registers; its k nearest sources by L1 are
    interpolated with inverse-distance weights, rounded half up and saturated. The target's own features,
    when given, are concatenated after the interpolated ones before the MLP.
    """
    if len(source_features) != len(source_points):
        raise DimensionError(len(source_points), len(source_features))
    if not cfg.k <= len(source_points):
        raise SampleCountError(cfg.k, len(source_points))
    if target_features is not None and len(target_features) != len(target_points):
        raise DimensionError(len(target_points), len(target_features))
    counters = counters if counters is not None else AccessCounters()

    apd = apdcim.load_tile(source_points, counters)
    counters.add(Stage.LOAD, total_cycles=apd.load_cycles())
    interpolated = np.zeros((len(target_points), source_features.dim), dtype=np.int64)
    cycles = 0
    for t, point in enumerate(target_points.points):
        apd.set_reference_point(point)
        batch = apd.compute_all()
        cycles += 1 + batch.cycles_used
        nearest = nearest_first(batch.distances)[:cfg.k]
        weights = interpolate_weights(batch.distances[nearest])
        mixed = weights @ source_features.values[nearest].astype(np.float64)
        interpolated[t] = saturate(np.floor(mixed + 0.5))
    counters.add(Stage.PREPROCESS, total_cycles=cycles)

    features = interpolated if target_features is None else np.hstack([interpolated, target_features.values])
    mlp = Mlp(features.shape[1], cfg.mlp_dims, cfg.weight_seed)
    return mlp(FeatureTensor(features), counters)



@dataclass(eq=False)
class TileResult:
    tile: Tile
    levels: list[PsaLevel]
    features: FeatureTensor      # output of the last layer at its level
    counters: AccessCounters
    fps_counters: AccessCounters   # the first level's sampling on its own, for baseline comparison



def _simulate_tile(tile: Tile, network: NetworkConfig) -> TileResult:
    counters = AccessCounters()
    fps_counters = AccessCounters()
    features = initial_features(tile)
    level_tiles, level_features = [tile], [features]
    levels: list[PsaLevel] = []

    for layer in network:
        if isinstance(layer, PsaLayerConfig):
            first = not levels
            level = _psa_on_tile(level_tiles[-1], level_features[-1], layer, fps_counters if first else counters,
                                 cam_preloaded=first)
            levels.append(level)
            level_tiles.append(sub_tile(level.tile, level.centroids))
            level_features.append(level.features)
        else:
            source_tile, source_features = level_tiles.pop(), level_features.pop()
            target_tile, target_features = level_tiles[-1], level_features[-1]
            layer = replace(layer, k=min(layer.k, len(source_tile)))
            level_features[-1] = run_pfp_layer(source_tile, source_features, target_tile, layer, target_features, counters)

    return TileResult(tile, levels, level_features[-1], counters.merge(fps_counters), fps_counters)



@dataclass(eq=False)
class SimResult:
    tiles: list[TileResult]
    report: Report
    network: NetworkConfig = DEFAULT_NETWORK

    @property
    def centroids(self) -> list[list[list[int]]]:
        """Global indices of every tile's centroids, per level."""
        return [[level.tile.global_indices[level.centroids].tolist() for level in t.levels] for t in self.tiles]

    @property
    def neighbors(self) -> list[list[list[list[int]]]]:
        return [[[level.tile.global_indices[group].tolist() for group in level.neighbors] for level in t.levels]
                for t in self.tiles]

    @property
    def features(self) -> list[FeatureTensor]:
        return [t.features for t in self.tiles]

    def to_json(self, include_features: bool = False) -> dict:
        tiles = []
        for t, centroids, neighbors in zip(self.tiles, self.centroids, self.neighbors):
            entry = {
                "size": len(t.tile),
                "levels": [{"centroids": c, "neighbors": nb, "computed_points": level.computed_points}
                           for c, nb, level in zip(centroids, neighbors, t.levels)],
            }
            if include_features:
                entry["features"] = t.features.values.tolist()
            tiles.append(entry)
        return {"network": network_to_json(self.network), "tiles": tiles, "report": self.report.to_json()}



def _tile_map(func, tiles: list, threads: int) -> list:
    if threads <= 1:
        return [func(tile) for tile in tiles]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, tiles))


def _charge_exposed_cam_init(results: list[TileResult]):
    """
    Array-level ping-pong: the CAM of tile i+1 is initialised while tile i searches; whatever does not
    fit in that search window is charged to tile i. Tile 0's initialisation is fully exposed.
    """
    search = [t.levels[0].fps_cycles for t in results]
    load = [maxcam.CamArray.load_cycles(len(t.tile)) for t in results]
    exposed = maxcam.schedule_tiles(search, load)["exposed_load"]
    for i, cycles in enumerate(exposed):
        results[max(i - 1, 0)].counters.add(Stage.LOAD, total_cycles=cycles)



def run_psa_layer(tiles: list[Tile], cfg: PsaLayerConfig, features: list[FeatureTensor] | None = None,
                  params: EnergyParams = EnergyParams(), threads: int = 1) -> SimResult:
    """
    One PSA layer on every tile, each with freshly loaded arrays.
    """
    features = features if features is not None else [initial_features(tile) for tile in tiles]
    if len(features) != len(tiles):
        raise DimensionError(len(tiles), len(features))

    def run(job):
        tile, tile_features = job
        counters = AccessCounters()
        level = _psa_on_tile(tile, tile_features, cfg, counters)
        return TileResult(tile, [level], level.features, counters, AccessCounters())

    results = _tile_map(run, list(zip(tiles, features)), threads)
    report = merge_reports([Report(t.counters, params) for t in results])
    return SimResult(results, report, (cfg,))



def run_network(cloud: PointCloud, network: typing.Sequence[LayerConfig] = DEFAULT_NETWORK, capacity: int = apdcim.CAPACITY,
                params: EnergyParams = EnergyParams(), threads: int = 1, config: dict | None = None) -> SimResult:
    """
    The full flow: MSP partitioning, then every tile through the PSA and PFP stacks.

    The host reads the cloud from DRAM once to partition it. Tiles run on `threads` workers and are
    merged in tile order, so the result does not depend on the thread count.
    """
    network = validate_network(network)
    if not 1 <= capacity <= apdcim.CAPACITY:
        raise ConfigError("capacity", f"must be in [1, {apdcim.CAPACITY}], got {capacity}")

    host = AccessCounters()
    host.add(Stage.PREPROCESS, dram_bits_read=len(cloud) * POINT_BITS)
    tiles = msp_partition(cloud, capacity)

    results = _tile_map(lambda tile: _simulate_tile(tile, network), tiles, threads)
    _charge_exposed_cam_init(results)

    report = merge_reports([Report(host, params, dict(config or {})), *(Report(t.counters, params) for t in results)])
    logger.info(f"Simulated {len(tiles)} tiles: {report.total_cycles} cycles, {report.energy.total:.1f} pJ")
    return SimResult(results, report, network)



def compare_baselines(cloud: PointCloud, network: typing.Sequence[LayerConfig] = DEFAULT_NETWORK,
                      capacity: int = apdcim.CAPACITY, params: EnergyParams = EnergyParams(),
                      baseline: BaselineParams = BaselineParams(), result: SimResult | None = None) -> dict:
    """
    The simulated flow against the two digital sampling baselines, under the same energy parameters.

    The sampling comparison covers the first PSA level: the global baseline samples the same number of
    centroids from the whole cloud in DRAM, the local baseline samples every tile from on-chip SRAM.
    The feature comparison runs the same MAC calls on a bit-serial macro, whose MACs cost
    `bit_serial_mac_energy_ratio` times the SC-CIM ones.
    """
    result = result if result is not None else run_network(cloud, network, capacity, params)
    n = len(cloud)
    per_tile = [(len(t.tile), len(t.levels[0].centroids)) for t in result.tiles]
    m = sum(samples for _, samples in per_tile)

    traffic = baseline_global_fps_traffic(n, m)
    global_energy = traffic["dram_bits_baseline"] * params.dram_pj_per_bit
    global_cycles = baseline_global_fps_cycles(n, m, baseline)

    local_bits, local_cycles = 0, 0
    for size, samples in per_tile:
        breakdown = baseline_local_fps_breakdown(size, samples)
        local_bits += breakdown["point_access_bits"] + breakdown["td_update_bits"]
        local_cycles += baseline_local_fps_cycles(size, samples, baseline)
    local_energy = local_bits * params.sram_pj_per_bit

    fps_counters = AccessCounters()
    for t in result.tiles:
        fps_counters = fps_counters.merge(t.fps_counters)
    cim_energy = energy(fps_counters, params).on_chip(Stage.PREPROCESS)
    cim_cycles = sum(t.levels[0].fps_cycles for t in result.tiles)
    cim_dram = result.report.counters.stage(Stage.PREPROCESS).dram_bits_read

    feature = result.report.counters.stage(Stage.FEATURE)
    sccim_cycles = feature.mac_tile_calls * sccim.CLUSTER_CYCLES
    bit_serial_cycles = feature.mac_tile_calls * sccim.BIT_SERIAL_CYCLES

    saved_preprocess = local_cycles - cim_cycles
    saved_feature = bit_serial_cycles - sccim_cycles
    saved = saved_preprocess + saved_feature

    # the whole on-chip flow: local FPS plus a bit-serial feature stage against CIM FPS plus SC-CIM
    sccim_energy = result.report.energy.stages[Stage.FEATURE.value]["mac"]
    bit_serial_energy = sccim_energy * baseline.bit_serial_mac_energy_ratio
    saved_preprocess_energy = local_energy - cim_energy
    saved_feature_energy = bit_serial_energy - sccim_energy
    saved_energy = saved_preprocess_energy + saved_feature_energy
    flow_energy = cim_energy + sccim_energy

    return {
        "points": n,
        "samples": m,
        "tiles": len(result.tiles),
        "global_fps": {"dram_bits": traffic["dram_bits_baseline"], "energy_pj": global_energy, "cycles": global_cycles},
        "local_fps": {"sram_bits": local_bits, "energy_pj": local_energy, "cycles": local_cycles},
        "cim_fps": {"dram_bits": cim_dram, "energy_pj": cim_energy, "cycles": cim_cycles},
        "dram_reduction": 1 - cim_dram / traffic["dram_bits_baseline"] if traffic["dram_bits_baseline"] else 0.0,
        "energy_gain_vs_local": local_energy / cim_energy if cim_energy else math.inf,
        "speedup_vs_global": global_cycles / cim_cycles if cim_cycles else math.inf,
        "speedup_vs_local": local_cycles / cim_cycles if cim_cycles else math.inf,
        "feature": {
            "mac_tile_calls": feature.mac_tile_calls,
            "sccim_cycles": sccim_cycles,
            "bit_serial_cycles": bit_serial_cycles,
            "cycle_ratio": sccim_cycles / bit_serial_cycles if bit_serial_cycles else 0.0,
            "energy_pj": result.report.energy.stage_total(Stage.FEATURE),
            "sccim_mac_energy_pj": sccim_energy,
            "bit_serial_mac_energy_pj": bit_serial_energy,
        },
        "energy_gain": (local_energy + bit_serial_energy) / flow_energy if flow_energy else math.inf,
        "energy_savings_split": {
            "preprocess": saved_preprocess_energy / saved_energy if saved_energy else 0.0,
            "feature": saved_feature_energy / saved_energy if saved_energy else 0.0,
        },
        "cycle_savings_split": {
            "preprocess": saved_preprocess / saved if saved else 0.0,
            "feature": saved_feature / saved if saved else 0.0,
        },
    }
