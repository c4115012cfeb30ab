"""
Command-line harness: `gen`, `partition`, `sample`, `simulate`, `verify-mac` and `report`.

Exit codes: 0 success, 1 usage or invalid configuration, 2 unreadable input, 3 verification failure.
"""
from contextlib import ExitStack
import argparse, json, logging, os, sys

import numpy as np

from . import sccim
from .apdcim import ApdCimArray
from .config import RunConfig, load_config_file
from .context import apply_fault, capture_trace
from .costmodel import AccessCounters, Report, Stage, counters_to_csv, report_from_json
from .errors import CloudFormatError, ConfigError, EmptyCloudError, SimulationError
from .faults import DroppedCarryFault
from .geometry import Metric, ball_query, coverage_radius, exact_fps, neighbor_recall
from .log import setup_logging
from .maxcam import CamArray
from .partition import build_partition_tree, grid_partition, msp_partition, tree_to_json, utilization
from .pipeline import (
    DEFAULT_NETWORK, PsaLayerConfig, accel_fps, compare_baselines, fused_grouping, load_network_config, run_network, with_query,
)
from .pointcloud import POINT_BITS, generate_cloud, load_cloud, write_cloud
from .verify import DEFAULT_RANDOM_MACS, run_suite


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_VERIFY = 3


class _IOFailure(Exception):
    pass



class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")



def _common_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; flags override it")
    common.add_argument("--seed", type=int, help="generator seed")
    common.add_argument("--out", help="output path (stdout when omitted, except for gen)")
    common.add_argument("--threads", type=int, help="tiles simulated in parallel")
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("-q", "--quiet", action="count", default=0)
    return common


def _cloud_parser() -> argparse.ArgumentParser:
    cloud = _Parser(add_help=False)
    cloud.add_argument("--input", help="point cloud file (generated when omitted)")
    cloud.add_argument("--format", choices=["xyz_ascii", "f32le_binary"], help="input file format")
    cloud.add_argument("--kind", choices=["uniform", "gaussian", "clustered"], help="generator distribution")
    cloud.add_argument("--n", type=int, help="generated points")
    cloud.add_argument("--capacity", type=int, help="points per tile")
    return cloud


def _query_parser() -> argparse.ArgumentParser:
    query = _Parser(add_help=False)
    query.add_argument("--radius", type=int, help="ball radius R in quantized units")
    query.add_argument("--scale", type=float, help="lattice range factor")
    query.add_argument("--k", type=int, help="neighbors kept per centroid")
    query.add_argument("--trace-dir", help="write row/bit/partial traces as CSV into this directory")
    return query



def build_parser() -> argparse.ArgumentParser:
    common, cloud, query = _common_parser(), _cloud_parser(), _query_parser()
    parser = _Parser(prog="cimcloud", description="Point cloud CIM accelerator simulator.")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", parents=[common], help="write a synthetic point cloud")
    gen.add_argument("--kind", choices=["uniform", "gaussian", "clustered"])
    gen.add_argument("--n", type=int)
    gen.add_argument("--format", choices=["xyz_ascii", "f32le_binary"])
    gen.set_defaults(handler=cmd_gen)

    partition = commands.add_parser("partition", parents=[common, cloud], help="MSP partition tree and utilization")
    partition.set_defaults(handler=cmd_partition)

    sample = commands.add_parser("sample", parents=[common, cloud, query], help="FPS and lattice grouping only")
    sample.add_argument("--m", type=int, help="centroids per tile")
    sample.add_argument("--compare-exact", action="store_true", help="also run the L2 FPS and ball query oracles")
    sample.set_defaults(handler=cmd_sample)

    simulate = commands.add_parser("simulate", parents=[common, cloud, query], help="full network simulation")
    simulate.add_argument("--network", help="network JSON (default network when omitted)")
    simulate.add_argument("--baselines", action="store_true", help="add the digital baseline comparison")
    simulate.add_argument("--include-features", action="store_true", help="dump the output features")
    simulate.set_defaults(handler=cmd_simulate)

    verify = commands.add_parser("verify-mac", parents=[common], help="SC-CIM exactness suite")
    verify.add_argument("--rand-n", type=int, default=DEFAULT_RANDOM_MACS, help="random MAC vectors")
    verify.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    verify.set_defaults(handler=cmd_verify_mac)

    report = commands.add_parser("report", parents=[common], help="summarize a report JSON")
    report.add_argument("report", help="report or simulate output JSON")
    report.add_argument("--csv", help="write the counters as CSV")
    report.set_defaults(handler=cmd_report)
    return parser



def _flags(args: argparse.Namespace) -> dict:
    get = lambda name: getattr(args, name, None)
    return {
        "input": get("input"),
        "input_format": get("format"),
        "generator_kind": get("kind"),
        "generator_n": get("n"),
        "seed": get("seed"),
        "capacity": get("capacity"),
        "network": get("network"),
        "out": get("out"),
        "threads": get("threads"),
        "trace_dir": get("trace_dir"),
        "query": {"radius_R": get("radius"), "scale_factor": get("scale"), "max_neighbors_K": get("k")},
    }


def _sources(args: argparse.Namespace) -> tuple[dict, dict]:
    file_dict = {}
    if args.config:
        try:
            file_dict = load_config_file(args.config)
        except OSError as e:
            raise _IOFailure(f"cannot read config {args.config}: {e.strerror}") from e
    return file_dict, _flags(args)


def run_config(args: argparse.Namespace) -> RunConfig:
    return RunConfig.from_sources(*_sources(args))


def _explicit_query(cfg: RunConfig, file_dict: dict, flags: dict) -> dict:
    # query fields named in the config file or on the command line, with their validated values
    named = {k for source in (dict(file_dict.get("query") or {}), flags["query"]) for k, v in source.items() if v is not None}
    return {name: getattr(cfg.query, name) for name in sorted(named)}


def _cloud(cfg: RunConfig):
    if cfg.input is None:
        return generate_cloud(cfg.generator_kind, cfg.generator_n, cfg.seed)
    try:
        return load_cloud(cfg.input, cfg.input_format)
    except OSError as e:
        raise _IOFailure(f"cannot read {cfg.input}: {e.strerror}") from e


def _summary_stream(cfg: RunConfig):
    # stdout carries the JSON when no --out is given
    return sys.stdout if cfg.out is not None else sys.stderr


def _emit(data: dict, out: str | None):
    text = json.dumps(data, indent=2, sort_keys=True)
    if out is None:
        print(text)
        return
    with open(out, "w", encoding="utf-8") as file:
        file.write(text + "\n")
    logger.info(f"Wrote {out}")


def _traces(stack: ExitStack, trace_dir: str | None):
    if trace_dir is None:
        return
    os.makedirs(trace_dir, exist_ok=True)
    stack.enter_context(capture_trace(ApdCimArray, "compute_all", "row", os.path.join(trace_dir, "rows.csv"),
                                      ["cycle", "row", *(f"d{i}" for i in range(16))]))
    stack.enter_context(capture_trace(CamArray, "bit_cam_max", "bit", os.path.join(trace_dir, "bits.csv"),
                                      ["bit", "surviving"]))
    stack.enter_context(capture_trace(sccim, "mac_16rows", "partial", os.path.join(trace_dir, "partials.csv"),
                                      ["cycle", "nibble", "dense", "sparse"]))



def cmd_gen(args: argparse.Namespace) -> int:
    cfg = run_config(args)
    if cfg.out is None:
        raise ConfigError("out", "gen needs --out")
    cloud = generate_cloud(cfg.generator_kind, cfg.generator_n, cfg.seed)
    write_cloud(cloud, cfg.out, cfg.input_format)
    print(f"{len(cloud)} points written to {cfg.out}")
    return EXIT_OK



def cmd_partition(args: argparse.Namespace) -> int:
    cfg = run_config(args)
    cloud = _cloud(cfg)
    tree = build_partition_tree(cloud, cfg.capacity)
    msp = msp_partition(cloud, cfg.capacity)
    grid = grid_partition(cloud, cfg.capacity)
    _emit({"capacity": cfg.capacity, "tree": tree_to_json(tree)}, cfg.out)
    print(f"MSP: {len(msp)} tiles, utilization {utilization(msp, cfg.capacity):.4f}", file=_summary_stream(cfg))
    print(f"Grid: {len(grid)} tiles, utilization {utilization(grid, cfg.capacity):.4f}", file=_summary_stream(cfg))
    return EXIT_OK



def cmd_sample(args: argparse.Namespace) -> int:
    cfg = run_config(args)
    m = args.m if args.m is not None else PsaLayerConfig().samples_per_tile
    if m < 1:
        raise ConfigError("m", f"must be at least 1, got {m}")
    cloud = _cloud(cfg)
    params = cfg.energy_params()

    counters = AccessCounters()
    counters.add(Stage.PREPROCESS, dram_bits_read=len(cloud) * POINT_BITS)
    tiles = msp_partition(cloud, cfg.capacity)
    entries, coverage, approx_groups, exact_groups = [], [], [], []
    with ExitStack() as stack:
        _traces(stack, cfg.trace_dir)
        for tile in tiles:
            samples = m if args.m is not None else min(m, len(tile))
            fps = accel_fps(tile, samples, 0, counters)
            groups = [fused_grouping(tile, c, batch, cfg.query) for c, batch in zip(fps.centroids, fps.batches)]
            entries.append({
                "centroids": tile.global_indices[fps.centroids].tolist(),
                "neighbors": [tile.global_indices[g].tolist() for g in groups],
            })
            if args.compare_exact:
                oracle = exact_fps(tile, samples, 0, Metric.L2)
                exact_radius = coverage_radius(tile, oracle)
                coverage.append(coverage_radius(tile, fps.centroids) / exact_radius if exact_radius else 1.0)
                approx_groups += groups
                exact_groups += [ball_query(tile, c, cfg.query.radius_R, cfg.query.max_neighbors_K) for c in fps.centroids]

    output = {"tiles": entries, "report": Report(counters, params, cfg.to_json()).to_json()}
    if args.compare_exact:
        output["quality"] = {
            "coverage_radius_ratio": float(np.mean(coverage)),
            "lattice_recall": neighbor_recall(approx_groups, exact_groups),
        }
        print(f"coverage radius ratio (L1 FPS / L2 FPS): {output['quality']['coverage_radius_ratio']:.4f}", file=_summary_stream(cfg))
        print(f"lattice recall vs ball query: {output['quality']['lattice_recall']:.4f}", file=_summary_stream(cfg))
    _emit(output, cfg.out)
    return EXIT_OK



def cmd_simulate(args: argparse.Namespace) -> int:
    file_dict, flags = _sources(args)
    cfg = RunConfig.from_sources(file_dict, flags)
    if cfg.network is not None:
        try:
            network = load_network_config(cfg.network)
        except OSError as e:
            raise _IOFailure(f"cannot read network {cfg.network}: {e.strerror}") from e
    else:
        network = DEFAULT_NETWORK
    query = _explicit_query(cfg, file_dict, flags)
    if query:
        network = with_query(network, **query)
        logger.info(f"Query overrides on every PSA layer: {query}")
    cloud = _cloud(cfg)
    params = cfg.energy_params()

    threads = cfg.threads
    if cfg.trace_dir is not None and threads > 1:
        logger.warning("Tracing runs tiles sequentially; ignoring --threads")
        threads = 1
    with ExitStack() as stack:
        _traces(stack, cfg.trace_dir)
        result = run_network(cloud, network, cfg.capacity, params, threads, cfg.to_json())

    output = result.to_json(include_features=args.include_features)
    if args.baselines:
        output["baselines"] = compare_baselines(cloud, network, cfg.capacity, params, result=result)
    _emit(output, cfg.out)
    report = result.report
    print(f"{len(result.tiles)} tiles, {report.total_cycles} cycles, {report.energy.total:.1f} pJ", file=_summary_stream(cfg))
    return EXIT_OK



def cmd_verify_mac(args: argparse.Namespace) -> int:
    cfg = run_config(args)
    if args.rand_n < 0:
        raise ConfigError("rand_n", f"must be non-negative, got {args.rand_n}")
    with ExitStack() as stack:
        if args.inject_fault:
            stack.enter_context(apply_fault(DroppedCarryFault()))
        report = run_suite(args.rand_n, cfg.seed)
    print(report.summary())
    return EXIT_OK if report.ok else EXIT_VERIFY



def cmd_report(args: argparse.Namespace) -> int:
    try:
        with open(args.report, "r", encoding="utf-8") as file:
            data = json.load(file)
    except OSError as e:
        raise _IOFailure(f"cannot read {args.report}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise _IOFailure(f"{args.report} is not valid JSON ({e.msg} at line {e.lineno})") from e
    try:
        report = report_from_json(data.get("report", data))
    except (AttributeError, KeyError, TypeError, ValueError) as e:
        raise _IOFailure(f"{args.report} is not a report (missing or malformed {e})") from e

    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as file:
            counters_to_csv(report.counters, file)
        logger.info(f"Wrote {args.csv}")

    breakdown = report.energy
    print(f"total: {breakdown.total:.1f} pJ ({breakdown.on_chip():.1f} pJ on chip), "
          f"{report.total_cycles} cycles, {report.latency_s * 1e6:.3f} us")
    for stage in Stage:
        print(f"  {stage.value:<10} {breakdown.stage_total(stage):>16.1f} pJ {report.counters.stage(stage).total_cycles:>12} cycles")
    return EXIT_OK



def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose - args.quiet)
    try:
        return args.handler(args)
    except (_IOFailure, CloudFormatError, EmptyCloudError) as e:
        print(f"cimcloud: {e}", file=sys.stderr)
        return EXIT_IO
    except SimulationError as e:
        print(f"cimcloud: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"cimcloud: {e}", file=sys.stderr)
        return EXIT_IO
