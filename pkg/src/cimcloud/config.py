"""
Run configuration.

Defaults, overridden by a JSON config file, overridden by command-line flags.
"""
from dataclasses import asdict, dataclass, field, fields, replace
import json, os

from .apdcim import CAPACITY
from .costmodel import EnergyParams
from .errors import ConfigError
from .geometry import QueryConfig
from .pointcloud import QUANT_BITS, CloudFormat, CloudKind


@dataclass(frozen=True)
class RunConfig:
    """
    Everything one CLI run needs. Validated before any simulation starts.
    """

    # =========================================================================
    # Input
    # =========================================================================

    input: str | None = None
    """Point cloud file; when unset the cloud is generated."""

    input_format: str = CloudFormat.XYZ_ASCII.value
    """`xyz_ascii` or `f32le_binary`."""

    generator_kind: str = CloudKind.UNIFORM.value
    generator_n: int = 16384
    seed: int = 0
    """Seeds the cloud generator."""

    # =========================================================================
    # Accelerator
    # =========================================================================

    capacity: int = CAPACITY
    """Points per tile."""

    quant_bits: int = QUANT_BITS
    query: QueryConfig = field(default_factory=QueryConfig)
    network: str | None = None
    """Network config JSON; the default network when unset."""

    energy: dict = field(default_factory=dict)
    """Overrides of `EnergyParams` fields."""

    # =========================================================================
    # Run
    # =========================================================================

    out: str | None = None
    threads: int = 1
    trace_dir: str | None = None

    def validate(self) -> "RunConfig":
        if self.input is None and self.generator_n < 1:
            raise ConfigError("generator_n", f"must be at least 1, got {self.generator_n}")
        try:
            CloudFormat(self.input_format)
        except ValueError:
            raise ConfigError("input_format", f"unknown format {self.input_format!r}") from None
        try:
            CloudKind(self.generator_kind)
        except ValueError:
            raise ConfigError("generator_kind", f"unknown kind {self.generator_kind!r}") from None
        if not 1 <= self.capacity <= CAPACITY:
            raise ConfigError("capacity", f"must be in [1, {CAPACITY}], got {self.capacity}")
        if self.quant_bits != QUANT_BITS:
            raise ConfigError("quant_bits", f"only {QUANT_BITS}-bit quantization is modeled, got {self.quant_bits}")
        if self.seed < 0:
            raise ConfigError("seed", f"must be non-negative, got {self.seed}")
        if self.threads < 1:
            raise ConfigError("threads", f"must be at least 1, got {self.threads}")
        self.energy_params()
        return self

    def energy_params(self) -> EnergyParams:
        return EnergyParams.from_overrides(self.energy)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return cls().merged(data)

    def merged(self, overrides: dict | None) -> "RunConfig":
        """
        A copy with every non-None entry of `overrides` applied; `query` and `energy` merge key by key.
        """
        overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration field")

        for name in ("energy", "query"):
            if name in overrides and not isinstance(overrides[name], (dict, QueryConfig)):
                raise ConfigError(name, f"must be a JSON object, got {overrides[name]!r}")
        if "energy" in overrides:
            overrides["energy"] = {**self.energy, **dict(overrides["energy"])}
        if "query" in overrides and not isinstance(overrides["query"], QueryConfig):
            query = {k: v for k, v in dict(overrides["query"]).items() if v is not None}
            try:
                overrides["query"] = replace(self.query, **query)
            except TypeError as e:
                raise ConfigError("query", str(e)) from e
        return replace(self, **overrides)

    @classmethod
    def from_sources(cls, file_dict: dict | None = None, flag_dict: dict | None = None) -> "RunConfig":
        return cls().merged(file_dict).merged(flag_dict).validate()



def load_config_file(path: str | os.PathLike) -> dict:
    with open(path, "r", encoding="utf-8") as file:
        try:
            data = json.load(file)
        except json.JSONDecodeError as e:
            raise ConfigError("config", f"{path} is not valid JSON ({e.msg} at line {e.lineno})") from e
    if not isinstance(data, dict):
        raise ConfigError("config", f"{path} must hold a JSON object")
    return data
