"""
Point-cloud representation, file ingestion, synthetic generation and per-tile 16-bit quantization.
"""
from dataclasses import dataclass
from enum import Enum
import logging, os

import numpy as np

from .errors import CapacityError, CloudFormatError, EmptyCloudError, SimulationError


logger = logging.getLogger(__name__)

QUANT_BITS = 16
QUANT_MAX = (1 << QUANT_BITS) - 1
POINT_BITS = 3 * QUANT_BITS
RECORD_BYTES = 12   # three little-endian float32


class CloudFormat(str, Enum):
    XYZ_ASCII = "xyz_ascii"
    F32LE_BINARY = "f32le_binary"


class CloudKind(str, Enum):
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"
    CLUSTERED = "clustered"



@dataclass(frozen=True, eq=False)
class PointCloud:
    """
    An ordered set of raw points; row i of `points` is the point with global index i.
    """
    points: np.ndarray   # (n, 3) float64
    source: str = ""

    def __len__(self):
        return len(self.points)



@dataclass(frozen=True, eq=False)
class Tile:
    """
    A capacity-bounded set of points quantized into the tile's own 16-bit frame.<br>
    Row i of `points` is tile-local index i; `global_indices[i]` is its index in the cloud.
    """
    points: np.ndarray           # (k, 3) uint16
    global_indices: np.ndarray   # (k,) int64
    quant_origin: np.ndarray     # (3,) float64, raw coordinates of quantized 0
    quant_scale: np.ndarray      # (3,) float64, raw units per quantization step; 0 on a degenerate axis
    capacity: int

    def __len__(self):
        return len(self.points)



def _finite_or_raise(points: np.ndarray, path, row_label):
    bad = ~np.isfinite(points).all(axis=1)
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise CloudFormatError(path, row_label(row), "non-finite coordinate")


def _load_ascii(path) -> np.ndarray:
    rows, line_numbers = [], []
    with open(path, "rb") as f:
        data = f.read()
    for line_no, raw in enumerate(data.splitlines(), start=1):
        try:
            line = raw.decode("ascii")
        except UnicodeDecodeError as e:
            raise CloudFormatError(path, f"line {line_no}", f"not ASCII text (byte 0x{raw[e.start]:02x})") from None
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split()
        if len(fields) != 3:
            raise CloudFormatError(path, f"line {line_no}", f"expected 3 values, found {len(fields)}")
        try:
            rows.append([float(v) for v in fields])
        except ValueError:
            raise CloudFormatError(path, f"line {line_no}", f"not a decimal real: {stripped!r}") from None
        line_numbers.append(line_no)

    points = np.array(rows, dtype=np.float64).reshape(-1, 3)
    _finite_or_raise(points, path, lambda row: f"line {line_numbers[row]}")
    return points


def _load_binary(path) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    if len(data) % RECORD_BYTES:
        tail = len(data) - len(data) % RECORD_BYTES
        raise CloudFormatError(path, f"byte {tail}", f"truncated record ({len(data) % RECORD_BYTES} trailing bytes)")

    points = np.frombuffer(data, dtype="<f4").reshape(-1, 3).astype(np.float64)
    _finite_or_raise(points, path, lambda row: f"byte {row * RECORD_BYTES}")
    return points



def load_cloud(path: str | os.PathLike, format: CloudFormat | str = CloudFormat.XYZ_ASCII) -> PointCloud:
    """
    Reads a point cloud; global index i is the i-th point line (ascii) or 12-byte record (binary).

    Args:
        `path`: The file to read.
        `format`: `xyz_ascii` (three reals per line, `#` comments, LF or CRLF) or `f32le_binary`.
    """
    format = CloudFormat(format)
    if format is CloudFormat.XYZ_ASCII:
        points = _load_ascii(path)
    else:
        points = _load_binary(path)

    if len(points) == 0:
        raise EmptyCloudError(str(path))
    logger.debug(f"Loaded {len(points)} points from {path} ({format.value})")
    return PointCloud(points, source=str(path))



def write_cloud(cloud: PointCloud, path: str | os.PathLike, format: CloudFormat | str = CloudFormat.XYZ_ASCII):
    """
    Writes a cloud so that `load_cloud` returns the same points in the same order.
    """
    format = CloudFormat(format)
    if format is CloudFormat.XYZ_ASCII:
        with open(path, "w", encoding="ascii", newline="\n") as f:
            f.write(f"# {cloud.source}\n")
            for x, y, z in cloud.points.tolist():
                f.write(f"{x!r} {y!r} {z!r}\n")
    else:
        with open(path, "wb") as f:
            f.write(np.ascontiguousarray(cloud.points, dtype="<f4").tobytes())



def generate_cloud(kind: CloudKind | str, n: int, seed: int) -> PointCloud:
    """
    Generates a synthetic cloud; the result is a pure function of `(kind, n, seed)`.

    - uniform: unit cube
    - gaussian: sigma 0.2 around the cube center
    - clustered: 8 gaussian blobs (sigma 0.05) around uniform centers
    """
    kind = CloudKind(kind)
    if n < 1:
        raise EmptyCloudError(f"generator {kind.value} with n={n}")

    rng = np.random.default_rng(seed)
    if kind is CloudKind.UNIFORM:
        points = rng.random((n, 3))
    elif kind is CloudKind.GAUSSIAN:
        points = rng.normal(0.5, 0.2, size=(n, 3))
    else:
        centers = rng.random((8, 3))
        labels = rng.integers(0, len(centers), size=n)
        points = centers[labels] + rng.normal(0.0, 0.05, size=(n, 3))
    return PointCloud(points, source=f"{kind.value}:n={n}:seed={seed}")



def quantize_tile(points: np.ndarray, global_indices, capacity: int) -> Tile:
    """
    Maps raw points onto the 16-bit grid of their own bounding box.

    Each axis is mapped affinely so the box's low face lands on 0 and the high face on 65535,
    rounding half up. An axis with zero extent maps to 0 and records a scale of 0.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    global_indices = np.asarray(global_indices, dtype=np.int64)
    if len(points) > capacity:
        raise CapacityError(len(points), capacity)
    if len(points) == 0:
        raise EmptyCloudError("tile")
    if len(global_indices) != len(points) or len(np.unique(global_indices)) != len(global_indices):
        raise SimulationError("global indices must be distinct and match the points one to one")

    origin = points.min(axis=0)
    extent = points.max(axis=0) - origin
    degenerate = extent == 0

    with np.errstate(divide="ignore", invalid="ignore"):
        normalized = np.where(degenerate, 0.0, (points - origin) / np.where(degenerate, 1.0, extent))
    quantized = np.floor(normalized * QUANT_MAX + 0.5)
    quantized = np.clip(quantized, 0, QUANT_MAX).astype(np.uint16)

    scale = np.where(degenerate, 0.0, extent / QUANT_MAX)
    return Tile(quantized, global_indices, origin, scale, capacity)



def dequantize(tile: Tile) -> np.ndarray:
    """
    Maps a tile's quantized points back to raw coordinates (within half a step of the originals).
    """
    return tile.quant_origin + tile.points.astype(np.float64) * tile.quant_scale



def sub_tile(tile: Tile, local_indices) -> Tile:
    """
    A tile over a subset of `tile`'s points, kept in the parent's quantization frame.
    """
    local_indices = np.asarray(local_indices, dtype=np.int64)
    return Tile(tile.points[local_indices], tile.global_indices[local_indices],
                tile.quant_origin, tile.quant_scale, tile.capacity)
