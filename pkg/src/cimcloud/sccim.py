"""
Bit-exact model of the split-concatenate CIM (SC-CIM) MAC and of the bit-serial macro it replaces.

A 16-bit input is split bit-wise into four interleaved 4-bit clusters (cluster j holds bits j, j+4, j+8, j+12),
a 16-bit weight block-wise into four 4-bit nibbles. One cluster times one nibble is then a selection per lane
followed by concatenation, with no multiplier. Two rows share a fused adder that pre-sums their nibbles, so the
dense adder tree sees one term per row pair.

Every function here accepts Python ints or int64 numpy arrays of the same shape: selection uses bit masks
(`x & -flag`) instead of branches, so the verification sweeps run vectorized through the same code.
"""
from dataclasses import dataclass
import logging, math, sys

import numpy as np

from . import hooks
from .errors import DimensionError, SimulationError


logger = logging.getLogger(__name__)

ROWS = 16
ROW_PAIRS = ROWS // 2
LANES = 4
NIBBLE_BITS = 4
INPUT_BITS = 16
CLUSTER_CYCLES = 4
BIT_SERIAL_CYCLES = INPUT_BITS
COLUMN_PARALLELISM = 16
WEIGHT_BLOCKS = 8
INT16_MIN = -(1 << 15)
INT16_MAX = (1 << 15) - 1


def _bit(x, k):
    return (x >> k) & 1


def _pattern(x):
    """The unsigned 16-bit two's-complement pattern of a signed value."""
    return x & 0xFFFF


def _to_signed16(u):
    return u - (_bit(u, 15) << 16)



@dataclass(frozen=True)
class WeightNibbles:
    """Four consecutive 4-bit blocks, n0 least significant; n3 is stored as its unsigned pattern."""
    n0: int
    n1: int
    n2: int
    n3: int

    @property
    def n3_signed(self):
        return self.n3 - (_bit(self.n3, 3) << 4)

    def __iter__(self):
        return iter((self.n0, self.n1, self.n2, self.n3))


@dataclass(frozen=True)
class InputClusters:
    """Four interleaved 4-bit clusters; lane p of cluster j is input bit j+4p."""
    c0: int
    c1: int
    c2: int
    c3: int

    def __iter__(self):
        return iter((self.c0, self.c1, self.c2, self.c3))


@dataclass(frozen=True)
class FuaOutput:
    """
    Output of one fused adder: the densely concatenated lane selections and the four sparse CRA carries.
    Carry p has significance 2^(4p+4).
    """
    dense: int
    carries: tuple

    @property
    def total(self):
        return self.dense + sum(carry << (NIBBLE_BITS * p + NIBBLE_BITS) for p, carry in enumerate(self.carries))



def split_weight(w) -> WeightNibbles:
    u = _pattern(w)
    return WeightNibbles(*((u >> (NIBBLE_BITS * m)) & 0xF for m in range(LANES)))


def reassemble_weight(nibbles: WeightNibbles):
    return nibbles.n0 + (nibbles.n1 << 4) + (nibbles.n2 << 8) + (nibbles.n3_signed << 12)


def split_input(x) -> InputClusters:
    u = _pattern(x)
    return InputClusters(*(
        sum(_bit(u, j + LANES * p) << p for p in range(LANES)) for j in range(CLUSTER_CYCLES)
    ))


def reassemble_input(clusters: InputClusters):
    u = sum(_bit(c, p) << (j + LANES * p) for j, c in enumerate(clusters) for p in range(LANES))
    return _to_signed16(u)



def cluster_block_multiply(cluster, nibble):
    """
    Unsigned cluster x nibble: every lane selects the nibble or zero and the lanes are concatenated
    at significance 2^(4p).
    """
    return sum((nibble & -_bit(cluster, p)) << (NIBBLE_BITS * p) for p in range(LANES))



def fused_add(in_a, in_b, nib_a, nib_b) -> FuaOutput:
    """
    The fused adder shared by two rows.

    The CRA adds both nibbles ahead of time, independently of the inputs. Per lane, the input bits pick
    one of nibble A, nibble B, the 4-bit CRA sum (with its carry) or zero.

    Args:
        `in_a`, `in_b`: The two rows' clusters of the current cycle.
        `nib_a`, `nib_b`: The two rows' unsigned weight nibbles.
    """
    cra_sum = nib_a + nib_b
    cra_low, cra_carry = cra_sum & 0xF, cra_sum >> NIBBLE_BITS

    dense = 0
    carries = []
    for p in range(LANES):
        a, b = _bit(in_a, p), _bit(in_b, p)
        both = a & b
        only_a, only_b = a ^ both, b ^ both
        selected = (cra_low & -both) | (nib_a & -only_a) | (nib_b & -only_b)
        dense = dense + (selected << (NIBBLE_BITS * p))
        carries.append(cra_carry & both)
    return FuaOutput(dense, tuple(carries))



def row_contributions(x, w) -> tuple:
    """
    The three periphery terms of one row's signed product.

    The array multiplies the unsigned input pattern u by the unsigned weight pattern. The signed top
    nibble and the input sign bit are then corrected in the periphery:
    x*w = u*w_low + (u*n3 - u*2^16*[n3 < 0]) - b15*w*2^16.

    Returns:
        `(unsigned, signed_nibble, correction)`
    """
    u = _pattern(x)
    nibbles = split_weight(w)
    w_low = nibbles.n0 + (nibbles.n1 << 4) + (nibbles.n2 << 8)
    unsigned = u * w_low
    signed_nibble = ((u * nibbles.n3) << 12) - ((u & -_bit(nibbles.n3, 3)) << 16)
    correction = (w & -_bit(u, 15)) << 16
    return unsigned, signed_nibble, correction


def signed_merge(unsigned_contrib, signed_nibble_contrib, signed_input_correction):
    return unsigned_contrib + signed_nibble_contrib - signed_input_correction


def signed_product(x, w):
    return signed_merge(*row_contributions(x, w))



def _operands(inputs, weights) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(inputs, dtype=np.int64)
    w = np.asarray(weights, dtype=np.int64)
    for name, operand in (("inputs", x), ("weights", w)):
        if operand.shape[-1:] != (ROWS,):
            raise DimensionError(ROWS, operand.shape[-1] if operand.ndim else 0)
        if operand.size and (operand.min() < INT16_MIN or operand.max() > INT16_MAX):
            raise SimulationError(f"{name} must be signed 16-bit values")
    return x, w


def _result(total):
    return int(total) if np.ndim(total) == 0 else total



def mac_16rows(inputs, weights) -> tuple:
    """
    Dot product of 16 signed 16-bit inputs with 16 signed 16-bit weights on one SC-CIM tile.

    Every cycle j feeds cluster j of all 16 inputs. The four weight nibbles are processed side by side:
    for each nibble m, the 8 row-pair fused adders feed a dense tree (their concatenated lanes) and a
    sparse tree (their carries). The tree sums are shift-accumulated by 2^(j+4m). The periphery then
    applies the sign corrections of the top weight nibble and of input bit 15.

    Inputs and weights broadcast over leading axes, so `(N, 16)` operands give N sums. The `"partial"` trace
    then reports the tree sums added up over the batch.

    Returns:
        `(sum, 4)`
    """
    x, w = _operands(inputs, weights)
    clusters = [tuple(split_input(x[..., i])) for i in range(ROWS)]
    nibbles = [tuple(split_weight(w[..., i])) for i in range(ROWS)]
    traced = hooks.is_hooked(sys.modules[__name__], "mac_16rows")

    accumulator = 0
    for j in range(CLUSTER_CYCLES):
        for m in range(LANES):
            dense_sum, sparse_sum = 0, 0
            for i in range(ROW_PAIRS):
                fua = fused_add(clusters[2 * i][j], clusters[2 * i + 1][j], nibbles[2 * i][m], nibbles[2 * i + 1][m])
                dense_sum = dense_sum + fua.dense
                sparse_sum = sparse_sum + sum(c << (NIBBLE_BITS * p + NIBBLE_BITS) for p, c in enumerate(fua.carries))
            if traced:
                hooks.call_hook("partial", [j, m, int(np.sum(dense_sum)), int(np.sum(sparse_sum))])
            accumulator = accumulator + ((dense_sum + sparse_sum) << (j + NIBBLE_BITS * m))

    for i in range(ROWS):
        u = _pattern(x[..., i])
        accumulator = accumulator - ((u & -_bit(nibbles[i][3], 3)) << 16)
        accumulator = accumulator - ((w[..., i] & -_bit(u, 15)) << 16)
    return _result(accumulator), CLUSTER_CYCLES



def bs_mac_16rows(inputs, weights) -> tuple:
    """
    The same dot product on a bit-serial macro: one input bit per cycle, bit 15 weighted negatively.

    Returns:
        `(sum, 16)`
    """
    x, w = _operands(inputs, weights)
    u = _pattern(x)
    accumulator = 0
    for t in range(INPUT_BITS):
        partial = (w & -_bit(u, t)).sum(axis=-1)
        accumulator = accumulator + (-(partial << t) if t == INPUT_BITS - 1 else partial << t)
    return _result(accumulator), BIT_SERIAL_CYCLES



class SccimTile:
    """
    One 16-row SC-CIM tile holding a block of signed 16-bit weights.

    Args:
        `weights`: A `(16, columns)` array; the columns run in parallel on separate weight slices.
    """
    def __init__(self, weights):
        self.weights = np.asarray(weights, dtype=np.int64)
        if self.weights.ndim != 2 or self.weights.shape[0] != ROWS:
            raise DimensionError((ROWS, "columns"), self.weights.shape)
        self.calls = 0
        self.cycles = 0

    @property
    def columns(self) -> int:
        return self.weights.shape[1]

    def matmul(self, inputs) -> np.ndarray:
        """
        Every column's dot product with `inputs` (`(16,)` or `(N, 16)`), through `mac_16rows`.
        """
        x = np.asarray(inputs, dtype=np.int64)
        sums, cycles = mac_16rows(x[..., np.newaxis, :], self.weights.T)
        points = 1 if x.ndim == 1 else x.shape[0]
        self.calls += points * math.ceil(self.columns / COLUMN_PARALLELISM)
        self.cycles += points * math.ceil(self.columns / COLUMN_PARALLELISM) * cycles
        return sums



def adder_tree_stats(tile: SccimTile | None = None, blocks: int = WEIGHT_BLOCKS) -> dict:
    """
    Adder tree fan-in of one tile against a naive per-row accumulation.

    Args:
        `tile`: The configured tile; only its row count matters.
        `blocks`: The local weight blocks per slice; they form `blocks // 2` fused-adder pairs.
    """
    rows = tile.weights.shape[0] if tile is not None else ROWS
    dense = rows // 2
    return {
        "dense_inputs": dense,
        "sparse_inputs": dense,
        "naive_inputs": rows,
        "ratio": dense / rows,
        "weight_blocks": blocks,
        "block_pairs": blocks // 2,
    }



def layer_mac_calls(points: int, in_dim: int, out_dim: int, column_parallelism: int = COLUMN_PARALLELISM) -> int:
    """
    16-row tile calls needed to apply an `in_dim` x `out_dim` layer to `points` feature vectors.
    """
    return math.ceil(in_dim / ROWS) * math.ceil(out_dim / column_parallelism) * points
