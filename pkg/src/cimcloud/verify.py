"""
Exactness suite of the SC-CIM arithmetic against plain integer oracles.
"""
from dataclasses import dataclass, field
import logging

import numpy as np

from . import sccim
from .faults import fault_proof


logger = logging.getLogger(__name__)

DEFAULT_RANDOM_MACS = 100_000
BATCH = 10_000



@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: int
    total: int

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def __str__(self):
        return f"{self.passed}/{self.total} {self.name}"


@dataclass
class VerifyReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(check.ok for check in self.checks)

    @property
    def mismatches(self) -> int:
        return sum(check.total - check.passed for check in self.checks)

    def summary(self) -> str:
        return ", ".join(str(check) for check in self.checks)



@fault_proof
def exact_dot(inputs, weights) -> np.ndarray:
    """Reference dot products over the last axis; 16 products of 16-bit values fit int64 exactly."""
    return (np.asarray(inputs, dtype=np.int64) * np.asarray(weights, dtype=np.int64)).sum(axis=-1)



def check_fused_add() -> CheckResult:
    """Decomposition identity of the fused adder over all 16^4 operand combinations."""
    grid = np.arange(1 << 16, dtype=np.int64)
    in_a, in_b, nib_a, nib_b = grid & 0xF, (grid >> 4) & 0xF, (grid >> 8) & 0xF, grid >> 12
    out = sccim.fused_add(in_a, in_b, nib_a, nib_b)
    expected = sccim.cluster_block_multiply(in_a, nib_a) + sccim.cluster_block_multiply(in_b, nib_b)
    return CheckResult("fused-add identities", int(np.count_nonzero(out.total == expected)), len(grid))


def check_input_split() -> CheckResult:
    x = np.arange(sccim.INT16_MIN, sccim.INT16_MAX + 1, dtype=np.int64)
    back = sccim.reassemble_input(sccim.split_input(x))
    return CheckResult("input split round trips", int(np.count_nonzero(back == x)), len(x))


def check_weight_split() -> CheckResult:
    w = np.arange(sccim.INT16_MIN, sccim.INT16_MAX + 1, dtype=np.int64)
    back = sccim.reassemble_weight(sccim.split_weight(w))
    return CheckResult("weight split round trips", int(np.count_nonzero(back == w)), len(w))


def check_signed_products() -> CheckResult:
    """Every signed 8-bit pair through the periphery merge."""
    values = np.arange(-128, 128, dtype=np.int64)
    x, w = np.meshgrid(values, values, indexing="ij")
    merged = sccim.signed_product(x.ravel(), w.ravel())
    return CheckResult("8-bit signed products", int(np.count_nonzero(merged == x.ravel() * w.ravel())), x.size)


def check_signed_product_macs() -> tuple[CheckResult, CheckResult]:
    """
    Every signed 8-bit pair through the 16-row MACs.

    Sixteen consecutive pairs fill one vector, so both rows of every fused adder carry live operands.
    A pair counts as passed when its vector's sum is exact.
    """
    values = np.arange(-128, 128, dtype=np.int64)
    x, w = np.meshgrid(values, values, indexing="ij")
    inputs, weights = x.reshape(-1, sccim.ROWS), w.reshape(-1, sccim.ROWS)

    expected = exact_dot(inputs, weights)
    sums, _ = sccim.mac_16rows(inputs, weights)
    sums_bs, _ = sccim.bs_mac_16rows(inputs, weights)
    return (CheckResult("8-bit MAC sweeps", sccim.ROWS * int(np.count_nonzero(sums == expected)), x.size),
            CheckResult("8-bit bit-serial MAC sweeps", sccim.ROWS * int(np.count_nonzero(sums_bs == expected)), x.size))


def check_random_macs(n: int = DEFAULT_RANDOM_MACS, seed: int = 0) -> tuple[CheckResult, CheckResult]:
    """
    Random full-range signed vectors, plus the all-minimum corner, through `mac_16rows` and the bit-serial MAC.
    """
    rng = np.random.default_rng(seed)
    passed, passed_bs = 0, 0
    for start in range(0, n, BATCH):
        size = min(BATCH, n - start)
        x = rng.integers(sccim.INT16_MIN, sccim.INT16_MAX + 1, size=(size, sccim.ROWS))
        w = rng.integers(sccim.INT16_MIN, sccim.INT16_MAX + 1, size=(size, sccim.ROWS))
        if start == 0:
            x[0], w[0] = sccim.INT16_MIN, sccim.INT16_MIN
        expected = exact_dot(x, w)
        sums, _ = sccim.mac_16rows(x, w)
        sums_bs, _ = sccim.bs_mac_16rows(x, w)
        passed += int(np.count_nonzero(sums == expected))
        passed_bs += int(np.count_nonzero(sums_bs == expected))
    return CheckResult("MACs exact", passed, n), CheckResult("bit-serial MACs exact", passed_bs, n)



def run_suite(rand_n: int = DEFAULT_RANDOM_MACS, seed: int = 0) -> VerifyReport:
    """
    Runs every check; the report is ok only with zero mismatches.
    """
    report = VerifyReport([check_fused_add(), check_input_split(), check_weight_split(), check_signed_products()])
    report.checks.extend(check_signed_product_macs())
    report.checks.extend(check_random_macs(rand_n, seed))
    if report.ok:
        logger.info(f"SC-CIM verification passed: {report.summary()}")
    else:
        logger.error(f"SC-CIM verification found {report.mismatches} mismatches: {report.summary()}")
    return report
