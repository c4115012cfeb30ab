from cimcloud.context import apply_fault
from cimcloud.faults import DroppedCarryFault
from cimcloud.verify import (
    CheckResult, VerifyReport, check_fused_add, check_input_split, check_random_macs, check_signed_product_macs,
    check_signed_products, check_weight_split, run_suite,
)


def test_exhaustive_checks_pass():
    for check, total in ((check_fused_add, 65536), (check_input_split, 65536), (check_weight_split, 65536),
                         (check_signed_products, 65536)):
        result = check()
        assert result.ok
        assert result.total == total


def test_random_macs_pass():
    exact, bit_serial = check_random_macs(100_000, seed=7)
    assert exact.ok and bit_serial.ok
    assert str(exact) == "100000/100000 MACs exact"


def test_report_summary():
    report = VerifyReport([CheckResult("a", 3, 3), CheckResult("b", 1, 2)])
    assert not report.ok
    assert report.mismatches == 1
    assert report.summary() == "3/3 a, 1/2 b"


def test_suite_passes_clean_and_fails_with_fault():
    assert run_suite(rand_n=50).ok
    with apply_fault(DroppedCarryFault()):
        report = run_suite(rand_n=50)
    assert not report.ok
    assert not report.checks[0].ok
    assert report.checks[1].ok


def test_signed_8bit_sweep_through_both_macs():
    sccim_sweep, bit_serial_sweep = check_signed_product_macs()
    assert sccim_sweep.ok and bit_serial_sweep.ok
    assert sccim_sweep.total == bit_serial_sweep.total == 65536


def test_signed_8bit_sweep_catches_dropped_carries():
    with apply_fault(DroppedCarryFault()):
        sccim_sweep, bit_serial_sweep = check_signed_product_macs()
    assert not sccim_sweep.ok
    assert bit_serial_sweep.ok
