import numpy as np
import pytest

from cimcloud import sccim, verify
from cimcloud.context import FaultManager, apply_fault
from cimcloud.errors import FaultTargetError
from cimcloud.faults import DroppedCarryFault, Fault, apply, get_active_faults, inject_fault, remove_fault


def test_inject_and_remove_restores_function():
    original = sccim.cluster_block_multiply
    fault_id = inject_fault(sccim, "cluster_block_multiply", lambda result, *args: result + 1)
    try:
        assert sccim.cluster_block_multiply(0b0101, 0xA) == 2571
        assert [(info.target, info.fault_id) for info in get_active_faults()] == [("cluster_block_multiply", fault_id)]
    finally:
        assert remove_fault(sccim, "cluster_block_multiply", fault_id)
    assert sccim.cluster_block_multiply is original
    assert not remove_fault(sccim, "cluster_block_multiply", fault_id)
    assert get_active_faults() == []


def test_fault_proof_oracle_is_refused():
    with pytest.raises(FaultTargetError):
        inject_fault(verify, "exact_dot", lambda result, *args: result)
    assert verify.exact_dot([2] * 16, [3] * 16) == 96


def test_missing_target_is_refused():
    with pytest.raises(AttributeError):
        inject_fault(sccim, "no_such_function", lambda result, *args: result)


def test_dropped_carry_breaks_mac_only_inside_context():
    x, w = [0b0011] * 16, [0x0F0F] * 16
    expected = 16 * 3 * 0x0F0F
    with apply_fault(DroppedCarryFault()):
        assert sccim.mac_16rows(x, w)[0] != expected
        assert sccim.fused_add(0b0011, 0b0101, 9, 8).carries == (0, 0, 0, 0)
    assert sccim.mac_16rows(x, w)[0] == expected


def test_fault_manager_with_callback():
    with FaultManager(target=sccim, function_name="signed_product", corrupt=lambda result, *args: -result) as manager:
        assert sccim.signed_product(3, 5) == -15
        assert manager.fault_id is not None
    assert sccim.signed_product(3, 5) == 15
    with pytest.raises(TypeError):
        FaultManager(target=sccim)


def test_custom_fault_class():
    @Fault.target(sccim, "split_weight")
    class ZeroTopNibble(Fault):
        def corrupt(self, result, *args, **kwds):
            return sccim.WeightNibbles(result.n0, result.n1, result.n2, 0)

    fault_id = apply(ZeroTopNibble())
    try:
        assert sccim.reassemble_weight(sccim.split_weight(0x1234)) == 0x0234
    finally:
        remove_fault(sccim, "split_weight", fault_id)
    assert np.array_equal(sccim.reassemble_weight(sccim.split_weight(np.array([0x1234]))), [0x1234])
