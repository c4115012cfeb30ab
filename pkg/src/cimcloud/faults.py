"""
Test-only fault injection: wraps a module function so its result is corrupted, and restores it on demand.
Used as the negative control of the SC-CIM verification suite.
"""
import functools, logging, types

from . import sccim
from .errors import FaultTargetError
from .func_types import CorruptFnType


logger = logging.getLogger(__name__)

_active_faults = {}   # (module, function name, id) -> original function

n = 0
def new_id():
    global n
    n += 1
    return n



class fault_proof:
    """
    Class-based decorator marking a function (typically a reference oracle) as never faultable.
    """
    def __init__(self, func):
        self.func = func
        functools.update_wrapper(self, func)

    def __call__(self, *args, **kwds):
        return self.func(*args, **kwds)



class FaultInfo:
    """Holds information about an injected fault."""
    def __init__(self, parent, target, fault_id: int, original):
        self.parent = parent
        self.target = target
        self.fault_id = fault_id
        self.original = original

    def __repr__(self):
        return f"FaultInfo({self.parent.__name__}.{self.target}, id={self.fault_id})"



def inject_fault(target_module: types.ModuleType, function_name: str, corrupt: CorruptFnType) -> int:
    """
    Replaces a module function by a wrapper that passes the original result through `corrupt`.

    Args:
        `target_module`: The module object where the function is defined.
        `function_name`: The name of the function to corrupt.
        `corrupt`: Called as `corrupt(result, *args, **kwds)`; its return value replaces the result.

    Returns:
        The fault ID to pass to `remove_fault`.
    """
    original_function = getattr(target_module, function_name, None)
    if not callable(original_function):
        raise AttributeError(f"{target_module.__name__} has no function '{function_name}'")
    if isinstance(original_function, fault_proof):
        raise FaultTargetError(f"{target_module.__name__}.{function_name}")

    fault_key = (target_module, function_name, new_id())
    _active_faults[fault_key] = original_function

    @functools.wraps(original_function)
    def faulty_function(*args, **kwds):
        result = original_function(*args, **kwds)
        return corrupt(result, *args, **kwds)

    setattr(target_module, function_name, faulty_function)
    logger.warning(f"Fault {fault_key[2]} injected into {target_module.__name__}.{function_name}")
    return fault_key[2]



def remove_fault(target_module: types.ModuleType, function_name: str, fault_id: int) -> bool:
    """
    Restores the function that was wrapped by `inject_fault`.
    """
    fault_key = (target_module, function_name, fault_id)
    if fault_key in _active_faults:
        setattr(target_module, function_name, _active_faults.pop(fault_key))
        return True
    return False



def get_active_faults() -> list[FaultInfo]:
    """
    Returns every fault currently injected; an empty list when the simulator runs clean.
    """
    return [FaultInfo(module, name, fault_id, original) for (module, name, fault_id), original in _active_faults.items()]



class Fault:
    """A base class for reusable faults, applied with `apply`."""

    @staticmethod
    def target(target_module: types.ModuleType, target_name: str):
        """
        Decorator to specify the function the fault corrupts.
        """
        def decorator(cls):
            cls._target_module = target_module
            cls._target_name = target_name
            return cls
        return decorator

    def corrupt(self, result, *args, **kwds):
        return result



def apply(fault: Fault) -> int:
    """
    Injects a `Fault` subclass instance into its target and returns the fault ID.
    """
    return inject_fault(fault._target_module, fault._target_name, fault.corrupt)



@Fault.target(sccim, "fused_add")
class DroppedCarryFault(Fault):
    """Loses every carry of the fused adders' CRA, as a broken sparse adder tree would."""
    def corrupt(self, result, *args, **kwds):
        return sccim.FuaOutput(result.dense, tuple(carry & 0 for carry in result.carries))
