import csv, os, types, typing

from .faults import Fault, apply, inject_fault, remove_fault
from .func_types import CorruptFnType
from .hooks import register_function_hook, register_method_hook, remove_function_hook, remove_method_hook


class TraceManager:
    """
    A context manager recording one trace point of a function or method as CSV rows.
    The hook is removed and the file closed when exiting the context.
    """

    def __init__(
            self,
            target: types.ModuleType | type,
            callable_name: str,
            hook_id: str,
            path: str | os.PathLike,
            header: typing.Sequence[str] | None = None
        ):
        self.target = target
        self.callable_name = callable_name
        self.hook_id = hook_id
        self.path = path
        self.header = header
        self.rows = 0
        self._file = None
        self._writer = None

    def _record(self, *row):
        self._writer.writerow(row)
        self.rows += 1

    def __enter__(self):
        self._file = open(self.path, "w", encoding="utf-8", newline="")
        self._writer = csv.writer(self._file, lineterminator="\n")
        if self.header:
            self._writer.writerow(self.header)
        if isinstance(self.target, type):
            register_method_hook(self.target, self.callable_name, self._record, self.hook_id)
        else:
            register_function_hook(self.target, self.callable_name, self._record, self.hook_id)
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        if isinstance(self.target, type):
            remove_method_hook(self.target, self.callable_name, self.hook_id)
        else:
            remove_function_hook(self.target, self.callable_name, self.hook_id)
        self._file.close()



class FaultManager:
    """
    A context manager injecting a fault into a module function, restoring the function on exit.
    Accepts either a `Fault` instance or a target plus a corruption callback.
    """

    def __init__(
            self,
            fault: Fault | None = None,
            target: types.ModuleType | None = None,
            function_name: str | None = None,
            corrupt: CorruptFnType | None = None
        ):
        if fault is None and (target is None or function_name is None or corrupt is None):
            raise TypeError("FaultManager needs a Fault or a target, function name and corrupt callback")
        self.fault = fault
        self.target = fault._target_module if fault is not None else target
        self.function_name = fault._target_name if fault is not None else function_name
        self.corrupt = corrupt
        self.fault_id = None

    def __enter__(self):
        if self.fault is not None:
            self.fault_id = apply(self.fault)
        else:
            self.fault_id = inject_fault(self.target, self.function_name, self.corrupt)
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        remove_fault(self.target, self.function_name, self.fault_id)



def capture_trace(
    target: types.ModuleType | type,
    callable_name: str,
    hook_id: str,
    path: str | os.PathLike,
    header: typing.Sequence[str] | None = None
) -> TraceManager:
    return TraceManager(target, callable_name, hook_id, path, header)


def apply_fault(fault: Fault) -> FaultManager:
    return FaultManager(fault)
