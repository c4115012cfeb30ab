import inspect, sys, types, typing

from .func_types import TraceFnType


_active_function_hooks: dict[tuple, dict[str, TraceFnType]] = {}
_active_method_hooks: dict[tuple, dict[str, TraceFnType]] = {}


def register_function_hook(target_module: types.ModuleType, function_name: str, hook_callback: TraceFnType, hook_id: str):
    """
    Registers a trace callback for a function in a module.

    Args:
        `target_module`: The module object where the function is defined.
        `function_name`: The name of the traced function.
        `hook_callback`: Called with the trace row every time the function emits `hook_id`.
        `hook_id`: The trace point inside the function (`"partial"` for `sccim.mac_16rows`).
    """
    hook_key = (target_module, function_name)
    _active_function_hooks.setdefault(hook_key, {})[hook_id] = hook_callback
    return True



def register_method_hook(target_class: type, method_name: str, hook_callback: TraceFnType, hook_id: str):
    """
    Registers a trace callback for a method of a class.

    Args:
        `target_class`: The class whose method is traced (`ApdCimArray`, `CamArray`).
        `method_name`: The name of the traced method.
        `hook_callback`: Called with the trace row every time the method emits `hook_id`.
        `hook_id`: The trace point inside the method (`"row"`, `"bit"`).
    """
    hook_key = (target_class, method_name)
    _active_method_hooks.setdefault(hook_key, {})[hook_id] = hook_callback
    return True



def remove_function_hook(target_module: types.ModuleType, function_name: str, hook_id: str):
    hook_key = (target_module, function_name)
    if hook_key in _active_function_hooks and hook_id in _active_function_hooks[hook_key]:
        del _active_function_hooks[hook_key][hook_id]
        if not _active_function_hooks[hook_key]:
            del _active_function_hooks[hook_key]
        return True
    return False



def remove_method_hook(target_class: type, method_name: str, hook_id: str):
    hook_key = (target_class, method_name)
    if hook_key in _active_method_hooks and hook_id in _active_method_hooks[hook_key]:
        del _active_method_hooks[hook_key][hook_id]
        if not _active_method_hooks[hook_key]:
            del _active_method_hooks[hook_key]
        return True
    return False



def is_hooked(target: types.ModuleType | type, callable_name: str) -> bool:
    """
    Cheap check used by the simulation loops before they build trace rows.
    """
    if isinstance(target, type):
        return (target, callable_name) in _active_method_hooks
    return (target, callable_name) in _active_function_hooks



### THESE FUNCTIONS ARE CALLED FROM THE TRACED CODE ITSELF ###

def _dispatch(registry: dict, hook_key: tuple, hook_id: str, args: typing.Sequence):
    hooks = registry.get(hook_key)
    if hooks and hook_id in hooks:
        return hooks[hook_id](*args)
    return None


def call_hook(hook_id: str, args: typing.Sequence = ()):
    """
    Emits a trace row to the hook registered for the calling function or method.<br>
    The caller is found through its frame: a frame with `self` is a method of `type(self)`,
    anything else is a module-level function.

    Args:
        `hook_id`: The trace point being emitted.
        `args`: The trace row.
    """
    frame = inspect.currentframe().f_back
    if frame is None:
        raise RuntimeError("No calling frame found.")

    try:
        callable_name = frame.f_code.co_name
        owner = frame.f_locals.get("self")
        if owner is not None:
            # Subclasses emit under the class that registered the hook
            for cls in type(owner).__mro__:
                if (cls, callable_name) in _active_method_hooks:
                    return _dispatch(_active_method_hooks, (cls, callable_name), hook_id, args)
            return None

        module_name = frame.f_globals.get("__name__")
        target_module = sys.modules.get(module_name)
        if target_module is None:
            raise RuntimeError(f"Module '{module_name}' not found.")
        return _dispatch(_active_function_hooks, (target_module, callable_name), hook_id, args)
    finally:
        del frame



def get_active_function_hooks() -> dict[tuple, dict[str, TraceFnType]]:
    return _active_function_hooks


def get_active_method_hooks() -> dict[tuple, dict[str, TraceFnType]]:
    return _active_method_hooks
