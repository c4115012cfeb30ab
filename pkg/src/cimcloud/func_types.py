from typing import Callable, Any

# Callback type definitions: trace rows and fault corruptions.
type TraceFnType = Callable[..., Any]
type CorruptFnType = Callable[..., Any]
