class SimulationError(Exception):
    """Base class of every error raised by cimcloud."""



class CloudFormatError(SimulationError):
    def __init__(self, path, location: str, reason: str):
        self.path = path
        self.location = location
        super().__init__(f"{path}: {location}: {reason}")


class EmptyCloudError(SimulationError):
    def __init__(self, source: str):
        super().__init__(f"Point cloud is empty: {source}")


class CapacityError(SimulationError):
    def __init__(self, count: int, capacity: int):
        self.count = count
        self.capacity = capacity
        super().__init__(f"{count} entries exceed the capacity of {capacity}")


class IndexRangeError(SimulationError):
    def __init__(self, index: int, limit: int):
        super().__init__(f"Index {index} is outside [0, {limit})")


class SampleCountError(SimulationError):
    def __init__(self, m: int, n: int):
        super().__init__(f"Sample count {m} is not valid for {n} points")



class CamModeError(SimulationError):
    def __init__(self, operation: str, mode):
        super().__init__(f"'{operation}' is not allowed while the CAM array is in {mode} mode")


class EmptySearchError(SimulationError):
    def __init__(self):
        super().__init__("No pair is enabled for the CAM search")


class NoMatchError(SimulationError):
    def __init__(self, value: int):
        super().__init__(f"No enabled pair holds the value {value}")


class MisalignedBatchError(SimulationError):
    def __init__(self, expected, got):
        super().__init__(f"Distance batch is not aligned with the CAM pairs (expected {expected}, got {got})")


class StaleBatchError(SimulationError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"Distance batch was computed for reference {got}, not for centroid {expected}")


class PingPongConflictError(SimulationError):
    def __init__(self, target: str):
        super().__init__(f"Search and load work both target array '{target}'")



class ParamsMismatchError(SimulationError):
    def __init__(self):
        super().__init__("Reports were produced with different energy parameters")


class ConfigError(SimulationError):
    def __init__(self, field: str, reason: str):
        self.field = field
        super().__init__(f"Invalid configuration '{field}': {reason}")


class DimensionError(SimulationError):
    def __init__(self, expected, got):
        super().__init__(f"Feature dimension mismatch: expected {expected}, got {got}")



class FaultTargetError(SimulationError):
    def __init__(self, target: str):
        super().__init__(f"'{target}' is protected against fault injection")
