from .errors import *
from .func_types import *
from .hooks import *
from .faults import *
from .context import *
from .pointcloud import *
from .partition import *
from .geometry import *
from .costmodel import *
from .apdcim import *
from .maxcam import *
from .sccim import *
from .pipeline import *
from .verify import *
from .config import *
from .log import *


__version__ = "0.1.0"
