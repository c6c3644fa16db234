"""Discrete-event simulation of GPSR and trust-hardened S-GPSR routing."""

from .core import Packet, Position, SimConfig, validate_config
from .engine import RunRecord, run_simulation
from .experiments import RunMetrics, metrics_from_record, run_sweep

__version__ = "0.1.0"

__all__ = [
    "Packet",
    "Position",
    "RunMetrics",
    "RunRecord",
    "SimConfig",
    "metrics_from_record",
    "run_simulation",
    "run_sweep",
    "validate_config",
    "__version__",
]
