"""Correlation harvesting by two detectors near a reflecting plane."""

from .model import (
    Alignment,
    DetectorPair,
    Geometry,
    TwoDetectorState,
    correlation_c,
    correlation_x,
    evaluate,
    transition_probability,
)
from .measures import CorrelationReport, concurrence, mutual_information, report, rescale_report

__version__ = "0.1.0"

__all__ = [
    "Alignment",
    "DetectorPair",
    "Geometry",
    "TwoDetectorState",
    "CorrelationReport",
    "transition_probability",
    "correlation_c",
    "correlation_x",
    "evaluate",
    "concurrence",
    "mutual_information",
    "report",
    "rescale_report",
    "__version__",
]
