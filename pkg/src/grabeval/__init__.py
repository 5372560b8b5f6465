"""Frame-grabber acquisition accuracy evaluation.

Analyzers for internal noise, ADC quantisation, the analogue front end,
periodic interference and sync jitter, plus a test-pattern generator with
calibrated defect injection used to verify them.
"""

__version__ = "0.1.0"

from grabeval.frame import Frame, FormatSpec, load_frame, save_frame
from grabeval.patterns import DefectModel, PatternSpec, apply_defects, generate_pattern

__all__ = [
    "Frame",
    "FormatSpec",
    "load_frame",
    "save_frame",
    "PatternSpec",
    "DefectModel",
    "generate_pattern",
    "apply_defects",
    "__version__",
]
