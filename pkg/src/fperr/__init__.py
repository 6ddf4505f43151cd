"""Floating-point error detection by condition-number root finding.

Functions are captured once as straight-line graphs of atomic operations.
Each operation has danger inputs where its condition number blows up; Newton
iteration searches for program inputs that drive an operation there, and a
perturbation test separates errors that reach the output from ones that are
masked downstream.
"""

__version__ = "0.1.0"

from .exceptions import DomainError, FPErrError, OracleDomainError, SiteNotExecuted, UnknownFunction  # noqa: E402
from .trace import SiteId, evaluate_plain, evaluate_traced  # noqa: E402
from .corpus import get_function, lookup, registry  # noqa: E402
from .detect import DetectionConfig, run_detection  # noqa: E402

__all__ = [
    "__version__", "DomainError", "FPErrError", "OracleDomainError", "SiteNotExecuted",
    "UnknownFunction", "SiteId", "evaluate_plain", "evaluate_traced", "get_function",
    "lookup", "registry", "DetectionConfig", "run_detection",
]
