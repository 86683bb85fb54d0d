"""
Exception hierarchy for nsforge
"""

from typing import Any, Optional


class NSForgeError(Exception):
    """Base class for all library errors"""


class FieldError(NSForgeError, ValueError):
    """Operand has the wrong arity, shape or kind for an operation"""


class GridError(NSForgeError):
    """A required grid is larger than the configured maximum or would alias"""


class ParameterError(NSForgeError, ValueError):
    """Invalid iteration, Mikado or run parameters"""


class NotPositive(NSForgeError):
    """Some coefficient gamma_k^2 is not strictly positive"""

    def __init__(self, message: str, solution: Optional[Any] = None):
        super().__init__(message)
        self.solution = solution


class ZeroStress(NSForgeError):
    """The Reynolds stress vanishes identically; no increment is needed"""


class CapExceeded(NSForgeError):
    """The frequency search reached its cap without an admissible value"""

    def __init__(self, message: str, last_failure: str = ""):
        super().__init__(message)
        self.last_failure = last_failure


class IntegrityError(NSForgeError):
    """A field dump or state manifest is corrupted or inconsistent"""
