"""
Custom exceptions for mrsc-optsize
"""

from typing import Any, Dict, Optional


class MRSCError(Exception):
    """Base exception for all mrsc-optsize errors"""

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.details = details or {}

    def __str__(self) -> str:
        base_message = self.message
        if self.error_code:
            base_message = f"[{self.error_code}] {base_message}"
        return base_message


class ConfigurationError(MRSCError):
    """Raised when there's a configuration issue"""

    pass


class ValidationError(MRSCError):
    """Raised when user input validation fails"""

    pass


class ParseError(MRSCError):
    """Raised when program text does not follow the source grammar"""

    def __init__(
        self,
        message: str,
        line: int,
        column: int,
        error_code: Optional[str] = "PARSE",
    ):
        super().__init__(
            f"{message} at line {line}, column {column}",
            error_code=error_code,
            details={"line": line, "column": column},
        )
        self.line = line
        self.column = column


class WellFormednessError(MRSCError):
    """Raised when a parsed program violates a well-formedness rule"""

    def __init__(self, message: str, name: str, error_code: Optional[str] = "WF"):
        super().__init__(message, error_code=error_code, details={"name": name})
        self.name = name


class InternalError(MRSCError):
    """Raised when an internal invariant is violated"""

    pass


class GraphSetBudgetError(MRSCError):
    """Raised when graph-set construction exceeds the node budget"""

    pass


class EmptyResultError(MRSCError):
    """Raised when a query finds no configuration graph"""

    pass
