"""
Error handling for the Zeno vacuum-scissors simulator.

This module provides:
- Custom exception classes
- Error report formatting
- Error logging
- Mapping of errors to command-line exit statuses
"""

import json
import logging
import traceback
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence


class ErrorSeverity(Enum):
    """Error severity levels."""
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


class ErrorCategory(Enum):
    """Error categories."""
    VALIDATION = "validation"
    NUMERICAL = "numerical"
    TRUNCATION = "truncation"
    DEGENERATE_COUPLING = "degenerate_coupling"
    NO_OUTCOME = "no_outcome"
    CONFIGURATION = "configuration"
    IO = "io"
    VERIFICATION = "verification"
    UNKNOWN = "unknown"


class SimulationError(Exception):
    """Base exception for the simulator."""

    def __init__(
        self,
        message: str,
        error_code: str,
        category: ErrorCategory = ErrorCategory.UNKNOWN,
        severity: ErrorSeverity = ErrorSeverity.MEDIUM,
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.category = category
        self.severity = severity
        self.details = details or {}
        self.timestamp = datetime.now()
        self.traceback = traceback.format_exc()


class ValidationError(SimulationError):
    """Invalid parameter or operand."""

    def __init__(self, message: str, field: Optional[str] = None, value: Any = None):
        super().__init__(
            message=message,
            error_code="VALIDATION_ERROR",
            category=ErrorCategory.VALIDATION,
            severity=ErrorSeverity.LOW,
            details={"field": field, "value": value},
        )


class TruncationError(SimulationError):
    """Probe state does not fit inside the requested Fock cutoff."""

    def __init__(self, message: str, tail_mass: float, cutoff: int, suggested_cutoff: int):
        super().__init__(
            message=message,
            error_code="TRUNCATION_ERROR",
            category=ErrorCategory.TRUNCATION,
            severity=ErrorSeverity.MEDIUM,
            details={"tail_mass": tail_mass, "cutoff": cutoff, "suggested_cutoff": suggested_cutoff},
        )
        self.tail_mass = tail_mass
        self.suggested_cutoff = suggested_cutoff


class DegenerateCouplingError(SimulationError):
    """Kerr phase per stage is a multiple of 2*pi."""

    def __init__(self, message: str, kappa: float, n: int, m: int):
        super().__init__(
            message=message,
            error_code="DEGENERATE_COUPLING",
            category=ErrorCategory.DEGENERATE_COUPLING,
            severity=ErrorSeverity.LOW,
            details={"kappa": kappa, "n": n, "m": m},
        )


class LeakageError(SimulationError):
    """Signal-mode population escaped the {|0>, |n>} subspace."""

    def __init__(self, message: str, leakage: float, tolerance: float, params: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            error_code="LEAKAGE_ERROR",
            category=ErrorCategory.NUMERICAL,
            severity=ErrorSeverity.HIGH,
            details={"leakage": leakage, "tolerance": tolerance, "params": params or {}},
        )
        self.leakage = leakage


class NoOutcomeError(SimulationError):
    """Post-selection on |0>_a has zero probability."""

    def __init__(self, message: str, probability: float):
        super().__init__(
            message=message,
            error_code="NO_OUTCOME",
            category=ErrorCategory.NO_OUTCOME,
            severity=ErrorSeverity.MEDIUM,
            details={"postselect_probability": probability},
        )


class ProbeSpecError(SimulationError):
    """Malformed probe mini-syntax."""

    GRAMMAR = "fock:<m> | coherent:<re>[,<im>] | squeezed:<eps>,<alpha> | custom:@<file>"

    def __init__(self, message: str, spec: str):
        super().__init__(
            message=f"{message} (expected {self.GRAMMAR})",
            error_code="PROBE_SPEC_ERROR",
            category=ErrorCategory.VALIDATION,
            severity=ErrorSeverity.LOW,
            details={"spec": spec, "grammar": self.GRAMMAR},
        )


class ConfigurationError(SimulationError):
    """Configuration file or value error."""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(
            message=message,
            error_code="CONFIGURATION_ERROR",
            category=ErrorCategory.CONFIGURATION,
            severity=ErrorSeverity.MEDIUM,
            details={"key": key},
        )


class OutputPathError(SimulationError):
    """Output file cannot be written."""

    def __init__(self, message: str, path: str):
        super().__init__(
            message=f"{message}: {path}",
            error_code="OUTPUT_PATH_ERROR",
            category=ErrorCategory.IO,
            severity=ErrorSeverity.MEDIUM,
            details={"path": path},
        )
        self.path = path


class VerificationFailure(SimulationError):
    """A verification check exceeded its tolerance."""

    def __init__(self, message: str, check: str, deviation: float, tolerance: float,
                 params: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=message,
            error_code="VERIFICATION_FAILURE",
            category=ErrorCategory.VERIFICATION,
            severity=ErrorSeverity.HIGH,
            details={"check": check, "deviation": deviation, "tolerance": tolerance, "params": params or {}},
        )


class ErrorHandler:
    """Centralized error handler."""

    EXIT_SUCCESS = 0
    EXIT_CHECK_FAILURE = 1
    EXIT_USAGE = 2

    def __init__(self):
        self.logger = logging.getLogger(__name__)
        self.error_counts: Dict[str, int] = {}

    def handle_error(self, error: Exception, context: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """Handle and format an error report."""
        self._log_error(error, context)

        if isinstance(error, SimulationError):
            key = f"{error.category.value}_{error.error_code}"
            self.error_counts[key] = self.error_counts.get(key, 0) + 1
            return {
                "error": {
                    "type": error.category.value,
                    "code": error.error_code,
                    "message": error.message,
                    "severity": error.severity.value,
                    "details": error.details,
                },
                "suggestions": self._get_error_suggestions(error),
            }

        return {
            "error": {
                "type": "unknown",
                "code": "UNKNOWN_ERROR",
                "message": str(error),
                "severity": ErrorSeverity.MEDIUM.value,
                "details": {},
            },
            "suggestions": ["Re-run with --log-level DEBUG for a traceback"],
        }

    def exit_code(self, error: Exception) -> int:
        """Map an error to a command-line exit status."""
        if isinstance(error, SimulationError) and error.category in (
            ErrorCategory.VERIFICATION,
            ErrorCategory.NO_OUTCOME,
            ErrorCategory.NUMERICAL,
        ):
            return self.EXIT_CHECK_FAILURE
        return self.EXIT_USAGE

    def _log_error(self, error: Exception, context: Optional[Dict[str, Any]] = None):
        """Log error with context."""
        log_data = {
            "error_type": type(error).__name__,
            "error_message": str(error),
            "context": context or {},
        }

        if isinstance(error, SimulationError):
            log_data.update({
                "error_code": error.error_code,
                "category": error.category.value,
                "severity": error.severity.value,
                "details": error.details,
            })

        self.logger.error(f"Error occurred: {json.dumps(log_data, default=str)}")

    def _get_error_suggestions(self, error: SimulationError) -> List[str]:
        """Get suggestions for error resolution."""
        suggestions = []

        if error.category == ErrorCategory.TRUNCATION:
            suggestions.append(f"Increase --b-cutoff to at least {error.details.get('suggested_cutoff')}")
        elif error.category == ErrorCategory.DEGENERATE_COUPLING:
            suggestions.append("Choose kappa so that kappa*n*m is not a multiple of 2*pi")
        elif error.category == ErrorCategory.NO_OUTCOME:
            suggestions.append("Use a probe with a non-vacuum component or more than one stage")
        elif error.category == ErrorCategory.IO:
            suggestions.append("Check that the output directory exists and is writable")
        elif error.category == ErrorCategory.VALIDATION:
            suggestions.extend([
                "Check parameter ranges",
                "Verify cutoffs are above the documented minimums",
            ])
        elif error.category == ErrorCategory.NUMERICAL:
            suggestions.append("Increase --a-cutoff")

        return suggestions


def format_parameters(params: Sequence[Any]) -> str:
    """Render an offending parameter tuple for diagnostics."""
    return "(" + ", ".join(str(p) for p in params) + ")"


# Global error handler instance
error_handler = ErrorHandler()
