# Errors.py
# Author: John Akujobi
# Date: 2026-10-19
# Version: 1.0
"""
Exception hierarchy for mixbec.

Every error raised on purpose by the library derives from `MixbecError`.
The four families map onto the CLI exit codes used by the Driver:

- ConfigError      -> 2  (bad configuration, rejected particle-number sequences)
- NumericalError   -> 3  (non-finite states, Krylov failure, broken invariants)
- DimensionError   -> 3  (mismatched sizes, sector above the configured limit)
- ReportIOError    -> 4  (files that cannot be read or written)
"""

from typing import Optional, Tuple


class MixbecError(Exception):
    """Base class for all mixbec specific errors."""
    exit_code: int = 1


class ConfigError(MixbecError, ValueError):
    """Raised when a configuration value is missing or out of range."""
    exit_code = 2

    def __init__(self, message: str, key: Optional[str] = None):
        self.reason = message
        if key is not None:
            message = f"{key}: {message}"
        super().__init__(message)
        self.key = key


class SequenceConditionError(ConfigError):
    """Raised when a particle-number pair violates the sequence condition."""

    def __init__(self, pair: Tuple[int, int], deviation_1: float, deviation_2: float,
                 bound_1: float, bound_2: float):
        super().__init__(
            f"pair (N1={pair[0]}, N2={pair[1]}) violates the sequence condition: "
            f"|N1/(N1+N2) - c1| = {deviation_1:.6g} (bound {bound_1:.6g}), "
            f"|N2/(N1+N2) - c2| = {deviation_2:.6g} (bound {bound_2:.6g})",
            key="sequences",
        )
        self.pair = pair
        self.deviations = (deviation_1, deviation_2)


class DimensionError(MixbecError, ValueError):
    """Raised when operands have incompatible sizes."""
    exit_code = 3


class SectorTooLargeError(DimensionError):
    """Raised when a sector basis would exceed the configured dimension limit."""

    def __init__(self, label: str, dimension: int, limit: int):
        super().__init__(f"sector {label} has dimension {dimension}, above the limit {limit}")
        self.label = label
        self.dimension = dimension
        self.limit = limit


class NumericalError(MixbecError):
    """Raised when a numerical invariant breaks down."""
    exit_code = 3


class NonFiniteStateError(NumericalError):
    """Raised when an evolved state contains NaN or Inf."""

    def __init__(self, step_index: int, time: float):
        super().__init__(f"non-finite values after step {step_index} (t = {time:.6g})")
        self.step_index = step_index
        self.time = time


class KrylovConvergenceError(NumericalError):
    """Raised when Krylov propagation fails even after shrinking the substep."""

    def __init__(self, substep: float, error_estimate: float):
        super().__init__(
            f"Krylov propagation did not converge (last substep {substep:.3g}, "
            f"error estimate {error_estimate:.3g})"
        )
        self.substep = substep
        self.error_estimate = error_estimate


class ReportIOError(MixbecError):
    """Raised when a report, config or snapshot file cannot be read or written."""
    exit_code = 4

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
