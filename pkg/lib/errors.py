"""Exception hierarchy. ComputationError maps to exit code 1, ConfigError to 2."""
from typing import Any, Dict


class BraidAdicError(Exception):
    """Base class for every error raised by the library."""

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "detail": str(self)}


class ConfigError(BraidAdicError, ValueError):
    pass


class BadWord(ConfigError):
    pass


class BadIndex(ConfigError):
    pass


class StrandMismatch(ConfigError):
    pass


class ComputationError(BraidAdicError, RuntimeError):
    pass


class DegenerateClosure(ComputationError):
    pass


class NoConvergence(ComputationError):
    pass


class FiberIncomplete(ComputationError):
    def __init__(self, found: int, expected: int, detail: str = "") -> None:
        self.found = found
        self.expected = expected
        msg = f"found {found} of {expected} fiber points"
        super().__init__(f"{msg}: {detail}" if detail else msg)

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data.update({"found": self.found, "expected": self.expected})
        return data


class NonGenericBase(ComputationError):
    pass


class NoConsistentMatching(ComputationError):
    pass


class LeavesVn(ComputationError):
    pass


class PathTrackingFailure(ComputationError):
    pass


class EndpointUnmatched(ComputationError):
    pass


class DegenerateProjection(ComputationError):
    pass


class MissingTable(ComputationError):
    pass


class DepthExceeded(ComputationError):
    pass


class EnumerationBudgetExceeded(ComputationError):
    pass


class BasePointMismatch(ComputationError):
    pass
