from typing import Any, Dict, Optional

from facewalk.messages import get_err
from facewalk.schemas.errors import ErrorResponse


class FacewalkError(Exception):
    """Base class for errors that end a command with a known exit code.

    Attributes:
        data: the error data
        exit_code: the process exit status reported by the command line
    """

    exit_code = 2

    def __init__(self, data: ErrorResponse):
        super().__init__(data.message)
        self.data = data

    def __reduce__(self):
        return (self.__class__, (self.data,))

    @classmethod
    def from_code(
        cls,
        code: str,
        params: Optional[Dict[str, Any]] = None,
        field: Optional[str] = None,
        **kwargs,
    ):
        """Create the exception from a message code."""
        return cls(get_err(code=code, params=params, field=field), **kwargs)

    @property
    def message(self) -> str:
        """Return the error message."""
        return self.data.message

    @property
    def code(self) -> Optional[str]:
        """Return the error code."""
        return self.data.code

    def to_json(self) -> str:
        """Return the error as a JSON document."""
        return self.data.model_dump_json()


class ConfigError(FacewalkError):
    """Invalid configuration, input file or command line argument."""

    exit_code = 1


class GenerationExhausted(ConfigError):
    """Too many rejected graphs while generating a density cell."""


class ProtocolError(FacewalkError):
    """A protocol assertion failed."""

    exit_code = 2


class NonPlanarGraph(ProtocolError):
    """Face decomposition was requested for a non-planar graph."""


class StepBudgetExceeded(ProtocolError):
    """The kernel did not reach quiescence within its step budget.

    Attributes:
        stats: the statistics collected up to the moment of failure.
    """

    def __init__(self, data: ErrorResponse, stats: Any = None):
        super().__init__(data)
        self.stats = stats
