"""Shared exception types.

ConfigError maps to CLI exit code 2, NumericalAbort to exit code 3.
"""


class ConfigError(ValueError):
    """Invalid configuration, file format, or operator parameters."""


class DegenerateStateError(ValueError):
    """A field state that cannot be processed (e.g. non-positive density)."""


class OwnershipError(RuntimeError):
    """An actuator point touched data outside its owner's reach: protocol bug."""


class ProtocolError(RuntimeError):
    """Malformed exchange buffer (framing/size mismatch)."""


class NumericalAbort(RuntimeError):
    """NaN detected during time stepping."""

    def __init__(self, step, cell, field="density"):
        self.step = step
        self.cell = tuple(int(c) for c in cell)
        self.field = field
        super().__init__(
            f"non-finite {field} at step {step}, global cell {self.cell}"
        )
