"""Shared exception types.

The CLI maps these onto stable exit codes: ConfigError -> 2,
NumericError -> 3, DataContractError -> 4, io/format failures -> 5.
"""


class ShapeError(ValueError):
    """Operand shapes are incompatible with the requested operation."""


class ParameterError(ValueError):
    """An argument is outside its documented domain."""


class ContractError(ValueError):
    """A caller violated an operation's precondition."""


class DataContractError(ValueError):
    """On-disk data does not match what the pipeline requires."""


class NumericError(ArithmeticError):
    """A non-finite value appeared where finite math was required."""


class FormatError(ValueError):
    """A serialized artifact (checkpoint, image file) is malformed."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class ConfigError(ValueError):
    """Bad configuration key or value."""
