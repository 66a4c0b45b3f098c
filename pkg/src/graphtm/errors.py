"""Exception types shared across the package.

The CLI maps these onto process exit codes; see cli.EXIT_CODES.
"""


class GraphTmError(Exception):
    """Base class for all package errors."""


class ConfigError(GraphTmError):
    """A structurally invalid configuration (bad sizes, bad flags)."""


class BindingOverflowError(ConfigError):
    """An edge-type offset would push a clause bit past the message space."""


class SymbolExistsError(GraphTmError):
    """Attempt to register a symbol id twice."""


class UnknownSymbolError(GraphTmError):
    """A graph references a symbol the bound space has never seen."""


class InputError(GraphTmError):
    """Unreadable, empty, or malformed input data."""


class SpaceMismatchError(GraphTmError):
    """Model and corpus were built against different symbol vocabularies."""


class CorruptModelError(GraphTmError):
    """A model file failed magic, version, or layout validation."""
