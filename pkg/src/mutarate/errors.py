"""Exception hierarchy shared by all modules.

The CLI maps these onto process exit codes: ConfigError -> 2,
DataError -> 3, SaturationError (and other numeric failures) -> 4.
"""


class MutarateError(Exception):
    """Base class for all package errors."""


class ConfigError(MutarateError):
    """Invalid configuration: bad flag combinations, unreadable config file."""


class DataError(MutarateError):
    """Invalid or inconsistent input data: bad FASTA, manifest conflicts,
    missing upstream artifacts, residues outside the alphabet."""


class SaturationError(MutarateError):
    """A distance correction left its domain (e.g. observed difference too
    large for the logarithm), or another numeric operation is undefined."""
