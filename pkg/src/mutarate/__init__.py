"""Mutation-rate estimation for year-tagged virus nucleotide sequences.

Pipeline: per-year multiple alignment -> ambiguity resolution -> per-year
profile-HMM training and representative selection -> cross-year pairwise
distances (Jukes-Cantor / Kimura) -> neighbor-joining tree -> distance-vs-time
least-squares fit with a 95% confidence band.
"""

__version__ = "0.1.0"

from .errors import ConfigError, DataError, MutarateError, SaturationError

__all__ = [
    "ConfigError",
    "DataError",
    "MutarateError",
    "SaturationError",
    "__version__",
]
