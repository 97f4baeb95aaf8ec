"""Core numerics - pure functions without side effects."""

from .distributions import Cumulants, SampleMeanModel
from .expansions import ExpansionSpec
from .rearrangement import GridFunction, WeightCdf, rearrange

__all__ = [
    "Cumulants",
    "ExpansionSpec",
    "GridFunction",
    "SampleMeanModel",
    "WeightCdf",
    "rearrange",
]
