"""
Models package for locpir.

This package contains the Pydantic models describing parameters, coordinate
formats, region tables and benchmark configuration.
"""

from .params import STANDARD_LEVELS, SecurityLevel, TlweParams
from .fixed_point import FixedPointFormat, GeoCoordinate
from .region import DatasetConfig, RegionRecord
from .bench import CSV_COLUMNS, BenchConfig, PhaseReport

__all__ = [
    "STANDARD_LEVELS",
    "SecurityLevel",
    "TlweParams",
    "FixedPointFormat",
    "GeoCoordinate",
    "DatasetConfig",
    "RegionRecord",
    "CSV_COLUMNS",
    "BenchConfig",
    "PhaseReport",
]
