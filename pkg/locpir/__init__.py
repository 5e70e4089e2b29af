"""
locpir: location-based private information retrieval over TLWE-encrypted coordinates.

A client encrypts its GPS position bit by bit; the server compares it against N
bounding boxes with homomorphic boolean circuits and returns the encrypted service
value of the box that contains it, without learning the position.
"""

from .circuits import evaluate_locpir, locpir
from .dataset import load_dataset, validate_disjoint
from .engines import available_engines, create_engine
from .models import DatasetConfig, FixedPointFormat, GeoCoordinate, RegionRecord, TlweParams
from .torus_core import NoiseSampler, SecretKey, keygen

__version__ = "0.1.0"

__all__ = [
    "evaluate_locpir",
    "locpir",
    "load_dataset",
    "validate_disjoint",
    "available_engines",
    "create_engine",
    "DatasetConfig",
    "FixedPointFormat",
    "GeoCoordinate",
    "RegionRecord",
    "TlweParams",
    "NoiseSampler",
    "SecretKey",
    "keygen",
]
