from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .fixed_point import FixedPointFormat


class RegionRecord(BaseModel):
    """
    A class representing one row of a region table: a bounding box and its service value.
    """

    model_config = ConfigDict(frozen=True)

    name: str = Field(description="Region name, e.g., 'Seoul'.")
    lat1: float = Field(ge=-90.0, le=90.0, description="Southern latitude edge (inclusive).")
    lat2: float = Field(ge=-90.0, le=90.0, description="Northern latitude edge (exclusive).")
    lon1: float = Field(ge=-180.0, le=180.0, description="Western longitude edge (inclusive).")
    lon2: float = Field(ge=-180.0, le=180.0, description="Eastern longitude edge (exclusive).")
    service: int = Field(ge=0, description="Service value served for this region, e.g., 427.")

    @model_validator(mode="after")
    def _check_edges(self) -> "RegionRecord":
        if not self.lat1 < self.lat2:
            raise ValueError(f"lat1 ({self.lat1}) must be below lat2 ({self.lat2})")
        if not self.lon1 < self.lon2:
            raise ValueError(f"long1 ({self.lon1}) must be below long2 ({self.lon2})")
        return self

    def contains(self, lat: float, lon: float) -> bool:
        """Half-open membership test in degrees."""
        return self.lat1 <= lat < self.lat2 and self.lon1 <= lon < self.lon2


class DatasetConfig(BaseModel):
    """
    A class representing the circuit dimensions derived from a region table.
    """

    model_config = ConfigDict(frozen=True)

    n_regions: int = Field(ge=0, description="Number of bounding boxes N.")
    m: int = Field(ge=1, description="Bit length of every service string.")
    format: FixedPointFormat = Field(
        default_factory=FixedPointFormat, description="Coordinate encoding."
    )
