from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, model_validator


class FixedPointFormat(BaseModel):
    """
    A class representing a signed two's-complement fixed-point format of l = int_bits + frac_bits bits.
    """

    model_config = ConfigDict(frozen=True)

    int_bits: int = Field(
        default=9, ge=0, description="Bits of the integer part, sign bit included."
    )
    frac_bits: int = Field(default=7, ge=0, description="Bits of the fractional part.")

    @model_validator(mode="after")
    def _check_width(self) -> "FixedPointFormat":
        if self.l < 2:
            raise ValueError(f"word length must be at least 2 bits, got {self.l}")
        if self.l > 64:
            raise ValueError(f"word length above 64 bits is not supported, got {self.l}")
        return self

    @property
    def l(self) -> int:  # noqa: E743
        return self.int_bits + self.frac_bits

    @property
    def scale(self) -> int:
        return 1 << self.frac_bits

    @property
    def min_int(self) -> int:
        return -(1 << (self.l - 1))

    @property
    def max_int(self) -> int:
        return (1 << (self.l - 1)) - 1

    @property
    def min_value(self) -> float:
        return self.min_int / self.scale

    @property
    def max_value(self) -> float:
        return self.max_int / self.scale

    @classmethod
    def for_length(cls, l: int, int_bits: int = 9) -> "FixedPointFormat":  # noqa: E741
        """A format of total length l keeping up to int_bits integer bits."""
        whole = min(int_bits, l)
        return cls(int_bits=whole, frac_bits=l - whole)


class GeoCoordinate(BaseModel):
    """
    A class representing a GPS position in decimal degrees.
    """

    model_config = ConfigDict(frozen=True)

    lat: float = Field(ge=-90.0, le=90.0, description="Latitude in degrees, e.g., 37.55.")
    lon: float = Field(
        ge=-180.0, le=180.0, description="Longitude in degrees, e.g., 127.0."
    )
