from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .params import SecurityLevel

CSV_COLUMNS = (
    "params",
    "N",
    "l",
    "m",
    "n_t",
    "engine",
    "comparison_units",
    "validation_units",
    "addxor_units",
    "total_units",
    "comparison_ms",
    "validation_ms",
    "addxor_ms",
    "total_ms",
)


class BenchConfig(BaseModel):
    """
    A class representing one benchmark sweep over (security, N, l, m, n_t).
    """

    model_config = ConfigDict(frozen=True)

    security: list[SecurityLevel] = Field(
        default=[SecurityLevel.SEC80], description="Parameter sets to sweep."
    )
    n_regions: list[int] = Field(default=[9], description="Values of N.")
    lengths: list[int] = Field(default=[16], description="Values of l.")
    service_bits: list[int] = Field(default=[9], description="Values of m.")
    threads: list[int] = Field(default=[1], description="Worker counts n_t.")
    engine: str = Field(default="clear", description="'clear' or 'tlwe-oracle'.")
    per_gate_delay_ms: float = Field(
        default=0.0, ge=0.0, description="Simulated milliseconds per bootstrap unit."
    )
    realize_delay: bool = Field(
        default=False,
        description="Sleep for the simulated delay inside gates and report measured wall clock.",
    )
    seed: Optional[int] = Field(default=None, description="Seed for keys, noise and datasets.")

    @field_validator("n_regions", "lengths", "service_bits", "threads", "security")
    @classmethod
    def _non_empty(cls, value: list) -> list:
        if not value:
            raise ValueError("sweep ranges must not be empty")
        return value

    @field_validator("n_regions", "service_bits", "threads")
    @classmethod
    def _positive(cls, value: list[int]) -> list[int]:
        if any(v < 1 for v in value):
            raise ValueError(f"values must be positive, got {value}")
        return value

    @field_validator("lengths")
    @classmethod
    def _lengths(cls, value: list[int]) -> list[int]:
        if any(v < 8 for v in value):
            raise ValueError(f"sweep lengths must be at least 8 bits, got {value}")
        return value


class PhaseReport(BaseModel):
    """
    A class representing the cost of one LocPIR evaluation split into the
    comparison, validation and HomAddXOR phases.
    """

    params: str
    n_regions: int
    l: int  # noqa: E741
    m: int
    n_t: int
    engine: str
    comparison_units: int
    validation_units: int
    addxor_units: int
    comparison_ms: float
    validation_ms: float
    addxor_ms: float
    wall_comparison_ms: float = 0.0
    wall_validation_ms: float = 0.0
    wall_addxor_ms: float = 0.0
    encrypt_ms: float = Field(default=0.0, description="Client time to encrypt both coordinates.")
    decrypt_ms: float = Field(default=0.0, description="Client time to decrypt the service.")
    result: Optional[int] = Field(default=None, description="Decrypted query result.")

    @property
    def total_units(self) -> int:
        return self.comparison_units + self.validation_units + self.addxor_units

    @property
    def total_ms(self) -> float:
        return self.comparison_ms + self.validation_ms + self.addxor_ms

    @property
    def wall_total_ms(self) -> float:
        return self.wall_comparison_ms + self.wall_validation_ms + self.wall_addxor_ms

    def to_row(self) -> dict:
        """The fixed CSV row for this report."""
        return {
            "params": self.params,
            "N": self.n_regions,
            "l": self.l,
            "m": self.m,
            "n_t": self.n_t,
            "engine": self.engine,
            "comparison_units": self.comparison_units,
            "validation_units": self.validation_units,
            "addxor_units": self.addxor_units,
            "total_units": self.total_units,
            "comparison_ms": round(self.comparison_ms, 3),
            "validation_ms": round(self.validation_ms, 3),
            "addxor_ms": round(self.addxor_ms, 3),
            "total_ms": round(self.total_ms, 3),
        }
