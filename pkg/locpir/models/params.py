from __future__ import annotations

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator


class SecurityLevel(str, Enum):
    """Named TLWE parameter sets."""

    SEC80 = "sec80"
    SEC128 = "sec128"
    CUSTOM = "custom"


# (n, sigma) per named level; sigma is a fraction of the torus.
STANDARD_LEVELS: dict[SecurityLevel, tuple[int, float]] = {
    SecurityLevel.SEC80: (540, 2.0**-20.2),
    SecurityLevel.SEC128: (630, 2.0**-13.8),
}


class TlweParams(BaseModel):
    """
    A class representing a TLWE parameter set.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(description="Mask dimension of a TLWE sample, e.g., 540.")
    sigma: float = Field(
        ge=0.0,
        description="Standard deviation of the Gaussian noise as a fraction of the torus.",
    )
    security_level: SecurityLevel = Field(
        default=SecurityLevel.CUSTOM,
        description="Named security level; anything that is not a standard set must be 'custom'.",
    )

    @model_validator(mode="after")
    def _check_level(self) -> "TlweParams":
        if self.n <= 0:
            raise ValueError(f"mask dimension must be positive, got n={self.n}")
        standard = STANDARD_LEVELS.get(self.security_level)
        if standard is not None and (self.n, self.sigma) != standard:
            raise ValueError(
                f"{self.security_level.value} requires n={standard[0]} and sigma={standard[1]!r}"
            )
        return self

    @classmethod
    def for_level(cls, level: SecurityLevel | str | int) -> "TlweParams":
        """Build a named parameter set from 'sec80', 'sec128', 80 or 128."""
        if isinstance(level, int) or (isinstance(level, str) and level.isdigit()):
            level = f"sec{int(level)}"
        level = SecurityLevel(level)
        if level not in STANDARD_LEVELS:
            raise ValueError(f"no standard parameters for level '{level.value}'")
        n, sigma = STANDARD_LEVELS[level]
        return cls(n=n, sigma=sigma, security_level=level)

    @classmethod
    def for_dimension(cls, n: int) -> "TlweParams":
        """Recover a named parameter set from its dimension."""
        for level, (level_n, _) in STANDARD_LEVELS.items():
            if level_n == n:
                return cls.for_level(level)
        raise ValueError(f"dimension {n} does not match a standard security level")

    @property
    def sample_nbytes(self) -> int:
        """Serialized size of one sample: n mask words plus the body, 4 bytes each."""
        return 4 * (self.n + 1)
