"""
Fixed-point encoding of coordinates and bit-by-bit word encryption.

Values are scaled by 2^frac_bits, rounded to the nearest integer with ties away
from zero, and stored as l-bit two's complement with index 0 the least
significant bit. Index l-1 is the sign bit.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence

from .errors import DimensionMismatchError, EncodingRangeError, EngineMismatchError
from .gate_engine import CipherBit, GateEngine
from .models.fixed_point import FixedPointFormat
from .models.params import TlweParams
from .torus_core import NoiseSampler, SecretKey, TlweSample

logger = logging.getLogger(__name__)

_WORD_HEADER = struct.Struct("<B")


@dataclass(frozen=True)
class PlainWord:
    """An l-bit two's-complement word, LSB first."""

    bits: tuple[int, ...]
    format: FixedPointFormat

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if len(bits) != self.format.l:
            raise DimensionMismatchError(
                f"word has {len(bits)} bits, format requires {self.format.l}"
            )
        if any(b not in (0, 1) for b in bits):
            raise ValueError("word bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_signed(cls, value: int, fmt: FixedPointFormat) -> "PlainWord":
        if not fmt.min_int <= value <= fmt.max_int:
            raise EncodingRangeError(
                f"{value} does not fit in {fmt.l}-bit two's complement"
            )
        raw = value & ((1 << fmt.l) - 1)
        return cls(bits=tuple((raw >> i) & 1 for i in range(fmt.l)), format=fmt)

    @property
    def unsigned(self) -> int:
        return sum(b << i for i, b in enumerate(self.bits))

    @property
    def signed(self) -> int:
        raw = self.unsigned
        return raw - (1 << self.format.l) if self.bits[-1] else raw

    def msb_first(self) -> str:
        return "".join(str(b) for b in reversed(self.bits))


@dataclass(frozen=True, eq=False)
class CipherWord:
    """An l-bit word encrypted bit by bit, LSB first."""

    bits: tuple[CipherBit, ...]
    format: FixedPointFormat

    def __post_init__(self):
        bits = tuple(self.bits)
        if len(bits) != self.format.l:
            raise DimensionMismatchError(
                f"cipher word has {len(bits)} bits, format requires {self.format.l}"
            )
        engines = {b.engine for b in bits}
        if len(engines) > 1:
            raise EngineMismatchError(f"cipher word mixes engines {sorted(engines)}")
        object.__setattr__(self, "bits", bits)

    @property
    def engine(self) -> str:
        return self.bits[0].engine

    def __len__(self) -> int:
        return len(self.bits)


def scale_to_int(v: float, fmt: FixedPointFormat) -> int:
    """round(v * 2^frac_bits), ties away from zero."""
    scaled = Decimal(repr(float(v))) * fmt.scale
    return int(scaled.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def encode_fixed(v: float, fmt: FixedPointFormat) -> PlainWord:
    k = scale_to_int(v, fmt)
    if not fmt.min_int <= k <= fmt.max_int:
        raise EncodingRangeError(
            f"{v} is outside the representable range [{fmt.min_value}, {fmt.max_value}]"
        )
    return PlainWord.from_signed(k, fmt)


def decode_fixed(w: PlainWord) -> float:
    return w.signed / w.format.scale


def encrypt_word(
    w: PlainWord, sk: SecretKey, sampler: NoiseSampler, engine: GateEngine
) -> CipherWord:
    return CipherWord(
        bits=tuple(engine.encrypt_bit(b, sk, sampler) for b in w.bits), format=w.format
    )


def decrypt_word(cw: CipherWord, sk: SecretKey) -> PlainWord:
    return PlainWord(bits=tuple(b.reveal(sk) for b in cw.bits), format=cw.format)


def trivial_word(w: PlainWord, engine: GateEngine) -> CipherWord:
    """Noiseless encryption of a public word, e.g. a server-side box edge."""
    return CipherWord(bits=tuple(engine.constant(b) for b in w.bits), format=w.format)


def word_nbytes(l: int, params: TlweParams) -> int:  # noqa: E741
    """Bytes of the l sample blocks of one word (the wire header adds one byte)."""
    return l * params.sample_nbytes


def samples_to_bytes(samples: Sequence[TlweSample]) -> bytes:
    return b"".join(s.to_bytes() for s in samples)


def samples_from_bytes(data: bytes, count: int, params: TlweParams) -> list[TlweSample]:
    size = params.sample_nbytes
    if len(data) != count * size:
        raise DimensionMismatchError(
            f"expected {count} samples ({count * size} bytes), got {len(data)} bytes"
        )
    return [TlweSample.from_bytes(data[i * size:(i + 1) * size], params.n) for i in range(count)]


def word_to_bytes(cw: CipherWord, engine: GateEngine, params: TlweParams) -> bytes:
    """u8 l, then l sample blocks, LSB first."""
    samples = [engine.to_sample(b, params) for b in cw.bits]
    return _WORD_HEADER.pack(len(cw)) + samples_to_bytes(samples)


def word_from_bytes(
    data: bytes, fmt: FixedPointFormat, engine: GateEngine, params: TlweParams
) -> CipherWord:
    if not data:
        raise DimensionMismatchError("empty cipher word")
    (l,) = _WORD_HEADER.unpack_from(data)  # noqa: E741
    if l != fmt.l:
        raise DimensionMismatchError(f"cipher word of length {l}, format requires {fmt.l}")
    samples = samples_from_bytes(data[_WORD_HEADER.size:], l, params)
    return CipherWord(bits=tuple(engine.from_sample(s) for s in samples), format=fmt)
