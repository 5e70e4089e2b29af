"""
TLWE bit encryption over the 32-bit discretized torus.

A torus element x/2^32 is stored as the unsigned 32-bit word x, so addition,
negation and small-integer scaling are exact modulo 2^32. Bits are encoded as
-1/8 (bit 0) and +1/8 (bit 1). A sample (a, b) satisfies b = <a, s> + mu + e and its
phase b - <a, s> is the noisy plaintext.

All randomness comes from a seedable ``NoiseSampler``; identical seeds reproduce
identical keys and ciphertexts.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import DimensionMismatchError, ParameterError
from .models.params import TlweParams

logger = logging.getLogger(__name__)

TORUS_BITS = 32
TORUS_MODULUS = 1 << TORUS_BITS
WORD_MASK = TORUS_MODULUS - 1
HALF = 1 << (TORUS_BITS - 1)

# 1/8 and -1/8 on the torus
MU_ONE = 0x20000000
MU_ZERO = 0xE0000000

MAX_SCALE = 4

KEY_MAGIC = b"LPSK"
KEY_VERSION = 1
_KEY_HEADER = struct.Struct("<4sHI")
# Spawn key of the stream keygen draws from; worker streams use small ids.
KEY_STREAM = 0x4B4559


@dataclass(frozen=True)
class TorusElement:
    """An element of R/Z stored as a 32-bit word."""

    value: int

    def __post_init__(self):
        object.__setattr__(self, "value", int(self.value) & WORD_MASK)

    @classmethod
    def from_fraction(cls, x: float) -> "TorusElement":
        """Round x (taken modulo 1) to the nearest multiple of 2^-32."""
        return cls(int(round(x * TORUS_MODULUS)))

    @property
    def signed(self) -> int:
        """The word as a signed integer in [-2^31, 2^31)."""
        return self.value - TORUS_MODULUS if self.value >= HALF else self.value

    def to_fraction(self) -> float:
        """Signed fraction in [-1/2, 1/2)."""
        return self.signed / TORUS_MODULUS

    def __add__(self, other: "TorusElement") -> "TorusElement":
        return TorusElement(self.value + other.value)

    def __sub__(self, other: "TorusElement") -> "TorusElement":
        return TorusElement(self.value - other.value)

    def __neg__(self) -> "TorusElement":
        return TorusElement(-self.value)

    def __mul__(self, k: int) -> "TorusElement":
        return TorusElement(self.value * int(k))

    __rmul__ = __mul__


def encode_bit(m: int) -> TorusElement:
    """f(m) = m/4 - 1/8."""
    if m not in (0, 1):
        raise ParameterError(f"plaintext must be a bit, got {m!r}")
    return TorusElement(MU_ONE if m else MU_ZERO)


def _as_words(values) -> np.ndarray:
    return np.asarray(values, dtype=np.int64).astype(np.uint32)


class NoiseSampler:
    """
    Seeded source of uniform masks, key bits and rounded Gaussian noise.

    Each worker owns its own sampler; ``spawn`` derives independent child streams
    from the same seed so results do not depend on how work is scheduled.
    """

    def __init__(self, sigma: float, seed: Optional[int] = None, *, _seed_seq=None):
        if sigma < 0:
            raise ParameterError(f"sigma must be non-negative, got {sigma}")
        self.sigma = float(sigma)
        self._seed_seq = _seed_seq if _seed_seq is not None else np.random.SeedSequence(seed)
        self.rng = np.random.default_rng(self._seed_seq)

    @classmethod
    def for_params(cls, params: TlweParams, seed: Optional[int] = None) -> "NoiseSampler":
        return cls(params.sigma, seed)

    @property
    def seed(self) -> int:
        return self._seed_seq.entropy

    def spawn(self, stream_id: int) -> "NoiseSampler":
        """An independent sampler for worker stream ``stream_id``."""
        child = np.random.SeedSequence(
            self._seed_seq.entropy,
            spawn_key=tuple(self._seed_seq.spawn_key) + (int(stream_id),),
        )
        return NoiseSampler(self.sigma, _seed_seq=child)

    def gaussian(self, size: Optional[int] = None) -> np.ndarray:
        """Draws of N(0, sigma) rounded to multiples of 2^-32, as 32-bit words."""
        draws = self.rng.normal(0.0, self.sigma, size=size) if self.sigma else np.zeros(size or ())
        return _as_words(np.rint(np.asarray(draws) * TORUS_MODULUS))

    def uniform_mask(self, n: int) -> np.ndarray:
        return self.rng.integers(0, TORUS_MODULUS, size=n, dtype=np.uint32)

    def key_bits(self, n: int) -> np.ndarray:
        return self.rng.integers(0, 2, size=n, dtype=np.uint8)


@dataclass(frozen=True, eq=False)
class SecretKey:
    """A binary TLWE secret key."""

    bits: np.ndarray
    params: TlweParams

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.shape != (self.params.n,):
            raise DimensionMismatchError(
                f"key has {bits.size} bits but params require n={self.params.n}"
            )
        if np.any(bits > 1):
            raise ParameterError("secret key entries must be 0 or 1")
        bits = bits.copy()
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "_selector", bits.astype(bool))

    @property
    def n(self) -> int:
        return self.params.n

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SecretKey)
            and self.params == other.params
            and np.array_equal(self.bits, other.bits)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"SecretKey(n={self.n}, level={self.params.security_level.value})"

    def to_bytes(self) -> bytes:
        """LPSK key file: magic, version u16, n u32, then packed key bits (LSB first)."""
        packed = np.packbits(self.bits, bitorder="little").tobytes()
        return _KEY_HEADER.pack(KEY_MAGIC, KEY_VERSION, self.n) + packed

    @classmethod
    def from_bytes(cls, data: bytes, params: Optional[TlweParams] = None) -> "SecretKey":
        if len(data) < _KEY_HEADER.size:
            raise ValueError("key file is truncated")
        magic, version, n = _KEY_HEADER.unpack_from(data)
        if magic != KEY_MAGIC:
            raise ValueError(f"not a secret key file (magic {magic!r})")
        if version != KEY_VERSION:
            raise ValueError(f"unsupported key file version {version}")
        body = data[_KEY_HEADER.size:]
        if len(body) != (n + 7) // 8:
            raise ValueError(f"key file holds {len(body)} bytes of bits, expected {(n + 7) // 8}")
        if params is None:
            params = TlweParams.for_dimension(n)
        elif params.n != n:
            raise DimensionMismatchError(f"key file has n={n}, params require n={params.n}")
        bits = np.unpackbits(np.frombuffer(body, dtype=np.uint8), bitorder="little")[:n]
        return cls(bits=bits, params=params)

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_bytes(self.to_bytes())
        logger.info("Secret key written to %s", path)

    @classmethod
    def load(cls, path: Union[str, Path], params: Optional[TlweParams] = None) -> "SecretKey":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Key file not found: {path}")
        return cls.from_bytes(path.read_bytes(), params)


@dataclass(frozen=True, eq=False)
class TlweSample:
    """One TLWE ciphertext: mask vector a and body b."""

    mask: np.ndarray
    body: int

    def __post_init__(self):
        mask = np.asarray(self.mask)
        if mask.dtype != np.uint32:
            mask = _as_words(mask)
        if mask.flags.writeable:
            mask = mask.copy()
            mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "body", int(self.body) & WORD_MASK)

    @property
    def n(self) -> int:
        return int(self.mask.size)

    @property
    def is_trivial(self) -> bool:
        return not self.mask.any()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TlweSample)
            and self.body == other.body
            and np.array_equal(self.mask, other.mask)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"TlweSample(n={self.n}, body=0x{self.body:08x}, trivial={self.is_trivial})"

    def __add__(self, other: "TlweSample") -> "TlweSample":
        return add_samples(self, other)

    def __sub__(self, other: "TlweSample") -> "TlweSample":
        return add_samples(self, neg_sample(other))

    def __neg__(self) -> "TlweSample":
        return neg_sample(self)

    def to_bytes(self) -> bytes:
        """n+1 little-endian 32-bit words, mask first, body last."""
        words = np.empty(self.n + 1, dtype="<u4")
        words[:-1] = self.mask
        words[-1] = self.body
        return words.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, n: int) -> "TlweSample":
        if len(data) != 4 * (n + 1):
            raise DimensionMismatchError(
                f"sample block of {len(data)} bytes does not match n={n}"
            )
        words = np.frombuffer(data, dtype="<u4").astype(np.uint32)
        return cls(mask=words[:-1], body=int(words[-1]))


def _check_dimension(n1: int, n2: int) -> None:
    if n1 != n2:
        raise DimensionMismatchError(f"dimension mismatch: {n1} != {n2}")


def keygen(params: TlweParams, seed: Optional[int] = None) -> SecretKey:
    """
    Draw n uniform key bits from a generator seeded with ``seed``.

    The bits come from the seed's ``KEY_STREAM`` child, so an encryption sampler
    built from the same seed never reproduces them in its masks.
    """
    if params.n <= 0:
        raise ParameterError(f"mask dimension must be positive, got n={params.n}")
    sampler = NoiseSampler(params.sigma, seed).spawn(KEY_STREAM)
    key = SecretKey(bits=sampler.key_bits(params.n), params=params)
    logger.debug("Generated %s", key)
    return key


def encrypt_torus(
    mu: TorusElement,
    sk: SecretKey,
    sampler: NoiseSampler,
    mask: Optional[np.ndarray] = None,
) -> TlweSample:
    """Encrypt an arbitrary torus message: b = <a, s> + mu + e."""
    if mask is None:
        mask = sampler.uniform_mask(sk.n)
    else:
        mask = _as_words(mask)
        _check_dimension(mask.size, sk.n)
    noise = int(sampler.gaussian())
    body = _dot(mask, sk) + mu.value + noise
    return TlweSample(mask=mask, body=body)


def encrypt_bit(
    m: int, sk: SecretKey, sampler: NoiseSampler, mask: Optional[np.ndarray] = None
) -> TlweSample:
    return encrypt_torus(encode_bit(m), sk, sampler, mask)


def encrypt_zero(sk: SecretKey, sampler: NoiseSampler) -> TlweSample:
    """A fresh encryption of the torus value 0 (phase equals the noise)."""
    return encrypt_torus(TorusElement(0), sk, sampler)


def encrypt_bits(bits: Iterable[int], sk: SecretKey, sampler: NoiseSampler) -> list[TlweSample]:
    return [encrypt_bit(b, sk, sampler) for b in bits]


def _dot(mask: np.ndarray, sk: SecretKey) -> int:
    return int(mask[sk._selector].sum(dtype=np.uint64)) & WORD_MASK


def phase(ct: TlweSample, sk: SecretKey) -> TorusElement:
    """b - <a, s>, exact modulo 2^32."""
    _check_dimension(ct.n, sk.n)
    return TorusElement(ct.body - _dot(ct.mask, sk))


def decode_phase(mu: TorusElement) -> int:
    """1 iff the phase lies in [0, 1/2]; a phase of exactly 0 decodes to 1."""
    return 1 if mu.value <= HALF else 0


def decrypt_bit(ct: TlweSample, sk: SecretKey) -> int:
    return decode_phase(phase(ct, sk))


def decrypt_bits(cts: Sequence[TlweSample], sk: SecretKey) -> list[int]:
    return [decrypt_bit(ct, sk) for ct in cts]


def trivial_sample(mu: TorusElement, params: TlweParams) -> TlweSample:
    """Noiseless sample (0, mu); its phase is mu under every key."""
    return TlweSample(mask=np.zeros(params.n, dtype=np.uint32), body=mu.value)


def add_samples(*samples: TlweSample) -> TlweSample:
    if not samples:
        raise ValueError("add_samples needs at least one sample")
    first = samples[0]
    mask = first.mask.copy()
    body = first.body
    for ct in samples[1:]:
        _check_dimension(first.n, ct.n)
        mask += ct.mask
        body += ct.body
    return TlweSample(mask=mask, body=body)


def neg_sample(c: TlweSample) -> TlweSample:
    return TlweSample(mask=np.negative(c.mask), body=-c.body)


def scale_sample(k: int, c: TlweSample) -> TlweSample:
    if abs(k) > MAX_SCALE:
        raise ParameterError(f"scale factor must satisfy |k| <= {MAX_SCALE}, got {k}")
    factor = np.uint32(k & WORD_MASK)
    return TlweSample(mask=c.mask * factor, body=c.body * k)
