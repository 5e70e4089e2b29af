"""
Homomorphic circuits of the location-based PIR pipeline.

* ``hom_comp_s`` / ``hom_comp_le``: signed strict / non-strict comparison of two
  encrypted fixed-point words with a bit-serial XNOR/MUX chain.
* ``bitwise_and``: masks an encrypted service string with an encrypted flag.
* ``hom_add_xor``: XOR-accumulates masked services; correct when at most one is nonzero.
* ``preprocess_services``: turns plaintext service values into ciphertexts under the
  client's key by adding one client-supplied zero sample to each trivially encoded bit.
* ``locpir``: the full query circuit over N bounding boxes.

A bounding box is half-open: lat in [x1, x2) and lon in [y1, y2). Per region the
query costs 12l + 2m + 3 bootstrap units.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import repeat
from typing import Optional, Sequence

import numpy as np

from .codec import CipherWord
from .errors import (
    DimensionMismatchError,
    ParameterError,
    ServiceOverflowError,
    SheetReuseError,
)
from .gate_engine import CipherBit, GateCounter, GateEngine
from .models.params import TlweParams
from .torus_core import TlweSample, add_samples, encode_bit, trivial_sample
from .utils.stopwatch import Stopwatch

logger = logging.getLogger(__name__)

PHASES = ("comparison", "validation", "addxor")


@dataclass(frozen=True, eq=False)
class ServiceCiphertext:
    """An m-bit service string encrypted bit by bit, LSB first."""

    bits: tuple[CipherBit, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(self.bits))

    @property
    def m(self) -> int:
        return len(self.bits)

    def reveal(self, sk=None) -> int:
        return sum(b.reveal(sk) << j for j, b in enumerate(self.bits))


@dataclass(frozen=True, eq=False)
class EncodedRegion:
    """A bounding box as four trivially encrypted edge words plus its encrypted service."""

    x1: CipherWord
    x2: CipherWord
    y1: CipherWord
    y2: CipherWord
    service: ServiceCiphertext
    region_id: int = 0


class ZeroSampleSheet:
    """
    N x m fresh encryptions of zero supplied by the client.

    Each sample may be consumed once; a second use raises ``SheetReuseError``.
    """

    def __init__(self, samples: Sequence[Sequence[TlweSample]]):
        rows = [tuple(row) for row in samples]
        widths = {len(row) for row in rows}
        if len(widths) > 1:
            raise DimensionMismatchError(f"ragged zero-sample sheet, row widths {sorted(widths)}")
        self._samples = rows
        self.n_regions = len(rows)
        self.m = widths.pop() if widths else 0
        self.used = np.zeros((self.n_regions, self.m), dtype=bool)

    @classmethod
    def from_flat(cls, samples: Sequence[TlweSample], n_regions: int, m: int) -> "ZeroSampleSheet":
        """Rebuild a sheet from a region-major, bit-minor list."""
        if len(samples) != n_regions * m:
            raise DimensionMismatchError(
                f"sheet needs {n_regions * m} samples, got {len(samples)}"
            )
        return cls([samples[i * m:(i + 1) * m] for i in range(n_regions)])

    def flat(self) -> list[TlweSample]:
        return [s for row in self._samples for s in row]

    @property
    def is_fresh(self) -> bool:
        return not self.used.any()

    def take(self, i: int, j: int) -> TlweSample:
        if self.used[i, j]:
            raise SheetReuseError(f"zero sample ({i}, {j}) was already consumed")
        self.used[i, j] = True
        return self._samples[i][j]


def service_bits(value: int, m: int) -> list[int]:
    if value < 0 or value >= 1 << m:
        raise ServiceOverflowError(f"service {value} does not fit in {m} bits")
    return [(value >> j) & 1 for j in range(m)]


def preprocess_services(
    service_values: Sequence[int],
    sheet: ZeroSampleSheet,
    m: int,
    engine: GateEngine,
    params: TlweParams,
) -> list[ServiceCiphertext]:
    """Encrypt service i, bit j, as trivial(encode(bit)) + zero sample (i, j)."""
    if not sheet.is_fresh:
        raise SheetReuseError("the zero-sample sheet has already been used")
    if sheet.n_regions != len(service_values) or (service_values and sheet.m != m):
        raise DimensionMismatchError(
            f"sheet is {sheet.n_regions}x{sheet.m}, services need {len(service_values)}x{m}"
        )
    plain = [service_bits(v, m) for v in service_values]
    services = []
    for i, bits in enumerate(plain):
        encrypted = []
        for j, bit in enumerate(bits):
            sample = add_samples(trivial_sample(encode_bit(bit), params), sheet.take(i, j))
            encrypted.append(engine.from_sample(sample))
        services.append(ServiceCiphertext(bits=tuple(encrypted)))
    logger.debug("Preprocessed %d services of %d bits", len(services), m)
    return services


def _check_words(c1: CipherWord, c2: CipherWord) -> None:
    if len(c1) != len(c2) or c1.format != c2.format:
        raise DimensionMismatchError(
            f"cannot compare words of formats {c1.format} and {c2.format}"
        )


def hom_comp_unsigned(
    b1: Sequence[CipherBit], b2: Sequence[CipherBit], engine: GateEngine
) -> CipherBit:
    """Unsigned bit-serial less-than, LSB to MSB; the output is decided by the MSDP."""
    t0 = engine.constant(0)
    for x, y in zip(b1, b2):
        t1 = engine.hom_xnor(x, y)
        t0 = engine.hom_mux(t1, t0, y)
    return t0


def flip_sign(cw: CipherWord, engine: GateEngine) -> list[CipherBit]:
    bits = list(cw.bits)
    bits[-1] = engine.hom_not(bits[-1])
    return bits


def hom_comp_s(c1: CipherWord, c2: CipherWord, engine: GateEngine) -> CipherBit:
    """Enc(1) iff signed(c1) < signed(c2); costs l XNOR + l MUX."""
    _check_words(c1, c2)
    return hom_comp_unsigned(flip_sign(c1, engine), flip_sign(c2, engine), engine)


def hom_comp_le(c1: CipherWord, c2: CipherWord, engine: GateEngine) -> CipherBit:
    """Enc(1) iff signed(c1) <= signed(c2), as NOT(c2 < c1)."""
    return engine.hom_not(hom_comp_s(c2, c1, engine))


def bitwise_and(flag: CipherBit, s: ServiceCiphertext, engine: GateEngine) -> ServiceCiphertext:
    return ServiceCiphertext(bits=tuple(engine.hom_and(flag, bit) for bit in s.bits))


def hom_add_xor(
    services: Sequence[ServiceCiphertext], engine: GateEngine, m: Optional[int] = None
) -> ServiceCiphertext:
    """XOR-accumulate services into an Enc(0) accumulator; costs N*m XOR."""
    if m is None:
        if not services:
            raise ParameterError("the service length m is required when there are no services")
        m = services[0].m
    if any(s.m != m for s in services):
        raise DimensionMismatchError("all services must have the same length")
    acc = [engine.constant(0) for _ in range(m)]
    for s in services:
        acc = [engine.hom_xor(a, b) for a, b in zip(acc, s.bits)]
    return ServiceCiphertext(bits=tuple(acc))


def region_flag(
    enc_x: CipherWord, enc_y: CipherWord, region: EncodedRegion, engine: GateEngine
) -> CipherBit:
    """Enc(1) iff (x, y) lies in the region's half-open box."""
    x_l, x_r, y_l, y_r = compare_region(enc_x, enc_y, region, engine)
    return validate_flags((x_l, x_r, y_l, y_r), engine)


def compare_region(
    enc_x: CipherWord, enc_y: CipherWord, region: EncodedRegion, engine: GateEngine
) -> tuple[CipherBit, CipherBit, CipherBit, CipherBit]:
    x_l = hom_comp_le(region.x1, enc_x, engine)
    x_r = hom_comp_s(enc_x, region.x2, engine)
    y_l = hom_comp_le(region.y1, enc_y, engine)
    y_r = hom_comp_s(enc_y, region.y2, engine)
    return x_l, x_r, y_l, y_r


def validate_flags(flags: tuple[CipherBit, ...], engine: GateEngine) -> CipherBit:
    x_l, x_r, y_l, y_r = flags
    v1 = engine.hom_and(x_l, x_r)
    v2 = engine.hom_and(y_l, y_r)
    return engine.hom_and(v1, v2)


def mask_service(
    flags: tuple[CipherBit, ...], region: EncodedRegion, engine: GateEngine
) -> ServiceCiphertext:
    return bitwise_and(validate_flags(flags, engine), region.service, engine)


@dataclass
class LocPirResult:
    """The output of one query with its gate counts and per-phase wall clock."""

    service: ServiceCiphertext
    counter: GateCounter
    wall_ms: dict[str, float] = field(default_factory=dict)

    @property
    def phase_units(self) -> dict[str, int]:
        counts = self.counter.snapshot()
        return {
            "comparison": counts["xnor"] + 2 * counts["mux"],
            "validation": counts["and"],
            "addxor": counts["xor"],
        }


def evaluate_locpir(
    enc_x: CipherWord,
    enc_y: CipherWord,
    regions: Sequence[EncodedRegion],
    engine: GateEngine,
    workers: int = 1,
    m: Optional[int] = None,
) -> LocPirResult:
    """
    Run the query circuit with per-region work fanned out to ``workers`` threads.

    Every region evaluates on its own engine fork (own noise stream, own counter
    shard), so decrypted results and gate counts do not depend on ``workers``.
    Shards are summed into ``engine.counter`` when the query completes.
    """
    if workers < 1:
        raise ParameterError(f"worker count must be positive, got {workers}")
    if enc_x.engine != engine.tag or enc_y.engine != engine.tag:
        raise ParameterError("query words were not produced for this engine")
    if regions:
        lengths = {r.service.m for r in regions}
        if len(lengths) != 1 or (m is not None and lengths != {m}):
            raise DimensionMismatchError(f"inconsistent service lengths {sorted(lengths)}")
        m = lengths.pop()
        for r in regions:
            _check_words(r.x1, enc_x)
            _check_words(r.y1, enc_y)

    shards = [GateCounter() for _ in regions]
    forks = [engine.fork(i, counter=shard) for i, shard in enumerate(shards)]
    stopwatch = Stopwatch()

    with ThreadPoolExecutor(max_workers=workers) as executor:
        with stopwatch.lap("comparison"):
            flags = list(
                executor.map(compare_region, repeat(enc_x), repeat(enc_y), regions, forks)
            )
        with stopwatch.lap("validation"):
            masked = list(executor.map(mask_service, flags, regions, forks))

    acc_shard = GateCounter()
    with stopwatch.lap("addxor"):
        out = hom_add_xor(masked, engine.fork(len(regions), counter=acc_shard), m=m)

    query_counter = GateCounter()
    query_counter.merge(*shards, acc_shard)
    engine.counter.merge(query_counter)

    result = LocPirResult(
        service=out,
        counter=query_counter,
        wall_ms={phase: stopwatch.lap_ms(phase) for phase in PHASES},
    )
    logger.debug(
        "LocPIR over %d regions: %d units, %s",
        len(regions),
        query_counter.bootstrap_units,
        {k: round(v, 1) for k, v in result.wall_ms.items()},
    )
    return result


def locpir(
    enc_x: CipherWord,
    enc_y: CipherWord,
    regions: Sequence[EncodedRegion],
    engine: GateEngine,
    workers: int = 1,
    m: Optional[int] = None,
) -> ServiceCiphertext:
    return evaluate_locpir(enc_x, enc_y, regions, engine, workers=workers, m=m).service
