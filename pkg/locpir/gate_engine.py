"""
Boolean gate evaluation over encrypted bits.

``GateEngine`` is the contract every circuit in locpir is written against. Two
implementations are provided:

* ``ClearEngine`` ("clear") evaluates gates on plain bits. It runs no
  cryptography and is used as the plaintext oracle and for gate-count benchmarks.
* ``TlweOracleEngine`` ("tlwe-oracle") evaluates gates on TLWE samples using the
  affine pre-gate forms of gate bootstrapping. The bootstrap itself is a
  functional stand-in that holds the secret key and re-encrypts the sign of the
  phase with fresh noise. It reproduces the semantics and noise reset of gate
  bootstrapping and is NOT secure: anyone holding the engine can decrypt. A real
  bootstrapping backend plugs in by overriding ``TlweOracleEngine._bootstrap``.

Both engines keep identical gate counters. One bootstrap unit is charged per
two-input gate, two per MUX, none per NOT.
"""

from __future__ import annotations

import logging
import threading
import time
from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import ClassVar, Optional, Union

from .errors import EngineMismatchError, NoiseBudgetError, ParameterError
from .models.params import TlweParams
from .torus_core import (
    HALF,
    NoiseSampler,
    SecretKey,
    TlweSample,
    TorusElement,
    add_samples,
    decode_phase,
    decrypt_bit,
    encode_bit,
    encrypt_bit,
    encrypt_zero,
    neg_sample,
    phase,
    scale_sample,
    trivial_sample,
)

logger = logging.getLogger(__name__)

# Minimum distance of a pre-bootstrap phase from 0 when inputs carry noise below 1/32.
NOISE_MARGIN = TorusElement.from_fraction(1 / 16).value


class GateKind(str, Enum):
    AND = "and"
    OR = "or"
    XOR = "xor"
    XNOR = "xnor"
    NOT = "not"
    MUX = "mux"


UNIT_COST: dict[GateKind, int] = {
    GateKind.AND: 1,
    GateKind.OR: 1,
    GateKind.XOR: 1,
    GateKind.XNOR: 1,
    GateKind.NOT: 0,
    GateKind.MUX: 2,
}


class GateCounter:
    """
    Thread-safe per-kind gate counts.

    Workers may share one counter, or each keep a shard that is summed with ``merge``.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._counts: Counter = Counter()

    def record(self, kind: GateKind, times: int = 1) -> None:
        with self._lock:
            self._counts[GateKind(kind)] += times

    def merge(self, *shards: "GateCounter") -> None:
        for shard in shards:
            snapshot = shard._copy()
            with self._lock:
                self._counts.update(snapshot)

    def _copy(self) -> Counter:
        with self._lock:
            return Counter(self._counts)

    def count(self, kind: GateKind) -> int:
        with self._lock:
            return self._counts[GateKind(kind)]

    @property
    def bootstrap_units(self) -> int:
        counts = self._copy()
        return sum(UNIT_COST[kind] * n for kind, n in counts.items())

    def reset(self) -> None:
        with self._lock:
            self._counts.clear()

    def snapshot(self) -> dict[str, int]:
        """Flat name -> count map, plus the bootstrap unit total."""
        counts = self._copy()
        flat = {kind.value: counts[kind] for kind in GateKind}
        flat["bootstrap_units"] = sum(UNIT_COST[k] * n for k, n in counts.items())
        return flat

    def __repr__(self) -> str:
        return f"GateCounter({self.snapshot()})"


@dataclass(frozen=True, eq=False)
class CipherBit:
    """An encrypted bit: a TLWE sample for "tlwe-oracle", a plain int for "clear"."""

    payload: Union[TlweSample, int]
    engine: str

    def reveal(self, sk: Optional[SecretKey] = None) -> int:
        """Decrypt (or, for clear bits, read) the plaintext bit."""
        if isinstance(self.payload, TlweSample):
            if sk is None:
                raise ParameterError("a secret key is required to decrypt a TLWE bit")
            return decrypt_bit(self.payload, sk)
        return int(self.payload)


def bootstrap_oracle(c: TlweSample, sk: SecretKey, sampler: NoiseSampler) -> TlweSample:
    """
    Functional stand-in for gate bootstrapping.

    Returns a fresh encryption of 1/8 when the phase of ``c`` lies in (0, 1/2],
    of -1/8 otherwise. Output noise is fresh and independent of the input noise.
    """
    mu = phase(c, sk).value
    return encrypt_bit(1 if 0 < mu <= HALF else 0, sk, sampler)


class GateEngine(ABC):
    """
    The gate evaluation contract.

    Public gate methods check operand engines, charge the counter, optionally
    sleep for a simulated per-unit delay, and delegate to the implementation.
    """

    tag: ClassVar[str]

    def __init__(
        self,
        *,
        counter: Optional[GateCounter] = None,
        gate_delay_ms: float = 0.0,
    ):
        if gate_delay_ms < 0:
            raise ParameterError(f"gate delay must be non-negative, got {gate_delay_ms}")
        self.counter = counter if counter is not None else GateCounter()
        self.gate_delay_ms = float(gate_delay_ms)

    # -- construction of bits -------------------------------------------------

    @abstractmethod
    def constant(self, bit: int) -> CipherBit:
        """A noiseless encryption of a public constant; free of charge."""

    @abstractmethod
    def encrypt_bit(self, bit: int, sk: SecretKey, sampler: NoiseSampler) -> CipherBit:
        """Client-side encryption of one bit in this engine's representation."""

    @abstractmethod
    def zero_sample(self, sk: SecretKey, sampler: NoiseSampler) -> TlweSample:
        """A wire sample encrypting the torus value 0, used for preprocessing sheets."""

    @abstractmethod
    def to_sample(self, bit: CipherBit, params: TlweParams) -> TlweSample:
        """Wire representation of a bit."""

    @abstractmethod
    def from_sample(self, sample: TlweSample) -> CipherBit:
        """Inverse of ``to_sample``."""

    @abstractmethod
    def fork(self, stream_id: int, counter: Optional[GateCounter] = None) -> "GateEngine":
        """A worker view with its own randomness stream and, optionally, its own counter shard."""

    def decrypt_bit(self, bit: CipherBit, sk: Optional[SecretKey] = None) -> int:
        self._check(bit)
        return bit.reveal(sk)

    # -- gates ----------------------------------------------------------------

    def hom_and(self, a: CipherBit, b: CipherBit) -> CipherBit:
        self._check(a, b)
        self._charge(GateKind.AND)
        return self._and(a, b)

    def hom_or(self, a: CipherBit, b: CipherBit) -> CipherBit:
        self._check(a, b)
        self._charge(GateKind.OR)
        return self._or(a, b)

    def hom_xor(self, a: CipherBit, b: CipherBit) -> CipherBit:
        self._check(a, b)
        self._charge(GateKind.XOR)
        return self._xor(a, b)

    def hom_xnor(self, a: CipherBit, b: CipherBit) -> CipherBit:
        self._check(a, b)
        self._charge(GateKind.XNOR)
        return self._xnor(a, b)

    def hom_not(self, a: CipherBit) -> CipherBit:
        self._check(a)
        self._charge(GateKind.NOT)
        return self._not(a)

    def hom_mux(self, sel: CipherBit, a: CipherBit, b: CipherBit) -> CipherBit:
        """``a`` if ``sel`` is 1, else ``b``."""
        self._check(sel, a, b)
        self._charge(GateKind.MUX)
        return self._mux(sel, a, b)

    @abstractmethod
    def _and(self, a: CipherBit, b: CipherBit) -> CipherBit: ...

    @abstractmethod
    def _or(self, a: CipherBit, b: CipherBit) -> CipherBit: ...

    @abstractmethod
    def _xor(self, a: CipherBit, b: CipherBit) -> CipherBit: ...

    @abstractmethod
    def _xnor(self, a: CipherBit, b: CipherBit) -> CipherBit: ...

    @abstractmethod
    def _not(self, a: CipherBit) -> CipherBit: ...

    @abstractmethod
    def _mux(self, sel: CipherBit, a: CipherBit, b: CipherBit) -> CipherBit: ...

    # -- helpers ----------------------------------------------------------------

    def _check(self, *bits: CipherBit) -> None:
        for bit in bits:
            if not isinstance(bit, CipherBit) or bit.engine != self.tag:
                owner = bit.engine if isinstance(bit, CipherBit) else type(bit).__name__
                raise EngineMismatchError(
                    f"operand belongs to '{owner}', engine is '{self.tag}'"
                )

    def _charge(self, kind: GateKind) -> None:
        self.counter.record(kind)
        units = UNIT_COST[kind]
        if units and self.gate_delay_ms:
            time.sleep(self.gate_delay_ms * units / 1000.0)

    def _wrap(self, payload) -> CipherBit:
        return CipherBit(payload=payload, engine=self.tag)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(units={self.counter.bootstrap_units})"


class ClearEngine(GateEngine):
    """Plaintext oracle engine; bits travel on the wire as trivial samples."""

    tag = "clear"

    def constant(self, bit: int) -> CipherBit:
        if bit not in (0, 1):
            raise ParameterError(f"plaintext must be a bit, got {bit!r}")
        return self._wrap(int(bit))

    def encrypt_bit(self, bit: int, sk: Optional[SecretKey] = None, sampler=None) -> CipherBit:
        return self.constant(bit)

    def zero_sample(self, sk: SecretKey, sampler: Optional[NoiseSampler] = None) -> TlweSample:
        return trivial_sample(TorusElement(0), sk.params)

    def to_sample(self, bit: CipherBit, params: TlweParams) -> TlweSample:
        self._check(bit)
        return trivial_sample(encode_bit(bit.payload), params)

    def from_sample(self, sample: TlweSample) -> CipherBit:
        if not sample.is_trivial:
            raise ParameterError("the clear engine only accepts trivial samples")
        return self._wrap(decode_phase(TorusElement(sample.body)))

    def fork(self, stream_id: int, counter: Optional[GateCounter] = None) -> "ClearEngine":
        return ClearEngine(
            counter=counter if counter is not None else self.counter,
            gate_delay_ms=self.gate_delay_ms,
        )

    def _and(self, a, b):
        return self._wrap(a.payload & b.payload)

    def _or(self, a, b):
        return self._wrap(a.payload | b.payload)

    def _xor(self, a, b):
        return self._wrap(a.payload ^ b.payload)

    def _xnor(self, a, b):
        return self._wrap(1 ^ a.payload ^ b.payload)

    def _not(self, a):
        return self._wrap(1 ^ a.payload)

    def _mux(self, sel, a, b):
        return self._wrap(a.payload if sel.payload else b.payload)


class TlweOracleEngine(GateEngine):
    """
    TLWE gate engine with a secret-key refresh oracle in place of bootstrapping.

    INSECURE FOR DEPLOYMENT: the engine holds the client's secret key.
    """

    tag = "tlwe-oracle"

    def __init__(
        self,
        sk: SecretKey,
        sampler: Optional[NoiseSampler] = None,
        *,
        counter: Optional[GateCounter] = None,
        gate_delay_ms: float = 0.0,
        debug: bool = False,
    ):
        super().__init__(counter=counter, gate_delay_ms=gate_delay_ms)
        self.sk = sk
        self.params = sk.params
        self.sampler = sampler if sampler is not None else NoiseSampler.for_params(sk.params)
        self.debug = debug
        self._minus_eighth = trivial_sample(encode_bit(0), self.params)
        self._plus_eighth = trivial_sample(encode_bit(1), self.params)
        self._plus_quarter = trivial_sample(TorusElement.from_fraction(1 / 4), self.params)
        self._minus_quarter = trivial_sample(TorusElement.from_fraction(-1 / 4), self.params)

    def constant(self, bit: int) -> CipherBit:
        return self._wrap(trivial_sample(encode_bit(bit), self.params))

    def encrypt_bit(self, bit: int, sk: SecretKey, sampler: NoiseSampler) -> CipherBit:
        return self._wrap(encrypt_bit(bit, sk, sampler))

    def zero_sample(self, sk: SecretKey, sampler: NoiseSampler) -> TlweSample:
        return encrypt_zero(sk, sampler)

    def to_sample(self, bit: CipherBit, params: TlweParams) -> TlweSample:
        self._check(bit)
        return bit.payload

    def from_sample(self, sample: TlweSample) -> CipherBit:
        if sample.n != self.params.n:
            raise ParameterError(f"sample dimension {sample.n} != engine dimension {self.params.n}")
        return self._wrap(sample)

    def fork(self, stream_id: int, counter: Optional[GateCounter] = None) -> "TlweOracleEngine":
        return TlweOracleEngine(
            self.sk,
            self.sampler.spawn(stream_id),
            counter=counter if counter is not None else self.counter,
            gate_delay_ms=self.gate_delay_ms,
            debug=self.debug,
        )

    def _bootstrap(self, linear: TlweSample) -> CipherBit:
        if self.debug:
            mu = phase(linear, self.sk).signed
            if abs(mu) < NOISE_MARGIN:
                raise NoiseBudgetError(
                    f"pre-bootstrap phase {mu / 2**32:+.6f} is within 1/16 of the decision boundary"
                )
        return self._wrap(bootstrap_oracle(linear, self.sk, self.sampler))

    def _and(self, a, b):
        return self._bootstrap(add_samples(self._minus_eighth, a.payload, b.payload))

    def _or(self, a, b):
        return self._bootstrap(add_samples(self._plus_eighth, a.payload, b.payload))

    def _xor(self, a, b):
        return self._bootstrap(
            add_samples(self._plus_quarter, scale_sample(2, a.payload), scale_sample(2, b.payload))
        )

    def _xnor(self, a, b):
        return self._bootstrap(
            add_samples(
                self._minus_quarter, scale_sample(-2, a.payload), scale_sample(-2, b.payload)
            )
        )

    def _not(self, a):
        return self._wrap(neg_sample(a.payload))

    def _mux(self, sel, a, b):
        # sel AND a, (NOT sel) AND b, then OR of the two exclusive terms
        left = self._bootstrap(add_samples(self._minus_eighth, sel.payload, a.payload))
        right = self._bootstrap(
            add_samples(self._minus_eighth, neg_sample(sel.payload), b.payload)
        )
        return self._bootstrap(add_samples(self._plus_eighth, left.payload, right.payload))
