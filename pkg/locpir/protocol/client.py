"""
Client side of the protocol: key handling, sheet preparation, query encryption and
response decryption.
"""

from __future__ import annotations

import logging
from typing import Optional

from ..codec import encode_fixed, encrypt_word
from ..errors import ErrorCode, ParameterError, ProtocolError
from ..gate_engine import ClearEngine, GateEngine, TlweOracleEngine
from ..models.fixed_point import FixedPointFormat, GeoCoordinate
from ..models.params import TlweParams
from ..torus_core import NoiseSampler, SecretKey, decrypt_bits
from ..utils.stopwatch import Stopwatch
from .transport import Transport
from .wire import (
    MsgType,
    ParamsAnnouncement,
    WireFrame,
    capability_token,
    decode_error,
    decode_response,
    encode_query,
    encode_sheet,
)

logger = logging.getLogger(__name__)


def client_engine(tag: str, sk: SecretKey, sampler: NoiseSampler) -> GateEngine:
    """The engine whose wire representation the server announced."""
    if tag == ClearEngine.tag:
        return ClearEngine()
    if tag == TlweOracleEngine.tag:
        return TlweOracleEngine(sk, sampler)
    raise ParameterError(f"unknown engine '{tag}'")


def client_preprocess(
    sk: SecretKey,
    params: TlweParams,
    n_regions: int,
    m: int,
    engine: GateEngine,
    sampler: NoiseSampler,
) -> bytes:
    """ZEROSHEET payload: N*m fresh encryptions of zero, region-major and bit-minor."""
    if sk.params.n != params.n:
        raise ParameterError(f"key dimension {sk.params.n} does not match n={params.n}")
    samples = [engine.zero_sample(sk, sampler) for _ in range(n_regions * m)]
    return encode_sheet(samples)


def client_query(
    coord: GeoCoordinate,
    sk: SecretKey,
    fmt: FixedPointFormat,
    params: TlweParams,
    engine: GateEngine,
    sampler: NoiseSampler,
) -> bytes:
    """QUERY payload: the latitude word, then the longitude word."""
    enc_x = encrypt_word(encode_fixed(coord.lat, fmt), sk, sampler, engine)
    enc_y = encrypt_word(encode_fixed(coord.lon, fmt), sk, sampler, engine)
    return encode_query(enc_x, enc_y, engine, params)


def client_decrypt_response(payload: bytes, sk: SecretKey, m: int, params: TlweParams) -> int:
    bits = decrypt_bits(decode_response(payload, m, params), sk)
    return sum(b << j for j, b in enumerate(bits))


class LocPirClient:
    """
    Runs a session: PARAMS, then ZEROSHEET, then any number of QUERY frames.

    Attributes:
        timings (dict): Milliseconds spent in the last ``encrypt`` and ``decrypt`` steps.
    """

    def __init__(self, transport: Transport, sk: SecretKey, seed: Optional[int] = None):
        self.transport = transport
        self.sk = sk
        self.sampler = NoiseSampler.for_params(sk.params, seed)
        self.announcement: Optional[ParamsAnnouncement] = None
        self.engine: Optional[GateEngine] = None
        self.timings: dict[str, float] = {}

    def _exchange(self, frame: WireFrame, expected: MsgType) -> WireFrame:
        reply = self.transport.exchange(frame)
        if reply.msg_type is MsgType.ERROR:
            error = decode_error(reply.payload)
            logger.error("Server rejected %s: %s", frame.msg_type.name, error)
            raise error
        if reply.msg_type is not expected:
            raise ProtocolError(
                ErrorCode.MALFORMED, f"expected {expected.name}, got {reply.msg_type.name}"
            )
        return reply

    def hello(self) -> ParamsAnnouncement:
        reply = self._exchange(WireFrame(MsgType.PARAMS), MsgType.PARAMS)
        announcement = ParamsAnnouncement.from_bytes(reply.payload)
        if announcement.params.n != self.sk.n:
            raise ParameterError(
                f"server uses n={announcement.params.n}, the key has n={self.sk.n}"
            )
        if announcement.token != capability_token(announcement.engine, announcement.params):
            logger.warning("Unexpected capability token from the server")
        if announcement.demo:
            logger.warning("Server runs the insecure tlwe-oracle engine (demo mode)")
        self.announcement = announcement
        self.engine = client_engine(announcement.engine, self.sk, self.sampler)
        logger.info(
            "Session %d: N=%d, m=%d, l=%d, engine=%s",
            announcement.session_id,
            announcement.n_regions,
            announcement.m,
            announcement.format.l,
            announcement.engine,
        )
        return announcement

    def preprocess(self) -> ParamsAnnouncement:
        if self.announcement is None:
            self.hello()
        a = self.announcement
        payload = client_preprocess(self.sk, a.params, a.n_regions, a.m, self.engine, self.sampler)
        reply = self._exchange(WireFrame(MsgType.ZEROSHEET, payload), MsgType.PARAMS)
        self.announcement = ParamsAnnouncement.from_bytes(reply.payload)
        if not self.announcement.ready:
            raise ProtocolError(ErrorCode.PHASE, "server did not acknowledge the ZEROSHEET")
        return self.announcement

    def query(self, lat: float, lon: float) -> int:
        """Retrieve the service value for a position; 0 outside every region."""
        if self.announcement is None or not self.announcement.ready:
            self.preprocess()
        a = self.announcement
        coord = GeoCoordinate(lat=lat, lon=lon)
        stopwatch = Stopwatch()
        with stopwatch.lap("encrypt"):
            payload = client_query(coord, self.sk, a.format, a.params, self.engine, self.sampler)
        reply = self._exchange(WireFrame(MsgType.QUERY, payload), MsgType.RESPONSE)
        with stopwatch.lap("decrypt"):
            value = client_decrypt_response(reply.payload, self.sk, a.m, a.params)
        self.timings = {name: stopwatch.lap_ms(name) for name in ("encrypt", "decrypt")}
        return value
