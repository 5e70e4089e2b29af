"""
Binary framing of the client/server protocol.

Every frame is ``magic "LPIR" | version u16 | msgType u8 | payloadLen u32 | payload``,
little-endian. Payloads:

* PARAMS (client -> server): empty, asks for the announcement.
* PARAMS (server -> client): a ``ParamsAnnouncement``; ``ready=1`` acknowledges a sheet.
* ZEROSHEET: N*m samples, region-major and bit-minor.
* QUERY: two words (latitude, then longitude), each ``u8 l`` followed by l samples.
* RESPONSE: m samples, LSB first.
* ERROR: ``u8 code`` followed by a UTF-8 reason.
"""

from __future__ import annotations

import hashlib
import logging
import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import BinaryIO, Sequence

from ..codec import CipherWord, samples_from_bytes, samples_to_bytes, word_from_bytes, word_to_bytes
from ..errors import DimensionMismatchError, ErrorCode, LocPirError, ProtocolError
from ..gate_engine import GateEngine
from ..models.fixed_point import FixedPointFormat
from ..models.params import SecurityLevel, TlweParams
from ..torus_core import TlweSample

logger = logging.getLogger(__name__)

MAGIC = b"LPIR"
VERSION = 1
MAX_PAYLOAD = 64 * 1024 * 1024

HEADER = struct.Struct("<4sHBI")
_PARAMS = struct.Struct("<IBIdBBIHBBB16s")
_ERROR = struct.Struct("<B")

ENGINE_CODES = {"clear": 0, "tlwe-oracle": 1}
SECURITY_CODES = {SecurityLevel.SEC80: 80, SecurityLevel.SEC128: 128, SecurityLevel.CUSTOM: 0}


class MsgType(IntEnum):
    PARAMS = 1
    ZEROSHEET = 2
    QUERY = 3
    RESPONSE = 4
    ERROR = 5


@dataclass(frozen=True)
class WireFrame:
    msg_type: MsgType
    payload: bytes = b""

    def encode(self) -> bytes:
        return HEADER.pack(MAGIC, VERSION, int(self.msg_type), len(self.payload)) + self.payload

    @classmethod
    def decode(cls, data: bytes) -> "WireFrame":
        """Parse one complete frame; trailing or missing bytes are rejected."""
        if len(data) < HEADER.size:
            raise ProtocolError(ErrorCode.LENGTH, f"frame of {len(data)} bytes is shorter than its header")
        msg_type, length = parse_header(data[: HEADER.size])
        if len(data) - HEADER.size != length:
            raise ProtocolError(
                ErrorCode.LENGTH,
                f"header announces {length} payload bytes, frame carries {len(data) - HEADER.size}",
            )
        return cls(msg_type=msg_type, payload=bytes(data[HEADER.size:]))


def parse_header(header: bytes) -> tuple[MsgType, int]:
    magic, version, raw_type, length = HEADER.unpack(header)
    if magic != MAGIC:
        raise ProtocolError(ErrorCode.MALFORMED, f"bad magic {magic!r}")
    if version != VERSION:
        raise ProtocolError(ErrorCode.MALFORMED, f"unsupported protocol version {version}")
    try:
        msg_type = MsgType(raw_type)
    except ValueError:
        raise ProtocolError(ErrorCode.UNKNOWN_TYPE, f"unknown message type {raw_type}") from None
    if length > MAX_PAYLOAD:
        raise ProtocolError(ErrorCode.LENGTH, f"payload of {length} bytes is too large")
    return msg_type, length


def recv_exact(stream: BinaryIO, n: int) -> bytes:
    """Read exactly ``n`` bytes or raise ConnectionError if the peer closes early."""
    buf = b""
    while len(buf) < n:
        chunk = stream.read(n - len(buf))
        if not chunk:
            raise ConnectionError("Peer closed")
        buf += chunk
    return buf


def read_frame(stream: BinaryIO) -> WireFrame:
    msg_type, length = parse_header(recv_exact(stream, HEADER.size))
    return WireFrame(msg_type=msg_type, payload=recv_exact(stream, length))


def write_frame(stream: BinaryIO, frame: WireFrame) -> None:
    stream.write(frame.encode())
    stream.flush()


def capability_token(engine_tag: str, params: TlweParams) -> bytes:
    """Opaque 16-byte token naming the evaluation capability the server offers."""
    material = f"{engine_tag}:{params.n}:{params.sigma!r}".encode()
    return hashlib.blake2b(material, digest_size=16).digest()


@dataclass(frozen=True)
class ParamsAnnouncement:
    """Everything a client needs to prepare a sheet and a query."""

    session_id: int
    params: TlweParams
    format: FixedPointFormat
    n_regions: int
    m: int
    engine: str
    demo: bool = False
    ready: bool = False
    token: bytes = b"\x00" * 16

    def to_bytes(self) -> bytes:
        return _PARAMS.pack(
            self.session_id,
            SECURITY_CODES[self.params.security_level],
            self.params.n,
            self.params.sigma,
            self.format.int_bits,
            self.format.frac_bits,
            self.n_regions,
            self.m,
            ENGINE_CODES[self.engine],
            int(self.demo),
            int(self.ready),
            self.token,
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "ParamsAnnouncement":
        if len(data) != _PARAMS.size:
            raise ProtocolError(
                ErrorCode.LENGTH, f"PARAMS payload is {len(data)} bytes, expected {_PARAMS.size}"
            )
        (
            session_id, security, n, sigma, int_bits, frac_bits,
            n_regions, m, engine_code, demo, ready, token,
        ) = _PARAMS.unpack(data)
        engines = {code: tag for tag, code in ENGINE_CODES.items()}
        if engine_code not in engines:
            raise ProtocolError(ErrorCode.MALFORMED, f"unknown engine code {engine_code}")
        try:
            params = TlweParams.for_level(security) if security else TlweParams(n=n, sigma=sigma)
            fmt = FixedPointFormat(int_bits=int_bits, frac_bits=frac_bits)
        except ValueError as e:
            raise ProtocolError(ErrorCode.MALFORMED, f"invalid parameters: {e}") from e
        if params.n != n:
            raise ProtocolError(ErrorCode.MALFORMED, f"level {security} does not have n={n}")
        return cls(
            session_id=session_id,
            params=params,
            format=fmt,
            n_regions=n_regions,
            m=m,
            engine=engines[engine_code],
            demo=bool(demo),
            ready=bool(ready),
            token=token,
        )


# -- payload codecs -------------------------------------------------------------


def sheet_nbytes(n_regions: int, m: int, params: TlweParams) -> int:
    return n_regions * m * params.sample_nbytes


def response_nbytes(m: int, params: TlweParams) -> int:
    return m * params.sample_nbytes


def query_nbytes(fmt: FixedPointFormat, params: TlweParams) -> int:
    """Two words, each with its one-byte length header."""
    return 2 * (1 + fmt.l * params.sample_nbytes)


def encode_sheet(samples: Sequence[TlweSample]) -> bytes:
    return samples_to_bytes(samples)


def decode_sheet(payload: bytes, n_regions: int, m: int, params: TlweParams) -> list[TlweSample]:
    try:
        return samples_from_bytes(payload, n_regions * m, params)
    except DimensionMismatchError as e:
        raise ProtocolError(ErrorCode.LENGTH, f"ZEROSHEET: {e}") from e


def encode_query(enc_x: CipherWord, enc_y: CipherWord, engine: GateEngine, params: TlweParams) -> bytes:
    return word_to_bytes(enc_x, engine, params) + word_to_bytes(enc_y, engine, params)


def decode_query(
    payload: bytes, fmt: FixedPointFormat, engine: GateEngine, params: TlweParams
) -> tuple[CipherWord, CipherWord]:
    expected = query_nbytes(fmt, params)
    if len(payload) != expected:
        raise ProtocolError(
            ErrorCode.LENGTH, f"QUERY payload is {len(payload)} bytes, expected {expected}"
        )
    half = expected // 2
    try:
        enc_x = word_from_bytes(payload[:half], fmt, engine, params)
        enc_y = word_from_bytes(payload[half:], fmt, engine, params)
    except DimensionMismatchError as e:
        raise ProtocolError(ErrorCode.LENGTH, f"QUERY: {e}") from e
    except LocPirError as e:
        raise ProtocolError(ErrorCode.MALFORMED, f"QUERY: {e}") from e
    return enc_x, enc_y


def encode_response(samples: Sequence[TlweSample]) -> bytes:
    return samples_to_bytes(samples)


def decode_response(payload: bytes, m: int, params: TlweParams) -> list[TlweSample]:
    try:
        return samples_from_bytes(payload, m, params)
    except DimensionMismatchError as e:
        raise ProtocolError(ErrorCode.LENGTH, f"RESPONSE: {e}") from e


def error_frame(code: ErrorCode, message: str) -> WireFrame:
    return WireFrame(MsgType.ERROR, _ERROR.pack(int(code)) + message.encode("utf-8"))


def decode_error(payload: bytes) -> ProtocolError:
    if not payload:
        return ProtocolError(ErrorCode.MALFORMED, "empty ERROR payload")
    (code,) = _ERROR.unpack_from(payload)
    try:
        code = ErrorCode(code)
    except ValueError:
        code = ErrorCode.INTERNAL
    return ProtocolError(code, payload[_ERROR.size:].decode("utf-8", errors="replace"))
