import random
import socket
import threading

import numpy as np
import pytest

from conftest import midpoint
from locpir.codec import samples_from_bytes
from locpir.errors import ErrorCode, ParameterError, ProtocolError
from locpir.gate_engine import ClearEngine, TlweOracleEngine
from locpir.models import DatasetConfig, FixedPointFormat, GeoCoordinate, RegionRecord, TlweParams
from locpir.protocol import (
    LocPirClient,
    LocPirServer,
    LoopbackTransport,
    MsgType,
    ParamsAnnouncement,
    SessionPhase,
    TcpTransport,
    WireFrame,
    client_decrypt_response,
    client_preprocess,
    client_query,
)
from locpir.protocol.transport import LocPirTcpServer, parse_address
from locpir.protocol.wire import (
    HEADER,
    MAGIC,
    VERSION,
    capability_token,
    decode_error,
    decode_sheet,
    error_frame,
    query_nbytes,
    read_frame,
    response_nbytes,
    sheet_nbytes,
)
from locpir.torus_core import NoiseSampler, decrypt_bit, encrypt_bit, keygen

FMT = FixedPointFormat()


# -- framing --------------------------------------------------------------------


def test_header_layout():
    frame = WireFrame(MsgType.QUERY, b"abc")
    data = frame.encode()
    assert HEADER.size == 11
    assert data[:4] == b"LPIR"
    assert data[4:6] == (1).to_bytes(2, "little")
    assert data[6] == 3
    assert data[7:11] == (3).to_bytes(4, "little")
    assert WireFrame.decode(data) == frame


@pytest.mark.parametrize(
    "data, code",
    [
        (WireFrame(MsgType.PARAMS, b"xyz").encode()[:-1], ErrorCode.LENGTH),
        (WireFrame(MsgType.PARAMS).encode() + b"\x00", ErrorCode.LENGTH),
        (b"LPIR", ErrorCode.LENGTH),
        (HEADER.pack(b"XXXX", VERSION, 1, 0), ErrorCode.MALFORMED),
        (HEADER.pack(MAGIC, VERSION + 1, 1, 0), ErrorCode.MALFORMED),
        (HEADER.pack(MAGIC, VERSION, 9, 0), ErrorCode.UNKNOWN_TYPE),
        (HEADER.pack(MAGIC, VERSION, 1, 2**31), ErrorCode.LENGTH),
    ],
)
def test_bad_frames(data, code):
    with pytest.raises(ProtocolError) as exc:
        WireFrame.decode(data)
    assert exc.value.code is code


def test_error_frames():
    err = decode_error(error_frame(ErrorCode.PHASE, "too early").payload)
    assert (err.code, str(err)) == (ErrorCode.PHASE, "too early")
    assert decode_error(b"\x63oops").code is ErrorCode.INTERNAL
    assert decode_error(b"").code is ErrorCode.MALFORMED


@pytest.mark.parametrize(
    "params", [TlweParams.for_level(80), TlweParams.for_level(128), TlweParams(n=4, sigma=0.0)]
)
def test_announcement_round_trip(params):
    a = ParamsAnnouncement(
        session_id=7,
        params=params,
        format=FixedPointFormat(int_bits=9, frac_bits=4),
        n_regions=9,
        m=9,
        engine="tlwe-oracle",
        demo=True,
        ready=True,
        token=capability_token("tlwe-oracle", params),
    )
    assert ParamsAnnouncement.from_bytes(a.to_bytes()) == a
    with pytest.raises(ProtocolError):
        ParamsAnnouncement.from_bytes(a.to_bytes()[:-1])


def test_capability_token_depends_on_engine_and_params(params80, params128):
    assert len(capability_token("clear", params80)) == 16
    assert capability_token("clear", params80) != capability_token("tlwe-oracle", params80)
    assert capability_token("clear", params80) != capability_token("clear", params128)


def test_payload_sizes(params80, params128):
    assert sheet_nbytes(9, 9, params80) == 175284
    assert sheet_nbytes(9, 9, params128) == 204444
    assert response_nbytes(9, params80) == 19476
    assert response_nbytes(9, params128) == 22716
    assert query_nbytes(FMT, params80) == 2 * (1 + 34624)
    assert query_nbytes(FixedPointFormat.for_length(13), params80) == 2 * (1 + 28132)


def test_parse_address():
    assert parse_address("example.org:9000") == ("example.org", 9000)
    assert parse_address("example.org") == ("example.org", 7878)
    assert parse_address(":9000") == ("127.0.0.1", 9000)


# -- sessions over loopback -------------------------------------------------------


def test_loopback_session(make_server, kdca, sk80):
    records, _ = kdca
    transport = LoopbackTransport(make_server(sk80))
    client = LocPirClient(transport, sk80, seed=3)
    announcement = client.hello()
    assert (announcement.n_regions, announcement.m, announcement.format.l) == (9, 9, 16)
    assert announcement.engine == "clear" and not announcement.ready
    assert client.preprocess().ready
    assert client.query(*midpoint(records[1])) == 33
    assert transport.bytes_sent == 11 + (11 + 175284) + (11 + 69250)
    assert transport.bytes_received == 2 * (11 + len(announcement.to_bytes())) + 11 + 19476
    assert set(client.timings) == {"encrypt", "decrypt"}


def test_sheet_is_accepted_once(make_server, sk80):
    client = LocPirClient(LoopbackTransport(make_server(sk80)), sk80, seed=4)
    client.preprocess()
    with pytest.raises(ProtocolError) as exc:
        client.preprocess()
    assert exc.value.code is ErrorCode.PHASE
    # the rejected sheet left the session ready
    assert client.query(37.55, 127.0) == 427


def test_query_before_sheet_is_a_phase_error(make_server, sk80, params80):
    server = make_server(sk80)
    session = server.open_session()
    payload = client_query(GeoCoordinate(lat=37.55, lon=127.0), sk80, FMT, params80, ClearEngine(), None)
    reply = server.handle(WireFrame(MsgType.QUERY, payload), session)
    assert reply.msg_type is MsgType.ERROR
    assert decode_error(reply.payload).code is ErrorCode.PHASE
    assert session.phase is SessionPhase.AWAITING_SHEET


def test_sessions_are_independent(make_server, sk80, params80):
    server = make_server(sk80)
    first, second = server.open_session(), server.open_session()
    assert first.session_id != second.session_id
    sheet = client_preprocess(sk80, params80, 9, 9, ClearEngine(), None)
    assert server.handle(WireFrame(MsgType.ZEROSHEET, sheet), first).msg_type is MsgType.PARAMS
    assert first.phase is SessionPhase.READY
    assert second.phase is SessionPhase.AWAITING_SHEET


def test_query_from_another_engine_is_malformed(make_server, sk80, params80, sampler80):
    server = make_server(sk80)
    session = server.open_session()
    sheet = client_preprocess(sk80, params80, 9, 9, ClearEngine(), None)
    server.handle(WireFrame(MsgType.ZEROSHEET, sheet), session)
    engine = TlweOracleEngine(sk80, sampler80)
    payload = client_query(GeoCoordinate(lat=37.55, lon=127.0), sk80, FMT, params80, engine, sampler80)
    reply = server.handle(WireFrame(MsgType.QUERY, payload), session)
    assert decode_error(reply.payload).code is ErrorCode.MALFORMED
    assert session.phase is SessionPhase.READY and session.queries == 0


def test_client_rejects_a_key_of_another_dimension(make_server, sk80, sk128):
    client = LocPirClient(LoopbackTransport(make_server(sk80)), sk128)
    with pytest.raises(ParameterError):
        client.hello()


def test_client_sees_demo_mode(make_server, sk80, caplog):
    client = LocPirClient(LoopbackTransport(make_server(sk80, "tlwe-oracle")), sk80, seed=6)
    assert client.hello().demo
    assert "demo mode" in caplog.text


# -- session state machine --------------------------------------------------------

TINY_PARAMS = TlweParams(n=4, sigma=0.0)
TINY_FMT = FixedPointFormat(int_bits=3, frac_bits=0)


@pytest.fixture
def tiny_server():
    records = [RegionRecord(name="Box", lat1=0, lat2=2, lon1=0, lon2=2, service=3)]
    dataset = DatasetConfig(n_regions=1, m=2, format=TINY_FMT)
    return LocPirServer(records, dataset, TINY_PARAMS, ClearEngine())


def _tiny_actions():
    sk = keygen(TINY_PARAMS, seed=1)
    engine = ClearEngine()
    sheet = client_preprocess(sk, TINY_PARAMS, 1, 2, engine, None)
    inside = client_query(GeoCoordinate(lat=1, lon=1), sk, TINY_FMT, TINY_PARAMS, engine, None)
    outside = client_query(GeoCoordinate(lat=2, lon=1), sk, TINY_FMT, TINY_PARAMS, engine, None)
    return sk, {
        "hello": WireFrame(MsgType.PARAMS).encode(),
        "hello_with_payload": WireFrame(MsgType.PARAMS, b"\x01").encode(),
        "sheet": WireFrame(MsgType.ZEROSHEET, sheet).encode(),
        "short_sheet": WireFrame(MsgType.ZEROSHEET, sheet[:-1]).encode(),
        "query_inside": WireFrame(MsgType.QUERY, inside).encode(),
        "query_outside": WireFrame(MsgType.QUERY, outside).encode(),
        "short_query": WireFrame(MsgType.QUERY, inside[:-3]).encode(),
        "response": WireFrame(MsgType.RESPONSE, b"").encode(),
        "error": error_frame(ErrorCode.INTERNAL, "x").encode(),
        "bad_magic": HEADER.pack(b"XXXX", VERSION, 1, 0),
        "unknown_type": HEADER.pack(MAGIC, VERSION, 9, 0),
        "truncated": WireFrame(MsgType.QUERY, inside).encode()[:50],
    }


def _expected(action: str, ready: bool):
    """(reply type, error code, ready afterwards, decrypted service) predicted for a frame."""
    if action == "hello":
        return MsgType.PARAMS, None, ready, None
    if action == "sheet":
        return (MsgType.ERROR, ErrorCode.PHASE, ready, None) if ready else (MsgType.PARAMS, None, True, None)
    if action == "short_sheet":
        return MsgType.ERROR, ErrorCode.PHASE if ready else ErrorCode.LENGTH, ready, None
    if action in ("query_inside", "query_outside"):
        if not ready:
            return MsgType.ERROR, ErrorCode.PHASE, ready, None
        return MsgType.RESPONSE, None, ready, 3 if action == "query_inside" else 0
    if action == "short_query":
        return MsgType.ERROR, ErrorCode.LENGTH if ready else ErrorCode.PHASE, ready, None
    codes = {
        "hello_with_payload": ErrorCode.MALFORMED,
        "response": ErrorCode.MALFORMED,
        "error": ErrorCode.MALFORMED,
        "bad_magic": ErrorCode.MALFORMED,
        "unknown_type": ErrorCode.UNKNOWN_TYPE,
        "truncated": ErrorCode.LENGTH,
    }
    return MsgType.ERROR, codes[action], ready, None


def _run_sequences(server, count, seed):
    sk, actions = _tiny_actions()
    names = sorted(actions)
    rng = random.Random(seed)
    for _ in range(count):
        session = server.open_session()
        ready = False
        for _ in range(rng.randint(1, 8)):
            action = rng.choice(names)
            msg_type, code, ready, service = _expected(action, ready)
            reply = WireFrame.decode(server.handle_bytes(actions[action], session))
            assert reply.msg_type is msg_type, action
            if code is not None:
                assert decode_error(reply.payload).code is code, action
            if msg_type is MsgType.PARAMS:
                assert ParamsAnnouncement.from_bytes(reply.payload).ready is ready
            if service is not None:
                assert client_decrypt_response(reply.payload, sk, 2, TINY_PARAMS) == service
            assert (session.phase is SessionPhase.READY) is ready


def test_session_state_machine(tiny_server):
    _run_sequences(tiny_server, 200, seed=0)


@pytest.mark.slow
def test_session_state_machine_long_run(tiny_server):
    _run_sequences(tiny_server, 10**4, seed=1)


# -- ciphertext hygiene -----------------------------------------------------------


def test_query_bytes_look_random(sk80, params80):
    sampler = NoiseSampler.for_params(params80, seed=12)
    engine = TlweOracleEngine(sk80, sampler)
    payload = client_query(GeoCoordinate(lat=37.55, lon=127.0), sk80, FMT, params80, engine, sampler)
    assert len(payload) == 69250
    assert b"37.55" not in payload
    words = samples_from_bytes(payload[1:1 + 16 * 2164], 16, params80)
    assert not any(s.is_trivial for s in words)
    counts = np.bincount(np.frombuffer(payload, dtype=np.uint8), minlength=256)
    assert counts.min() >= 190
    assert counts.max() <= 360


def test_sheet_masks_do_not_reveal_a_key_from_the_same_seed(params80):
    sk = keygen(params80, seed=42)
    sampler = NoiseSampler.for_params(params80, seed=42)
    engine = TlweOracleEngine(sk, NoiseSampler.for_params(params80, seed=43))
    payload = client_preprocess(sk, params80, 9, 9, engine, sampler)
    i = np.arange(params80.n)
    rates = []
    for sample in decode_sheet(payload, 9, 9, params80):
        recovered = (sample.mask[i // 4] >> (8 * (i % 4) + 7)) & 1
        assert not np.array_equal(recovered, sk.bits)
        rates.append(np.mean(recovered == sk.bits))
    assert 0.47 <= np.mean(rates) <= 0.53


def test_wrong_key_decrypts_to_coin_flips(sk80, params80, sampler80):
    other = keygen(params80, seed=4321)
    rng = random.Random(0)
    bits = [rng.randint(0, 1) for _ in range(1000)]
    agree = sum(decrypt_bit(encrypt_bit(b, sk80, sampler80), other) == b for b in bits)
    assert 0.4 <= agree / 1000 <= 0.6


# -- tcp -----------------------------------------------------------------------------


@pytest.fixture
def tcp_server(make_server, sk80):
    tcp = LocPirTcpServer(("127.0.0.1", 0), make_server(sk80))
    thread = threading.Thread(target=tcp.serve_forever, daemon=True)
    thread.start()
    yield tcp
    tcp.shutdown()
    tcp.server_close()


def test_tcp_session(tcp_server, kdca, sk80):
    records, _ = kdca
    host, port = tcp_server.server_address[:2]
    with TcpTransport(f"{host}:{port}", timeout=60) as transport:
        client = LocPirClient(transport, sk80, seed=5)
        assert client.query(*midpoint(records[1])) == 33
        assert client.query(34.0, 128.0) == 0


def test_tcp_bad_header_closes_the_session(tcp_server):
    with socket.create_connection(tcp_server.server_address[:2], timeout=60) as sock:
        stream = sock.makefile("rwb")
        stream.write(HEADER.pack(b"XXXX", VERSION, 1, 0))
        stream.flush()
        reply = read_frame(stream)
        assert reply.msg_type is MsgType.ERROR
        assert decode_error(reply.payload).code is ErrorCode.MALFORMED
        with pytest.raises(ConnectionError):
            read_frame(stream)
