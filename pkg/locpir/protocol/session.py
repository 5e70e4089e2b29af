"""
Server side of the protocol: per-session state machine and frame handling.

A session starts in ``awaitingSheet``. Exactly one ZEROSHEET moves it to ``ready``;
QUERY frames are served only when ready. PARAMS may be asked for at any time.
Any rejected frame produces an ERROR frame and leaves the session untouched.
"""

from __future__ import annotations

import itertools
import logging
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from ..circuits import EncodedRegion, ZeroSampleSheet, evaluate_locpir, preprocess_services
from ..dataset import attach_services, encode_boxes
from ..errors import (
    DimensionMismatchError,
    EncodingRangeError,
    ErrorCode,
    LocPirError,
    ProtocolError,
    ServiceOverflowError,
)
from ..gate_engine import GateEngine, TlweOracleEngine
from ..models.params import TlweParams
from ..models.region import DatasetConfig, RegionRecord
from .wire import (
    MsgType,
    ParamsAnnouncement,
    WireFrame,
    capability_token,
    decode_query,
    decode_sheet,
    encode_response,
    error_frame,
)

logger = logging.getLogger(__name__)


class SessionPhase(str, Enum):
    AWAITING_SHEET = "awaitingSheet"
    READY = "ready"


@dataclass(eq=False)
class SessionState:
    """One client's negotiated parameters and its preprocessed services."""

    session_id: int
    params: TlweParams
    dataset: DatasetConfig
    engine: GateEngine
    phase: SessionPhase = SessionPhase.AWAITING_SHEET
    regions: Optional[list[EncodedRegion]] = None
    queries: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def format(self):
        return self.dataset.format


def _error_code(exc: Exception) -> ErrorCode:
    if isinstance(exc, ProtocolError):
        return exc.code
    if isinstance(exc, DimensionMismatchError):
        return ErrorCode.LENGTH
    if isinstance(exc, (EncodingRangeError, ServiceOverflowError)):
        return ErrorCode.RANGE
    if isinstance(exc, (LocPirError, ValueError)):
        return ErrorCode.MALFORMED
    return ErrorCode.INTERNAL


class LocPirServer:
    """
    Serves LocPIR queries over one region table.

    Box edges are encoded once at start-up; services are encrypted per session
    with the sheet the client uploads.
    """

    def __init__(
        self,
        records: Sequence[RegionRecord],
        dataset: DatasetConfig,
        params: TlweParams,
        engine: GateEngine,
        workers: int = 1,
    ):
        if len(records) != dataset.n_regions:
            raise DimensionMismatchError(
                f"{len(records)} records but the dataset declares N={dataset.n_regions}"
            )
        self.params = params
        self.dataset = dataset
        self.engine = engine
        self.workers = workers
        self.demo = isinstance(engine, TlweOracleEngine)
        self.token = capability_token(engine.tag, params)
        self._services = [r.service for r in records]
        self._boxes = encode_boxes(records, dataset.format, engine)
        self._ids = itertools.count(1)
        self._ids_lock = threading.Lock()
        logger.info(
            "Server ready: N=%d, m=%d, l=%d, n=%d, engine=%s",
            dataset.n_regions,
            dataset.m,
            dataset.format.l,
            params.n,
            engine.tag,
        )

    def open_session(self) -> SessionState:
        with self._ids_lock:
            session_id = next(self._ids)
        session = SessionState(
            session_id=session_id,
            params=self.params,
            dataset=self.dataset,
            engine=self.engine.fork(session_id),
        )
        logger.info("Session %d opened", session_id)
        return session

    def announcement(self, session: SessionState) -> ParamsAnnouncement:
        return ParamsAnnouncement(
            session_id=session.session_id,
            params=self.params,
            format=self.dataset.format,
            n_regions=self.dataset.n_regions,
            m=self.dataset.m,
            engine=self.engine.tag,
            demo=self.demo,
            ready=session.phase is SessionPhase.READY,
            token=self.token,
        )

    # -- frame handling ---------------------------------------------------------

    def handle(self, frame: WireFrame, session: SessionState) -> WireFrame:
        """Process one frame in order for ``session`` and return the reply frame."""
        with session.lock:
            try:
                return self._dispatch(frame, session)
            except Exception as e:
                code = _error_code(e)
                if code is ErrorCode.INTERNAL:
                    logger.exception("Session %d: internal error", session.session_id)
                else:
                    logger.warning(
                        "Session %d: rejected %s frame (%s): %s",
                        session.session_id,
                        frame.msg_type.name,
                        code.name,
                        e,
                    )
                return error_frame(code, str(e))

    def handle_bytes(self, data: bytes, session: SessionState) -> bytes:
        try:
            frame = WireFrame.decode(data)
        except ProtocolError as e:
            logger.warning("Session %d: undecodable frame: %s", session.session_id, e)
            return error_frame(e.code, str(e)).encode()
        return self.handle(frame, session).encode()

    def _dispatch(self, frame: WireFrame, session: SessionState) -> WireFrame:
        if frame.msg_type is MsgType.PARAMS:
            if frame.payload:
                raise ProtocolError(ErrorCode.MALFORMED, "a PARAMS request carries no payload")
            return WireFrame(MsgType.PARAMS, self.announcement(session).to_bytes())
        if frame.msg_type is MsgType.ZEROSHEET:
            return self._on_sheet(frame.payload, session)
        if frame.msg_type is MsgType.QUERY:
            return self._on_query(frame.payload, session)
        raise ProtocolError(
            ErrorCode.MALFORMED, f"{frame.msg_type.name} frames are not accepted by the server"
        )

    def _on_sheet(self, payload: bytes, session: SessionState) -> WireFrame:
        if session.phase is not SessionPhase.AWAITING_SHEET:
            raise ProtocolError(ErrorCode.PHASE, "the session already received its ZEROSHEET")
        n_regions, m = self.dataset.n_regions, self.dataset.m
        samples = decode_sheet(payload, n_regions, m, self.params)
        sheet = ZeroSampleSheet.from_flat(samples, n_regions, m)
        services = preprocess_services(self._services, sheet, m, session.engine, self.params)
        session.regions = attach_services(self._boxes, services)
        session.phase = SessionPhase.READY
        logger.info("Session %d: sheet of %d samples accepted, ready", session.session_id, len(samples))
        return WireFrame(MsgType.PARAMS, self.announcement(session).to_bytes())

    def _on_query(self, payload: bytes, session: SessionState) -> WireFrame:
        if session.phase is not SessionPhase.READY:
            raise ProtocolError(ErrorCode.PHASE, "QUERY received before ZEROSHEET")
        enc_x, enc_y = decode_query(payload, self.dataset.format, session.engine, self.params)
        engine = session.engine.fork(session.queries)
        result = evaluate_locpir(
            enc_x, enc_y, session.regions, engine, workers=self.workers, m=self.dataset.m
        )
        samples = [engine.to_sample(bit, self.params) for bit in result.service.bits]
        session.queries += 1
        logger.info(
            "Session %d: served query %d, %d units in %.1f ms",
            session.session_id,
            session.queries,
            result.counter.bootstrap_units,
            sum(result.wall_ms.values()),
        )
        return WireFrame(MsgType.RESPONSE, encode_response(samples))

