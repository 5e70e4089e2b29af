"""
Frame transports: an in-process loopback and a thin TCP layer over identical frames.
"""

from __future__ import annotations

import logging
import socket
import socketserver
from typing import Protocol

from ..errors import ProtocolError
from .session import LocPirServer
from .wire import WireFrame, error_frame, read_frame, write_frame

logger = logging.getLogger(__name__)


class Transport(Protocol):
    def exchange(self, frame: WireFrame) -> WireFrame: ...

    def close(self) -> None: ...


class LoopbackTransport:
    """Serializes every frame to bytes and hands it to an in-process server session."""

    def __init__(self, server: LocPirServer):
        self.server = server
        self.session = server.open_session()
        self.bytes_sent = 0
        self.bytes_received = 0

    def exchange(self, frame: WireFrame) -> WireFrame:
        data = frame.encode()
        self.bytes_sent += len(data)
        reply = self.server.handle_bytes(data, self.session)
        self.bytes_received += len(reply)
        return WireFrame.decode(reply)

    def close(self) -> None:
        pass


def parse_address(address: str, default_port: int = 7878) -> tuple[str, int]:
    """'host:port', 'host' or ':port'."""
    host, sep, port = address.rpartition(":")
    if not sep:
        return address or "127.0.0.1", default_port
    return host or "127.0.0.1", int(port)


class TcpTransport:
    def __init__(self, address: str, timeout: float = 600.0):
        self.address = parse_address(address)
        self._sock = socket.create_connection(self.address, timeout=timeout)
        self._stream = self._sock.makefile("rwb")
        logger.info("Connected to %s:%d", *self.address)

    def exchange(self, frame: WireFrame) -> WireFrame:
        write_frame(self._stream, frame)
        return read_frame(self._stream)

    def close(self) -> None:
        self._stream.close()
        self._sock.close()

    def __enter__(self) -> "TcpTransport":
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        self.close()


class _SessionHandler(socketserver.StreamRequestHandler):
    """One TCP connection is one session; frames are processed strictly in order."""

    def handle(self):
        server: LocPirServer = self.server.locpir
        session = server.open_session()
        while True:
            try:
                frame = read_frame(self.rfile)
            except ConnectionError:
                break
            except ProtocolError as e:
                # the stream cannot be resynchronized after a bad header
                write_frame(self.wfile, error_frame(e.code, str(e)))
                break
            write_frame(self.wfile, server.handle(frame, session))
        logger.info("Session %d closed", session.session_id)


class LocPirTcpServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address: tuple[str, int], server: LocPirServer):
        self.locpir = server
        super().__init__(address, _SessionHandler)


def serve_tcp(server: LocPirServer, address: str) -> None:
    """Serve sessions on ``address`` until interrupted."""
    with LocPirTcpServer(parse_address(address), server) as tcp:
        logger.info("Listening on %s:%d", *tcp.server_address[:2])
        try:
            tcp.serve_forever()
        except KeyboardInterrupt:
            logger.info("Shutting down")
