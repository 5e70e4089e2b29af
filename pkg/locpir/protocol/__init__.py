"""
Client/server protocol: frames, sessions, transports and the client driver.
"""

from .client import LocPirClient, client_decrypt_response, client_preprocess, client_query
from .session import LocPirServer, SessionPhase, SessionState
from .transport import LoopbackTransport, TcpTransport, serve_tcp
from .wire import MsgType, ParamsAnnouncement, WireFrame

__all__ = [
    "LocPirClient",
    "client_decrypt_response",
    "client_preprocess",
    "client_query",
    "LocPirServer",
    "SessionPhase",
    "SessionState",
    "LoopbackTransport",
    "TcpTransport",
    "serve_tcp",
    "MsgType",
    "ParamsAnnouncement",
    "WireFrame",
]
