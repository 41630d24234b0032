"""Reference server for the next-token logprob wire protocol."""

from .backends import (
    BackendError,
    HFBackend,
    InvalidTokensError,
    StubBackend,
    build_backend,
)
from .server import DEFAULT_MAX_PREFIX, ScorerHTTPServer, ServerConfig, make_server

__version__ = "0.1.0"

__all__ = [
    "BackendError",
    "DEFAULT_MAX_PREFIX",
    "HFBackend",
    "InvalidTokensError",
    "ScorerHTTPServer",
    "ServerConfig",
    "StubBackend",
    "build_backend",
    "make_server",
]
