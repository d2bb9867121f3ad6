"""Session service: persisted live interactive test sessions over HTTP."""

from .store import SessionStore
from .app import build_app

__all__ = ["SessionStore", "build_app"]
