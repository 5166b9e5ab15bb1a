"""HTTP service exposing monitor sessions and one-shot scoring."""

from .app import create_app

__all__ = ["create_app"]
