"""API routes for the solver service."""

from .routes import router as api_router
from .websocket import router as ws_router

__all__ = ["api_router", "ws_router"]
