"""Background solver runs for the HTTP service."""

from .manager import Run, RunManager, get_run_manager
from .models import CreateRunRequest, GenerateRequest, GenerateResponse, RunResponse, RunSummary

__all__ = [
    "Run",
    "RunManager",
    "get_run_manager",
    "CreateRunRequest",
    "GenerateRequest",
    "GenerateResponse",
    "RunResponse",
    "RunSummary",
]
