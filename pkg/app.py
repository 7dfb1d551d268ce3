#!/usr/bin/env python3
"""
SAT-GA Service - HTTP front end for the hierarchical genetic SAT solver

Run with: uvicorn app:app --reload --host 0.0.0.0 --port 8080
"""

from contextlib import asynccontextmanager
import logging

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from src.api.routes import router as api_router
from src.api.websocket import router as ws_router
from src.runs.manager import get_run_manager
from src.settings import configure_logging, load_settings

settings = load_settings()
configure_logging(settings.log_level)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Startup and shutdown events."""
    logger.info("Starting SAT-GA service...")
    yield
    await get_run_manager().cleanup_all()
    logger.info("All runs cleaned up.")


app = FastAPI(
    title="SAT-GA Service",
    description="Hierarchical genetic SAT solving with annealed operators",
    version="1.0.0",
    lifespan=lifespan
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.cors_origins,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Mount API routes
app.include_router(api_router, prefix="/api", tags=["api"])
app.include_router(ws_router, prefix="/ws", tags=["websocket"])


@app.get("/")
async def root():
    return {
        "message": "SAT-GA API",
        "docs": "/docs",
    }


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8080)
