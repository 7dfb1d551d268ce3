"""WebSocket handling for real-time trace streaming."""

from fastapi import APIRouter, WebSocket, WebSocketDisconnect
import asyncio
import logging

from src.runs.manager import get_run_manager
from src.runs.models import StreamMessage

router = APIRouter()
logger = logging.getLogger(__name__)

POLL_INTERVAL = 0.05


async def _send(websocket: WebSocket, message: StreamMessage):
    await websocket.send_json(message.model_dump())


@router.websocket("/{run_id}")
async def websocket_endpoint(websocket: WebSocket, run_id: str):
    """
    WebSocket endpoint streaming a run's convergence trace.

    Messages are StreamMessage payloads (server -> client):
    {
        "type": "generation" | "complete" | "error",
        "content": {...}
    }
    The first generation message is the initial population (generation 0).
    """
    await websocket.accept()

    run = get_run_manager().get_run(run_id)
    if not run:
        await _send(websocket, StreamMessage(type="error", content="Run not found"))
        await websocket.close()
        return

    sent = 0
    try:
        while True:
            finished = run.finished
            points = run.trace[sent:]
            for point in points:
                await _send(websocket, StreamMessage(type="generation", content=point._asdict()))
            sent += len(points)

            if finished:
                if run.status == "failed":
                    await _send(websocket, StreamMessage(type="error", content=run.error))
                else:
                    await _send(websocket, StreamMessage(type="complete", content=run.summary().model_dump()))
                break

            await asyncio.sleep(POLL_INTERVAL)

        await websocket.close()

    except WebSocketDisconnect:
        logger.debug("client left stream of run %s", run_id)
