"""Run management for background solver jobs."""

from typing import Dict, Optional
import uuid
import asyncio
import logging
from dataclasses import dataclass, field
from datetime import datetime

from src.cnf import CnfFormula, format_assignment
from src.settings import load_settings
from src.solver import GenerationSnapshot, RunResult, SolverConfig, TracePoint, solve
from src.runs.models import RunResponse, RunSummary, TracePointModel

logger = logging.getLogger(__name__)


@dataclass
class Run:
    """One solver run executing off the event loop."""

    id: str
    formula: CnfFormula
    config: SolverConfig
    seed: int
    status: str = "running"
    # Appended from the worker thread, read by the websocket loop.
    trace: list = field(default_factory=list)
    result: Optional[RunResult] = None
    error: Optional[str] = None
    created_at: datetime = field(default_factory=datetime.now)
    task: Optional[asyncio.Task] = None

    @property
    def finished(self) -> bool:
        return self.status != "running"

    def record(self, snapshot: GenerationSnapshot):
        self.trace.append(TracePoint(snapshot.generation, snapshot.global_best.fitness, snapshot.temperature))

    async def execute(self):
        try:
            self.result = await asyncio.to_thread(solve, self.formula, self.config, self.seed, self.record)
            self.status = "finished"
        except Exception as e:
            logger.exception("run %s failed", self.id)
            self.error = str(e)
            self.status = "failed"

    def summary(self) -> Optional[RunSummary]:
        if self.result is None:
            return None
        return RunSummary(
            solved=self.result.solved,
            generations=self.result.high_level_generations_used,
            best_fitness=self.result.best_fitness,
            num_clauses=self.result.num_clauses,
            assignment=format_assignment(self.result.best_individual.genome),
        )

    def to_response(self) -> RunResponse:
        points = self.result.trace if self.result is not None else list(self.trace)
        return RunResponse(
            run_id=self.id,
            status=self.status,
            trace=[TracePointModel(**p._asdict()) for p in points],
            result=self.summary(),
            error=self.error,
        )


class RunManager:
    """Keeps a bounded set of runs in memory."""

    _instance: Optional["RunManager"] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self):
        if self._initialized:
            return

        self.runs: Dict[str, Run] = {}
        self.max_runs = load_settings().max_runs
        self._initialized = True

    def _evict(self):
        """Drop the oldest finished runs once the limit is reached."""
        finished = sorted((r for r in self.runs.values() if r.finished), key=lambda r: r.created_at)
        while len(self.runs) >= self.max_runs and finished:
            self.runs.pop(finished.pop(0).id, None)

    async def create_run(self, formula: CnfFormula, config: SolverConfig, seed: int) -> Run:
        """Register a run and start it in the background."""
        self._evict()
        run = Run(id=str(uuid.uuid4())[:8], formula=formula, config=config, seed=seed)
        self.runs[run.id] = run
        run.task = asyncio.create_task(run.execute())
        logger.info("started run %s (%s, seed=%d)", run.id, config.variant.value, seed)
        return run

    def get_run(self, run_id: str) -> Optional[Run]:
        return self.runs.get(run_id)

    def forget_run(self, run_id: str) -> bool:
        return self.runs.pop(run_id, None) is not None

    async def cleanup_all(self):
        """Wait for running solves and drop everything."""
        pending = [r.task for r in self.runs.values() if r.task and not r.task.done()]
        if pending:
            await asyncio.gather(*pending, return_exceptions=True)
        self.runs.clear()


# Singleton instance
_run_manager: Optional[RunManager] = None


def get_run_manager() -> RunManager:
    """FastAPI dependency to get run manager."""
    global _run_manager
    if _run_manager is None:
        _run_manager = RunManager()
    return _run_manager
