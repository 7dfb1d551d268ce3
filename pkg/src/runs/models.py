"""Pydantic models for API requests/responses."""

from pydantic import BaseModel, Field
from typing import Optional, List, Dict, Literal

from src.solver import SolverConfig


class GenerateRequest(BaseModel):
    """Request for a random k-SAT instance."""
    vars: int = Field(..., ge=1)
    clauses: int = Field(..., ge=0)
    seed: int = Field(0, ge=0)
    clause_length: int = Field(3, ge=1)


class GenerateResponse(BaseModel):
    dimacs: str
    num_vars: int
    num_clauses: int


class CreateRunRequest(BaseModel):
    """Request to start a solver run."""
    dimacs: str
    seed: int = Field(0, ge=0)
    config: Optional[SolverConfig] = None  # solver defaults when omitted


class TracePointModel(BaseModel):
    generation: int
    best_fitness: int
    temperature: float


class RunSummary(BaseModel):
    solved: bool
    generations: int
    best_fitness: int
    num_clauses: int
    assignment: str  # DIMACS "v" line


class RunResponse(BaseModel):
    """Response for run operations."""
    run_id: str
    status: str  # running, finished, failed
    trace: List[TracePointModel] = []
    result: Optional[RunSummary] = None
    error: Optional[str] = None


class DefaultsResponse(BaseModel):
    variants: List[str]
    defaults: SolverConfig


class StreamMessage(BaseModel):
    """Streaming response message."""
    type: Literal["generation", "complete", "error"]
    content: Dict | str | None = None
