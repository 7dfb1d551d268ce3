"""REST API endpoints for the solver service."""

from fastapi import APIRouter, HTTPException, Depends

from src.cnf import DimacsError, generate_random_ksat, parse_dimacs, serialize_dimacs
from src.runs.manager import RunManager, get_run_manager
from src.runs.models import (
    CreateRunRequest,
    DefaultsResponse,
    GenerateRequest,
    GenerateResponse,
    RunResponse,
)
from src.solver import SolverConfig, Variant

router = APIRouter()


@router.get("/variants", response_model=DefaultsResponse)
async def list_variants():
    """Available algorithm variants and the default parameters."""
    return DefaultsResponse(variants=[v.value for v in Variant], defaults=SolverConfig())


@router.post("/generate", response_model=GenerateResponse)
async def generate(request: GenerateRequest):
    """Generate a random k-SAT instance as DIMACS text."""
    try:
        formula = generate_random_ksat(request.vars, request.clauses, request.seed, request.clause_length)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return GenerateResponse(
        dimacs=serialize_dimacs(formula),
        num_vars=formula.num_vars,
        num_clauses=formula.num_clauses,
    )


@router.post("/runs", response_model=RunResponse)
async def create_run(
    request: CreateRunRequest,
    wait: bool = False,
    manager: RunManager = Depends(get_run_manager)
):
    """Start a solver run; with ``wait=true`` respond only when it has finished."""
    try:
        formula = parse_dimacs(request.dimacs)
    except DimacsError as e:
        raise HTTPException(status_code=400, detail=f"Invalid DIMACS: {e}")
    if formula.num_clauses == 0:
        raise HTTPException(status_code=400, detail="Formula has no clauses")

    run = await manager.create_run(formula, request.config or SolverConfig(), request.seed)
    if wait:
        await run.task
    return run.to_response()


@router.get("/runs/{run_id}", response_model=RunResponse)
async def get_run(
    run_id: str,
    manager: RunManager = Depends(get_run_manager)
):
    """Get run status, trace so far, and the result once finished."""
    run = manager.get_run(run_id)
    if not run:
        raise HTTPException(status_code=404, detail="Run not found")
    return run.to_response()


@router.delete("/runs/{run_id}")
async def delete_run(
    run_id: str,
    manager: RunManager = Depends(get_run_manager)
):
    """Forget a run."""
    if not manager.forget_run(run_id):
        raise HTTPException(status_code=404, detail="Run not found")
    return {"status": "deleted"}
