"""Hierarchical GA layer and the solver loop for the BEA, BIHGA and HGA variants."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, NamedTuple, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .annealing import CrossoverAcceptRule, TemperatureSchedule, initial_temperature
from .bottom import BottomParams, CrossoverRule, Individual, MutationRule, SubPopulation, evolve_bottom
from .cnf import CnfFormula

logger = logging.getLogger(__name__)


class Variant(str, Enum):
    BEA = "bea"
    BIHGA = "bihga"
    HGA = "hga"

    @property
    def uses_optimal_selection(self) -> bool:
        return self is not Variant.HGA

    @property
    def uses_elitism_guard(self) -> bool:
        return self is not Variant.HGA


class DegenerateWeightsError(ValueError):
    """High-level selection weights sum to zero."""


class SolverConfig(BaseModel):
    """Solver parameters. Defaults are the reference parameter set."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    num_subpops: int = Field(4, ge=1)
    subpop_scale: int = Field(5, ge=1)
    bottom_generations: int = Field(50, ge=0)
    max_high_level_generations: int = Field(10000, ge=0)
    cooling_factor: float = Field(0.95, gt=0.0, lt=1.0)
    mutation_rate: float = Field(0.0001, ge=0.0, le=1.0)
    alpha: float = Field(0.5, ge=0.0, le=1.0)
    beta: float = Field(0.5, ge=0.0, le=1.0)
    variant: Variant = Variant.BEA
    crossover_accept_rule: CrossoverAcceptRule = CrossoverAcceptRule.ABSOLUTE
    clause_length: int = Field(3, ge=1)
    # Concurrency only; never changes results.
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check_selection_weights(self) -> "SolverConfig":
        if self.variant.uses_optimal_selection and self.alpha + self.beta <= 0:
            raise ValueError("alpha + beta must be positive for optimal-individual selection")
        return self

    def bottom_params(self) -> BottomParams:
        if self.variant is Variant.BEA:
            crossover, mutation = CrossoverRule.ANNEALED, MutationRule.ANNEALED
        else:
            crossover, mutation = CrossoverRule.ELITIST, MutationRule.PLAIN
        return BottomParams(
            mutation_rate=self.mutation_rate,
            crossover_rule=crossover,
            mutation_rule=mutation,
            generations_per_epoch=self.bottom_generations,
            accept_rule=self.crossover_accept_rule,
        )


@dataclass(frozen=True)
class SubPopulationStats:
    best_fitness: int
    mean_fitness: float


class TracePoint(NamedTuple):
    generation: int
    best_fitness: int
    temperature: float


@dataclass(frozen=True)
class GenerationSnapshot:
    """State after one high-level generation (post elitism guard).

    Generation 0 is the initial population, reported before the first epoch.
    """

    generation: int
    subpops: tuple[SubPopulation, ...]
    global_best: Individual
    temperature: float


@dataclass(frozen=True)
class RunResult:
    solved: bool
    high_level_generations_used: int
    best_individual: Individual
    best_fitness: int
    num_clauses: int
    trace: tuple[TracePoint, ...]

    @property
    def best_unsat(self) -> int:
        return self.num_clauses - self.best_fitness


# --- High-level operators -------------------------------------------------


def population_stats(pop: SubPopulation) -> SubPopulationStats:
    if len(pop) == 0:
        raise ValueError("cannot summarise an empty population")
    fitnesses = pop.fitnesses
    return SubPopulationStats(best_fitness=max(fitnesses), mean_fitness=sum(fitnesses) / len(fitnesses))


def high_level_selection_probs(stats: Sequence[SubPopulationStats], alpha: float, beta: float) -> list[float]:
    """P_i = (alpha*g_i + beta*r_i) / sum_j (alpha*g_j + beta*r_j)."""
    if not (0.0 <= alpha <= 1.0 and 0.0 <= beta <= 1.0):
        raise ValueError(f"alpha and beta must be in [0, 1], got {alpha}, {beta}")
    if not stats:
        raise ValueError("no sub-population statistics given")
    weights = np.array([alpha * s.best_fitness + beta * s.mean_fitness for s in stats], dtype=np.float64)
    total = weights.sum()
    if total <= 0 or (weights < 0).any():
        raise DegenerateWeightsError(f"selection weights {weights.tolist()} do not form a distribution")
    return (weights / total).tolist()


def _selection_probs(stats: Sequence[SubPopulationStats], config: SolverConfig) -> list[float]:
    alpha = config.alpha if config.variant.uses_optimal_selection else 0.0
    try:
        return high_level_selection_probs(stats, alpha, config.beta)
    except DegenerateWeightsError:
        logger.debug("degenerate high-level weights, selecting uniformly")
        return [1.0 / len(stats)] * len(stats)


def high_level_select(
    subpops: Sequence[SubPopulation], probs: Sequence[float], rng: np.random.Generator
) -> list[SubPopulation]:
    """N draws with replacement; each pick is an independent copy."""
    if len(probs) != len(subpops):
        raise ValueError(f"{len(probs)} probabilities for {len(subpops)} sub-populations")
    p = np.asarray(probs, dtype=np.float64)
    if (p < 0).any() or not np.isclose(p.sum(), 1.0, rtol=0.0, atol=1e-9):
        raise ValueError(f"invalid selection probabilities {list(probs)}")
    picks = rng.choice(len(subpops), size=len(subpops), p=p)
    return [SubPopulation(subpops[i].members) for i in picks]


def high_level_crossover(subpops: Sequence[SubPopulation], rng: np.random.Generator) -> list[SubPopulation]:
    """Random pairing, then one-point exchange along the member axis."""
    result = list(subpops)
    if len(result) < 2:
        return result
    order = rng.permutation(len(result))
    for left, right in zip(order[0::2], order[1::2]):
        first, second = result[left].members, result[right].members
        scale = min(len(first), len(second))
        if scale < 2:
            continue
        cut = int(rng.integers(1, scale))
        result[left] = SubPopulation(first[:cut] + second[cut:])
        result[right] = SubPopulation(second[:cut] + first[cut:])
    return result


def high_level_mutate(
    subpops: Sequence[SubPopulation], rate: float, formula: CnfFormula, rng: np.random.Generator
) -> list[SubPopulation]:
    """Each member slot is replaced by a fresh random individual with probability ``rate``."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"mutation rate must be in [0, 1], got {rate}")
    result = []
    for pop in subpops:
        hits = rng.random(len(pop)) < rate
        if not hits.any():
            result.append(pop)
            continue
        members = tuple(
            Individual.random(formula, rng) if hit else member for member, hit in zip(pop.members, hits)
        )
        result.append(SubPopulation(members))
    return result


def elitism_guard(subpops: Sequence[SubPopulation], global_best: Individual) -> list[SubPopulation]:
    """Re-insert the run's best individual over the worst member if it was lost."""
    result = list(subpops)
    slots = [(i, j) for i, pop in enumerate(result) for j in range(len(pop))]
    if not slots:
        return result
    if max(result[i].members[j].fitness for i, j in slots) >= global_best.fitness:
        return result
    i, j = min(slots, key=lambda slot: result[slot[0]].members[slot[1]].fitness)
    members = list(result[i].members)
    members[j] = global_best
    result[i] = SubPopulation(tuple(members))
    return result


# --- Solver loop ----------------------------------------------------------


def _island_rng(seed: int, generation: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, generation, index]))


def _best_of(subpops: Sequence[SubPopulation], incumbent: Optional[Individual] = None) -> Individual:
    best = incumbent
    for pop in subpops:
        candidate = pop.best()
        if best is None or candidate.fitness > best.fitness:
            best = candidate
    return best


def _evolve_all(
    subpops: Sequence[SubPopulation],
    formula: CnfFormula,
    params: BottomParams,
    temperature: float,
    seed: int,
    generation: int,
    executor: Optional[ThreadPoolExecutor],
) -> list[SubPopulation]:
    def evolve(index: int) -> SubPopulation:
        return evolve_bottom(subpops[index], formula, params, temperature, _island_rng(seed, generation, index))

    if executor is None:
        return [evolve(i) for i in range(len(subpops))]
    return list(executor.map(evolve, range(len(subpops))))


def solve(
    formula: CnfFormula,
    config: Optional[SolverConfig] = None,
    seed: int = 0,
    on_generation: Optional[Callable[[GenerationSnapshot], None]] = None,
) -> RunResult:
    """Run one hierarchical GA search until a model is found or the budget is spent.

    Randomness: initialisation and high-level operators draw from a stream seeded
    with ``seed``; each island's bottom epoch draws from a stream derived from
    (seed, generation, island), so concurrent and sequential runs agree.
    """
    config = config or SolverConfig()
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    if config.subpop_scale < 1 or config.num_subpops < 1:
        raise ValueError("need at least one sub-population with at least one member")

    m = formula.num_clauses
    params = config.bottom_params()
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    schedule = TemperatureSchedule(initial_temperature(formula, config.clause_length), config.cooling_factor)

    subpops = [SubPopulation.random(formula, config.subpop_scale, rng) for _ in range(config.num_subpops)]
    global_best = _best_of(subpops)
    trace = [TracePoint(0, global_best.fitness, schedule.temperature)]
    if on_generation is not None:
        on_generation(GenerationSnapshot(0, tuple(subpops), global_best, schedule.temperature))
    generation = 0

    logger.debug(
        "solving %s: n=%d m=%d t0=%.2f seed=%d",
        config.variant.value, formula.num_vars, m, schedule.t0, seed,
    )

    executor = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    try:
        while global_best.fitness < m and generation < config.max_high_level_generations:
            generation += 1
            temperature = schedule.temperature

            subpops = _evolve_all(subpops, formula, params, temperature, seed, generation, executor)
            global_best = _best_of(subpops, global_best)

            probs = _selection_probs([population_stats(p) for p in subpops], config)
            subpops = high_level_select(subpops, probs, rng)
            subpops = high_level_crossover(subpops, rng)
            subpops = high_level_mutate(subpops, config.mutation_rate, formula, rng)
            global_best = _best_of(subpops, global_best)

            if config.variant.uses_elitism_guard:
                subpops = elitism_guard(subpops, global_best)

            schedule = schedule.cool()
            trace.append(TracePoint(generation, global_best.fitness, schedule.temperature))
            if on_generation is not None:
                on_generation(GenerationSnapshot(generation, tuple(subpops), global_best, schedule.temperature))
    finally:
        if executor is not None:
            executor.shutdown()

    solved = global_best.fitness == m
    logger.info(
        "%s seed=%d: %s after %d generations, best %d/%d",
        config.variant.value, seed, "solved" if solved else "budget exhausted", generation, global_best.fitness, m,
    )
    return RunResult(
        solved=solved,
        high_level_generations_used=generation,
        best_individual=global_best,
        best_fitness=global_best.fitness,
        num_clauses=m,
        trace=tuple(trace),
    )


def write_trace_csv(result: RunResult, path: Union[str, Path]) -> None:
    """Per-generation convergence trace, one row per high-level generation."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(TracePoint._fields)
        writer.writerows(result.trace)
