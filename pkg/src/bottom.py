"""Bottom-level GA: selection, crossover, mutation and the per-island evolution loop."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .annealing import (
    CrossoverAcceptRule,
    crossover_accept,
    crossover_accept_many,
    mutation_accept,
    mutation_accept_many,
)
from .cnf import Assignment, CnfFormula, count_satisfied


class CrossoverRule(str, Enum):
    ANNEALED = "annealed"
    ELITIST = "elitist"


class MutationRule(str, Enum):
    ANNEALED = "annealed"
    PLAIN = "plain"


@dataclass(frozen=True, eq=False)
class Individual:
    """Truth assignment with its cached clause-count fitness.

    Genomes are read-only arrays; every operator builds a new Individual, so the
    cached fitness can never go stale.
    """

    genome: Assignment
    fitness: int

    @classmethod
    def evaluate(cls, formula: CnfFormula, genome: Assignment) -> "Individual":
        genome = np.array(genome, dtype=np.bool_)
        genome.setflags(write=False)
        return cls(genome=genome, fitness=count_satisfied(formula, genome))

    @classmethod
    def random(cls, formula: CnfFormula, rng: np.random.Generator) -> "Individual":
        return cls.evaluate(formula, rng.random(formula.num_vars) < 0.5)

    def same_genome(self, other: "Individual") -> bool:
        return np.array_equal(self.genome, other.genome)

    def __len__(self) -> int:
        return len(self.genome)

    def __repr__(self) -> str:
        bits = "".join("1" if b else "0" for b in self.genome[:32])
        suffix = "..." if len(self.genome) > 32 else ""
        return f"Individual({bits}{suffix}, fitness={self.fitness})"


@dataclass(frozen=True)
class SubPopulation:
    """Fixed-size island of individuals."""

    members: tuple[Individual, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))

    @classmethod
    def random(cls, formula: CnfFormula, scale: int, rng: np.random.Generator) -> "SubPopulation":
        return cls(tuple(Individual.random(formula, rng) for _ in range(scale)))

    @property
    def fitnesses(self) -> list[int]:
        return [m.fitness for m in self.members]

    def best(self) -> Individual:
        # max() keeps the first of equal maxima
        return max(self.members, key=lambda m: m.fitness)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


@dataclass(frozen=True)
class BottomParams:
    mutation_rate: float = 0.0001
    crossover_rule: CrossoverRule = CrossoverRule.ANNEALED
    mutation_rule: MutationRule = MutationRule.ANNEALED
    generations_per_epoch: int = 50
    accept_rule: CrossoverAcceptRule = CrossoverAcceptRule.ABSOLUTE

    def __post_init__(self):
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError(f"mutation_rate must be in [0, 1], got {self.mutation_rate}")
        if self.generations_per_epoch < 0:
            raise ValueError(f"generations_per_epoch must be >= 0, got {self.generations_per_epoch}")


# --- Classic operators ----------------------------------------------------


def roulette_indices(fitness: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Fitness-proportional picks for a batch of uniform draws.

    All-zero fitness falls back to uniform picks.
    """
    fitness = np.asarray(fitness, dtype=np.float64)
    if fitness.size == 0:
        raise ValueError("cannot select from an empty population")
    u = np.asarray(u, dtype=np.float64)
    last = fitness.size - 1
    cumulative = np.cumsum(fitness)
    total = cumulative[-1]
    if total <= 0:
        return np.minimum((u * fitness.size).astype(np.intp), last)
    return np.minimum(np.searchsorted(cumulative, u * total, side="right"), last)


def roulette_select(pop: SubPopulation | Sequence[Individual], u: float) -> Individual:
    """Fitness-proportional pick driven by a single uniform draw."""
    members = pop.members if isinstance(pop, SubPopulation) else tuple(pop)
    if not members:
        raise ValueError("cannot select from an empty population")
    return members[int(roulette_indices([m.fitness for m in members], u))]


def one_point_crossover(
    a: Individual, b: Individual, cut: int, formula: CnfFormula
) -> tuple[Individual, Individual]:
    n = len(a.genome)
    if len(b.genome) != n:
        raise ValueError(f"genome lengths differ: {n} vs {len(b.genome)}")
    if not 1 <= cut <= n - 1:
        raise ValueError(f"cut {cut} outside [1, {n - 1}]")
    first = np.concatenate((a.genome[:cut], b.genome[cut:]))
    second = np.concatenate((b.genome[:cut], a.genome[cut:]))
    return Individual.evaluate(formula, first), Individual.evaluate(formula, second)


def _draw_cut(n: int, rng: np.random.Generator) -> int:
    if n < 2:
        raise ValueError(f"one-point crossover needs genomes of length >= 2, got {n}")
    return int(rng.integers(1, n))


def bit_flip_mutate(a: Individual, rate: float, formula: CnfFormula, rng: np.random.Generator) -> Individual:
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"mutation rate must be in [0, 1], got {rate}")
    flips = rng.random(len(a.genome)) < rate
    if not flips.any():
        return a
    return Individual.evaluate(formula, a.genome ^ flips)


# --- Annealed and elitist variants ---------------------------------------


def annealed_crossover(
    a: Individual,
    b: Individual,
    temperature: float,
    formula: CnfFormula,
    rng: np.random.Generator,
    rule: CrossoverAcceptRule = CrossoverAcceptRule.ABSOLUTE,
) -> tuple[Individual, Individual]:
    """One-point crossover kept only if the annealed criterion accepts it.

    A rejected crossover returns the parents untouched.
    """
    c, d = one_point_crossover(a, b, _draw_cut(len(a.genome), rng), formula)
    t1 = max(a.fitness, b.fitness)
    t2 = max(c.fitness, d.fitness)
    if crossover_accept(t1, t2, temperature, rng.random(), rule):
        return c, d
    return a, b


def annealed_mutation(
    a: Individual,
    temperature: float,
    rate: float,
    formula: CnfFormula,
    rng: np.random.Generator,
) -> Individual:
    mutated = bit_flip_mutate(a, rate, formula, rng)
    if mutation_accept(a.fitness, mutated.fitness, temperature, rng.random()):
        return mutated
    return a


def elitist_crossover(
    a: Individual, b: Individual, formula: CnfFormula, rng: np.random.Generator
) -> tuple[Individual, Individual]:
    """Two fittest of {A, B, C, D}; ties prefer children, then input order."""
    c, d = one_point_crossover(a, b, _draw_cut(len(a.genome), rng), formula)
    ranked = sorted((c, d, a, b), key=lambda ind: -ind.fitness)
    return ranked[0], ranked[1]


# --- Evolution loop -------------------------------------------------------


@dataclass
class _Generation:
    """One island's genomes as an (S, n) matrix plus its fitness vector."""

    genomes: np.ndarray
    fitness: np.ndarray

    @classmethod
    def of(cls, pop: SubPopulation) -> "_Generation":
        genomes = np.stack([member.genome for member in pop.members])
        return cls(genomes, np.array(pop.fitnesses, dtype=np.int64))

    def to_subpopulation(self) -> SubPopulation:
        return SubPopulation(tuple(_individual(g, int(f)) for g, f in zip(self.genomes, self.fitness)))


def _individual(genome: np.ndarray, fitness: int) -> Individual:
    genome = genome.copy()
    genome.setflags(write=False)
    return Individual(genome=genome, fitness=fitness)


def _breed(
    current: _Generation,
    formula: CnfFormula,
    params: BottomParams,
    temperature: float,
    rng: np.random.Generator,
) -> _Generation:
    """Roulette pairs, then the configured crossover rule; children in pair order."""
    size, n = current.genomes.shape
    pairs = (size + 1) // 2
    picks = roulette_indices(current.fitness, rng.random(2 * pairs))
    a, b = current.genomes[picks[0::2]], current.genomes[picks[1::2]]
    fa, fb = current.fitness[picks[0::2]], current.fitness[picks[1::2]]

    if n >= 2:
        cuts = rng.integers(1, n, size=pairs)
        head = np.arange(n) < cuts[:, None]
        c, d = np.where(head, a, b), np.where(head, b, a)
        fcd = formula.count_satisfied_rows(np.concatenate((c, d)))
        fc, fd = fcd[:pairs], fcd[pairs:]
        if params.crossover_rule is CrossoverRule.ANNEALED:
            accepted = crossover_accept_many(
                np.maximum(fa, fb), np.maximum(fc, fd), temperature, rng.random(pairs), params.accept_rule
            )
            a, b = np.where(accepted[:, None], c, a), np.where(accepted[:, None], d, b)
            fa, fb = np.where(accepted, fc, fa), np.where(accepted, fd, fb)
        else:
            # two fittest of (C, D, A, B); the stable sort keeps children first on ties
            candidates = np.stack((c, d, a, b), axis=1)
            scores = np.stack((fc, fd, fa, fb), axis=1)
            top = np.argsort(-scores, axis=1, kind="stable")[:, :2]
            rows = np.arange(pairs)
            a, b = candidates[rows, top[:, 0]], candidates[rows, top[:, 1]]
            fa, fb = scores[rows, top[:, 0]], scores[rows, top[:, 1]]

    genomes = np.stack((a, b), axis=1).reshape(2 * pairs, n)[:size]
    fitness = np.stack((fa, fb), axis=1).reshape(2 * pairs)[:size]
    return _Generation(genomes, fitness)


def _mutate_all(
    offspring: _Generation,
    formula: CnfFormula,
    params: BottomParams,
    temperature: float,
    rng: np.random.Generator,
) -> _Generation:
    """Per-bit flips for every child, judged by the configured mutation rule.

    Under the annealed rule a child the per-bit draw leaves untouched is given
    a single random bit flip instead, so every child proposes a neighbour to the
    acceptance test. A zero mutation rate switches this off.
    """
    size, n = offspring.genomes.shape
    flips = rng.random((size, n)) < params.mutation_rate
    annealed = params.mutation_rule is MutationRule.ANNEALED
    if annealed and params.mutation_rate > 0 and n > 0:
        positions = rng.integers(0, n, size=size)
        idle = ~flips.any(axis=1)
        flips[idle, positions[idle]] = True

    changed = flips.any(axis=1)
    if not changed.any():
        return offspring
    proposals = offspring.genomes[changed] ^ flips[changed]
    proposal_fitness = formula.count_satisfied_rows(proposals)
    if annealed:
        accepted = mutation_accept_many(
            offspring.fitness[changed], proposal_fitness, temperature, rng.random(int(changed.sum()))
        )
        proposals, proposal_fitness = proposals[accepted], proposal_fitness[accepted]
        changed[changed] = accepted

    genomes, fitness = offspring.genomes.copy(), offspring.fitness.copy()
    genomes[changed] = proposals
    fitness[changed] = proposal_fitness
    return _Generation(genomes, fitness)


def _keep_elite(offspring: _Generation, parents: _Generation) -> _Generation:
    """Roulette can miss the best parent; put it back over the worst child."""
    elite = int(np.argmax(parents.fitness))
    if offspring.fitness.max() >= parents.fitness[elite]:
        return offspring
    worst = int(np.argmin(offspring.fitness))
    offspring.genomes[worst] = parents.genomes[elite]
    offspring.fitness[worst] = parents.fitness[elite]
    return offspring


def evolve_bottom(
    pop: SubPopulation,
    formula: CnfFormula,
    params: BottomParams,
    temperature: float,
    rng: np.random.Generator,
) -> SubPopulation:
    """Run ``params.generations_per_epoch`` generational-replacement steps.

    Each step roulette-selects parent pairs, applies the crossover rule and then
    the mutation rule to every child. Under the elitist crossover rule the best
    parent survives any step whose children are all worse.
    """
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    if len(pop) == 0:
        raise ValueError("cannot evolve an empty population")
    if params.generations_per_epoch == 0:
        return pop

    current = _Generation.of(pop)
    for _ in range(params.generations_per_epoch):
        offspring = _mutate_all(_breed(current, formula, params, temperature, rng), formula, params, temperature, rng)
        if params.crossover_rule is CrossoverRule.ELITIST:
            offspring = _keep_elite(offspring, current)
        current = offspring
    return current.to_subpopulation()
