"""Simulated-annealing machinery: geometric cooling and acceptance rules.

Acceptance functions are pure; the uniform draw ``u`` is supplied by the caller.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .cnf import CnfFormula

# T stays strictly positive even after thousands of cools.
MIN_TEMPERATURE = sys.float_info.min


class CrossoverAcceptRule(str, Enum):
    """Exponent used when annealed crossover produces worse children."""

    ABSOLUTE = "absolute"  # exp(-t2 / T)
    DELTA = "delta"  # exp(-(t1 - t2) / T)


def _check_temperature(temperature: float) -> None:
    if not temperature > 0:
        raise ValueError(f"temperature must be positive, got {temperature}")


@dataclass(frozen=True)
class TemperatureSchedule:
    """Geometric schedule T_k = t0 * cooling_factor ** k."""

    t0: float
    cooling_factor: float = 0.95
    step: int = 0

    def __post_init__(self):
        _check_temperature(self.t0)
        if not 0 < self.cooling_factor < 1:
            raise ValueError(f"cooling_factor must be in (0, 1), got {self.cooling_factor}")
        if self.step < 0:
            raise ValueError(f"step must be >= 0, got {self.step}")

    @property
    def temperature(self) -> float:
        # Recomputed from (t0, k), never accumulated.
        return max(self.t0 * self.cooling_factor ** self.step, MIN_TEMPERATURE)

    def at(self, step: int) -> "TemperatureSchedule":
        return replace(self, step=step)

    def cool(self) -> "TemperatureSchedule":
        return replace(self, step=self.step + 1)


def initial_temperature(formula: CnfFormula, clause_length: int) -> float:
    """t0 = number of clauses * clause length."""
    if formula.num_clauses == 0:
        raise ValueError("cannot derive an initial temperature for a formula without clauses")
    if clause_length < 1:
        raise ValueError(f"clause_length must be >= 1, got {clause_length}")
    return float(formula.num_clauses * clause_length)


def cool(schedule: TemperatureSchedule) -> TemperatureSchedule:
    return schedule.cool()


def metropolis_accept(delta: float, temperature: float, u: float) -> bool:
    """Accept iff min(1, exp(-delta / T)) >= u."""
    _check_temperature(temperature)
    if delta <= 0:
        return True
    return min(1.0, math.exp(-delta / temperature)) >= u


def crossover_accept(
    t1: float,
    t2: float,
    temperature: float,
    u: float,
    rule: CrossoverAcceptRule = CrossoverAcceptRule.ABSOLUTE,
) -> bool:
    """Annealed crossover criterion.

    ``t1`` is the parents' best fitness, ``t2`` the children's. Children at least
    as good as the parents always pass; otherwise they pass iff exp(-x / T) > u,
    where x is ``t2`` under the absolute rule and ``t1 - t2`` under the delta rule.
    """
    _check_temperature(temperature)
    if t2 >= t1:
        return True
    exponent = t2 if CrossoverAcceptRule(rule) is CrossoverAcceptRule.ABSOLUTE else t1 - t2
    return math.exp(-exponent / temperature) > u


def mutation_accept(f_old: float, f_new: float, temperature: float, u: float) -> bool:
    """Annealed mutation criterion; ties are accepted."""
    _check_temperature(temperature)
    if f_new >= f_old:
        return True
    return math.exp(-(f_old - f_new) / temperature) > u


# --- Batched forms --------------------------------------------------------
# Same criteria as above over aligned arrays, one decision per element.


def crossover_accept_many(
    t1: np.ndarray,
    t2: np.ndarray,
    temperature: float,
    u: np.ndarray,
    rule: CrossoverAcceptRule = CrossoverAcceptRule.ABSOLUTE,
) -> np.ndarray:
    _check_temperature(temperature)
    t1, t2 = np.asarray(t1, dtype=np.float64), np.asarray(t2, dtype=np.float64)
    exponent = t2 if CrossoverAcceptRule(rule) is CrossoverAcceptRule.ABSOLUTE else t1 - t2
    with np.errstate(over="ignore", under="ignore"):
        chance = np.exp(-exponent / temperature)
    return (t2 >= t1) | (chance > u)


def mutation_accept_many(f_old: np.ndarray, f_new: np.ndarray, temperature: float, u: np.ndarray) -> np.ndarray:
    _check_temperature(temperature)
    f_old, f_new = np.asarray(f_old, dtype=np.float64), np.asarray(f_new, dtype=np.float64)
    with np.errstate(over="ignore", under="ignore"):
        chance = np.exp(-(f_old - f_new) / temperature)
    return (f_new >= f_old) | (chance > u)
