import math

import numpy as np
import pytest

from conftest import within_sigma
from src.annealing import (
    MIN_TEMPERATURE,
    CrossoverAcceptRule,
    TemperatureSchedule,
    cool,
    crossover_accept,
    crossover_accept_many,
    initial_temperature,
    metropolis_accept,
    mutation_accept,
    mutation_accept_many,
)
from src.cnf import CnfFormula, generate_random_ksat

TRIALS = 100_000


def acceptance_rate(rule, /, *args, seed=0, **kwargs):
    draws = np.random.default_rng(seed).random(TRIALS)
    return sum(rule(*args, u=float(u), **kwargs) for u in draws) / TRIALS


class TestSchedule:

    @staticmethod
    def test_initial_temperature():
        assert initial_temperature(generate_random_ksat(20, 91, seed=0), 3) == 273
        assert initial_temperature(generate_random_ksat(100, 430, seed=0), 3) == 1290
        assert initial_temperature(CnfFormula.from_ints(1, [[1]]), 1) == 1

    @staticmethod
    def test_initial_temperature_needs_clauses():
        with pytest.raises(ValueError):
            initial_temperature(CnfFormula(2, ()), 3)

    @staticmethod
    def test_cool_examples():
        schedule = TemperatureSchedule(273.0, 0.95)
        once = cool(schedule)
        assert once.step == 1
        assert once.temperature == pytest.approx(259.35)
        assert cool(once).temperature == pytest.approx(246.3825)

    @staticmethod
    def test_strictly_decreasing_and_positive():
        schedule = TemperatureSchedule(273.0, 0.95)
        previous = schedule.temperature
        for _ in range(2000):
            schedule = schedule.cool()
            assert 0 < schedule.temperature < previous
            previous = schedule.temperature

    @staticmethod
    def test_matches_closed_form():
        schedule = TemperatureSchedule(1290.0, 0.95)
        accumulated = 1290.0
        for k in range(1, 500):
            schedule = schedule.cool()
            accumulated *= 0.95
            assert schedule.temperature == pytest.approx(1290.0 * 0.95 ** k, rel=1e-9)
            assert schedule.temperature == pytest.approx(accumulated, rel=1e-9)
        assert schedule.at(499) == schedule

    @staticmethod
    def test_floor_after_underflow():
        assert TemperatureSchedule(1.0, 0.5, step=5000).temperature == MIN_TEMPERATURE

    @staticmethod
    @pytest.mark.parametrize("t0, factor", [(0.0, 0.95), (10.0, 1.0), (10.0, 0.0)])
    def test_invalid(t0, factor):
        with pytest.raises(ValueError):
            TemperatureSchedule(t0, factor)


class TestMetropolis:

    @staticmethod
    def test_zero_delta_always_accepts():
        for u in (0.0, 0.5, 0.999999):
            assert metropolis_accept(0.0, 1.0, u)

    @staticmethod
    def test_inclusive_comparison():
        assert metropolis_accept(1.0, 1.0, math.exp(-1.0))

    @staticmethod
    def test_calibration_at_two_temperatures():
        temperature = 8.0
        high = acceptance_rate(metropolis_accept, temperature, temperature, seed=1)
        low = acceptance_rate(metropolis_accept, temperature, temperature / 4, seed=2)
        assert within_sigma(high, math.exp(-1.0), TRIALS)
        assert within_sigma(low, math.exp(-4.0), TRIALS)
        assert low < high

    @staticmethod
    def test_hot_limit():
        assert acceptance_rate(metropolis_accept, 10.0, 1e9) > 0.9999

    @staticmethod
    def test_rejects_non_positive_temperature():
        with pytest.raises(ValueError):
            metropolis_accept(1.0, 0.0, 0.5)


class TestCrossoverAccept:

    @staticmethod
    def test_non_worse_children_always_accepted():
        for u in (0.0, 0.5, 0.999999):
            assert crossover_accept(5, 5, 0.001, u)
            assert crossover_accept(5, 6, 0.001, u)

    @staticmethod
    def test_absolute_rule_calibration():
        # exp(-t2 / T) with t2 = 3
        high = acceptance_rate(crossover_accept, 5, 3, 3.0, seed=3)
        low = acceptance_rate(crossover_accept, 5, 3, 0.75, seed=4)
        assert within_sigma(high, math.exp(-1.0), TRIALS)
        assert within_sigma(low, math.exp(-4.0), TRIALS)
        assert low < high

    @staticmethod
    def test_delta_rule_calibration():
        # exp(-(t1 - t2) / T) with t1 - t2 = 2
        high = acceptance_rate(crossover_accept, 5, 3, 2.0, seed=5, rule=CrossoverAcceptRule.DELTA)
        low = acceptance_rate(crossover_accept, 5, 3, 0.5, seed=6, rule=CrossoverAcceptRule.DELTA)
        assert within_sigma(high, math.exp(-1.0), TRIALS)
        assert within_sigma(low, math.exp(-4.0), TRIALS)

    @staticmethod
    def test_strict_comparison():
        # probability path disabled when u = 1
        assert not crossover_accept(5, 3, 1e9, 1.0)
        assert not crossover_accept(5, 3, 3.0, math.exp(-1.0))

    @staticmethod
    def test_hot_limit():
        assert acceptance_rate(crossover_accept, 5, 3, 1e9) > 0.9999

    @staticmethod
    def test_rule_accepts_strings():
        assert crossover_accept(5, 3, 3.0, 0.0, rule="delta")


class TestMutationAccept:

    @staticmethod
    def test_improvement_and_tie_accepted():
        assert mutation_accept(7, 8, 0.01, 0.999999)
        assert mutation_accept(7, 7, 0.01, 0.999999)

    @staticmethod
    def test_calibration():
        high = acceptance_rate(mutation_accept, 10, 8, 2.0, seed=7)
        low = acceptance_rate(mutation_accept, 10, 8, 0.5, seed=8)
        assert within_sigma(high, math.exp(-1.0), TRIALS)
        assert within_sigma(low, math.exp(-4.0), TRIALS)
        assert low < high

    @staticmethod
    def test_pure():
        assert mutation_accept(10, 8, 2.0, 0.3) == mutation_accept(10, 8, 2.0, 0.3)

    @staticmethod
    def test_rejects_non_positive_temperature():
        with pytest.raises(ValueError):
            mutation_accept(10, 8, -1.0, 0.5)


class TestBatchedAcceptance:

    @staticmethod
    @pytest.mark.parametrize("rule", list(CrossoverAcceptRule))
    @pytest.mark.parametrize("temperature", [1e-300, 0.5, 3.0, 1e9])
    def test_crossover_matches_scalar(rule, temperature):
        rng = np.random.default_rng(21)
        t1 = rng.integers(0, 20, size=500)
        t2 = rng.integers(0, 20, size=500)
        u = rng.random(500)
        expected = [crossover_accept(int(a), int(b), temperature, float(x), rule) for a, b, x in zip(t1, t2, u)]
        assert crossover_accept_many(t1, t2, temperature, u, rule).tolist() == expected

    @staticmethod
    @pytest.mark.parametrize("temperature", [1e-300, 0.5, 3.0, 1e9])
    def test_mutation_matches_scalar(temperature):
        rng = np.random.default_rng(22)
        old = rng.integers(0, 20, size=500)
        new = rng.integers(0, 20, size=500)
        u = rng.random(500)
        expected = [mutation_accept(int(a), int(b), temperature, float(x)) for a, b, x in zip(old, new, u)]
        assert mutation_accept_many(old, new, temperature, u).tolist() == expected

    @staticmethod
    def test_rejects_non_positive_temperature():
        with pytest.raises(ValueError):
            mutation_accept_many([1], [0], 0.0, [0.5])
        with pytest.raises(ValueError):
            crossover_accept_many([1], [0], -1.0, [0.5])
