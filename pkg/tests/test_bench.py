import json
import os

import pytest

from src.bench import (
    CSV_COLUMNS,
    ExperimentSpec,
    aggregate,
    emit_report,
    parse_csv_records,
    parse_jsonl_records,
    run_experiment,
)
from src.solver import SolverConfig, Variant

QUICK = SolverConfig(bottom_generations=3, max_high_level_generations=4, mutation_rate=0.05)


def without_timing(records):
    return [r.model_dump(exclude={"wall_ms"}) for r in records]


@pytest.fixture
def contradiction_file(tmp_path):
    path = tmp_path / "contradiction.cnf"
    path.write_text("c x1 and not x1\np cnf 1 2\n1 0\n-1 0\n")
    return path


@pytest.fixture
def contradiction_spec(contradiction_file):
    return ExperimentSpec(
        source="files",
        files=[contradiction_file],
        variants=[Variant.BEA],
        run_seeds=[0, 1, 2],
        config=QUICK,
    )


@pytest.fixture
def random_spec():
    return ExperimentSpec(
        num_vars=8,
        num_clauses=20,
        instance_seeds=[0, 1],
        run_seeds=[0, 1],
        config=SolverConfig(bottom_generations=5, max_high_level_generations=30, mutation_rate=0.05),
    )


class TestExperimentSpec:

    @staticmethod
    def test_defaults():
        spec = ExperimentSpec(num_vars=20, num_clauses=91)
        assert spec.run_seeds == list(range(10))
        assert spec.variants == [Variant.BEA, Variant.BIHGA, Variant.HGA]
        assert spec.config == SolverConfig()

    @staticmethod
    def test_run_seeds_set_count():
        spec = ExperimentSpec(num_vars=5, num_clauses=5, run_seeds=[3, 7])
        assert spec.runs_per_instance == 2

    @staticmethod
    def test_invalid():
        with pytest.raises(ValueError):
            ExperimentSpec(num_vars=20)
        with pytest.raises(ValueError):
            ExperimentSpec(source="files")
        with pytest.raises(ValueError):
            ExperimentSpec(num_vars=5, num_clauses=5, runs_per_instance=3, run_seeds=[0, 1])
        with pytest.raises(ValueError):
            ExperimentSpec(num_vars=5, num_clauses=5, run_seeds=[-1])

    @staticmethod
    def test_from_file(tmp_path, contradiction_file):
        (tmp_path / "other.cnf").write_text("p cnf 1 1\n1 0\n")
        spec_path = tmp_path / "grid.env"
        spec_path.write_text(
            "# small grid\n"
            "SOURCE=files\n"
            "FILES=*.cnf\n"
            "VARIANTS=BEA, hga\n"
            "RUN_SEEDS=4,5\n"
            "MAX_HIGH_LEVEL_GENERATIONS=7\n"
            "MUTATION_RATE=0.01\n"
        )
        spec = ExperimentSpec.from_file(spec_path)
        assert [p.name for p in spec.files] == ["contradiction.cnf", "other.cnf"]
        assert spec.variants == [Variant.BEA, Variant.HGA]
        assert spec.run_seeds == [4, 5]
        assert spec.config.max_high_level_generations == 7
        assert spec.config.mutation_rate == 0.01
        assert spec.config.bottom_generations == 50

    @staticmethod
    def test_from_file_random(tmp_path):
        spec_path = tmp_path / "random.env"
        spec_path.write_text("NUM_VARS=50\nNUM_CLAUSES=215\nINSTANCE_SEEDS=1,2,3\nRUNS_PER_INSTANCE=4\n")
        spec = ExperimentSpec.from_file(spec_path)
        assert (spec.num_vars, spec.num_clauses) == (50, 215)
        assert spec.instance_seeds == [1, 2, 3]
        assert spec.run_seeds == [0, 1, 2, 3]

    @staticmethod
    def test_from_file_rejects_bad_input(tmp_path):
        unknown = tmp_path / "unknown.env"
        unknown.write_text("NUM_VARS=5\nNUM_CLAUSES=5\nPOPULATION=3\n")
        with pytest.raises(ValueError, match="POPULATION"):
            ExperimentSpec.from_file(unknown)

        degenerate = tmp_path / "degenerate.env"
        degenerate.write_text("NUM_VARS=5\nNUM_CLAUSES=5\nALPHA=0\nBETA=0\n")
        with pytest.raises(ValueError):
            ExperimentSpec.from_file(degenerate)

        with pytest.raises(FileNotFoundError):
            ExperimentSpec.from_file(tmp_path / "missing.env")


class TestRunExperiment:

    @staticmethod
    def test_unsatisfiable_instance(contradiction_spec):
        report = run_experiment(contradiction_spec)
        assert len(report.records) == 3
        assert all(not r.solved and r.best_fitness == 1 and r.generations == 4 for r in report.records)
        (stats,) = report.aggregates
        assert stats.success_rate == 0.0
        assert stats.successes == 0
        assert stats.mean_generations is None
        assert stats.mean_best_unsat == 1.0

    @staticmethod
    def test_grid_shape_and_order(random_spec):
        report = run_experiment(random_spec)
        assert len(report.records) == 2 * 3 * 2
        keys = [(r.instance, r.variant.value, r.seed) for r in report.records]
        assert keys == sorted(keys)
        assert {r.instance for r in report.records} == {"random-n8-m20-s0", "random-n8-m20-s1"}
        assert [s.variant for s in report.aggregates] == random_spec.variants
        for r in report.records:
            assert (r.m, r.n) == (20, 8)
            assert 0 <= r.best_fitness <= 20
            assert r.solved == (r.best_fitness == 20)

    @staticmethod
    def test_deterministic(random_spec):
        first = run_experiment(random_spec)
        second = run_experiment(random_spec)
        assert without_timing(first.records) == without_timing(second.records)
        assert first.aggregates == second.aggregates

    @staticmethod
    def test_process_pool_matches_sequential(random_spec):
        sequential = run_experiment(random_spec)
        pooled = run_experiment(random_spec, workers=2)
        assert without_timing(pooled.records) == without_timing(sequential.records)

    @staticmethod
    def test_progress_called_per_cell(contradiction_spec):
        seen = []
        run_experiment(contradiction_spec, progress=seen.append)
        assert len(seen) == 3

    @staticmethod
    def test_unreadable_files_are_recorded(tmp_path, contradiction_file):
        broken = tmp_path / "broken.cnf"
        broken.write_text("p cnf 2 1\n1 3 0\n")
        spec = ExperimentSpec(
            source="files",
            files=[tmp_path / "missing.cnf", broken, contradiction_file],
            variants=[Variant.HGA],
            run_seeds=[0],
            config=QUICK,
        )
        report = run_experiment(spec)
        assert [e.instance for e in report.errors] == ["missing.cnf", "broken.cnf"]
        assert [r.instance for r in report.records] == ["contradiction.cnf"]

    @staticmethod
    def test_non_utf8_file_is_recorded(tmp_path, contradiction_file):
        latin1 = tmp_path / "latin1.cnf"
        latin1.write_bytes(b"c caf\xe9 instance\np cnf 1 1\n1 0\n")
        spec = ExperimentSpec(
            source="files",
            files=[latin1, contradiction_file],
            variants=[Variant.BEA],
            run_seeds=[0],
            config=QUICK,
        )
        report = run_experiment(spec)
        (error,) = report.errors
        assert error.instance == "latin1.cnf"
        assert "utf-8" in error.message
        assert [r.instance for r in report.records] == ["contradiction.cnf"]

    @staticmethod
    def test_planted_source():
        spec = ExperimentSpec(
            source="planted",
            num_vars=12,
            num_clauses=50,
            instance_seeds=[3, 4],
            variants=[Variant.BEA],
            run_seeds=[0],
            config=SolverConfig(bottom_generations=5, max_high_level_generations=40, mutation_rate=0.05),
        )
        report = run_experiment(spec)
        assert [r.instance for r in report.records] == ["planted-n12-m50-s3", "planted-n12-m50-s4"]
        assert all((r.m, r.n) == (50, 12) for r in report.records)
        with pytest.raises(ValueError):
            ExperimentSpec(source="planted", num_vars=12)


class TestAggregate:

    @staticmethod
    def test_mean_generations_over_successes_only(random_spec):
        report = run_experiment(random_spec)
        records = [r.model_copy(update={"solved": i % 2 == 0}) for i, r in enumerate(report.records)]
        for stats in aggregate(records, random_spec.variants):
            runs = [r for r in records if r.variant is stats.variant]
            solved = [r.generations for r in runs if r.solved]
            assert stats.runs == len(runs)
            assert stats.successes == len(solved)
            assert stats.mean_generations == pytest.approx(sum(solved) / len(solved))

    @staticmethod
    def test_empty_variant_skipped(contradiction_spec):
        report = run_experiment(contradiction_spec)
        assert [s.variant for s in aggregate(report.records, list(Variant))] == [Variant.BEA]


class TestReports:

    @staticmethod
    def test_csv_layout(random_spec):
        report = run_experiment(random_spec)
        text = emit_report(report, "csv")
        lines = text.splitlines()
        comments = [line for line in lines if line.startswith("#")]
        body = [line for line in lines if not line.startswith("#")]
        assert "# config.cooling_factor=0.95" in comments
        assert "# run_seeds=0,1" in comments
        assert body[0] == ",".join(CSV_COLUMNS)
        assert len(body) == 1 + len(report.records)

    @staticmethod
    def test_csv_reproduces_aggregates(random_spec):
        report = run_experiment(random_spec)
        records = parse_csv_records(emit_report(report, "csv"))
        assert without_timing(records) == without_timing(report.records)
        assert aggregate(records, random_spec.variants) == report.aggregates

    @staticmethod
    def test_jsonl(contradiction_file):
        spec = ExperimentSpec(
            source="files",
            files=[contradiction_file, contradiction_file.parent / "absent.cnf"],
            variants=[Variant.BEA, Variant.BIHGA],
            run_seeds=[0],
            config=QUICK,
        )
        report = run_experiment(spec)
        text = emit_report(report, "jsonl")
        types = [json.loads(line)["type"] for line in text.splitlines()]
        assert types == ["config", "run", "run", "aggregate", "aggregate", "error"]
        assert parse_jsonl_records(text) == report.records
        config = json.loads(text.splitlines()[0])["spec"]["config"]
        assert config["max_high_level_generations"] == 4

    @staticmethod
    def test_table_dash_when_nothing_solved(contradiction_spec):
        text = emit_report(run_experiment(contradiction_spec), "table")
        row = next(line for line in text.splitlines() if "0%" in line)
        assert "-" in row
        assert "config:" in text

    @staticmethod
    def test_unknown_format(contradiction_spec):
        report = run_experiment(contradiction_spec)
        with pytest.raises(ValueError, match="unknown report format"):
            emit_report(report, "xml")

    @staticmethod
    def test_empty_report(contradiction_spec):
        report = run_experiment(contradiction_spec).model_copy(update={"records": [], "aggregates": []})
        with pytest.raises(ValueError):
            emit_report(report, "csv")


@pytest.mark.slow
def test_variant_ordering_on_planted_n75():
    # Baseline runs that stall use the whole 2000-generation budget, so this
    # takes tens of minutes on a single core.
    spec = ExperimentSpec(
        source="planted",
        num_vars=75,
        num_clauses=325,
        instance_seeds=[0, 1, 2, 3, 4],
        run_seeds=list(range(10)),
        config=SolverConfig(max_high_level_generations=2000),
    )
    report = run_experiment(spec, workers=os.cpu_count() or 1)
    assert not report.errors
    stats = {s.variant: s for s in report.aggregates}
    bea, bihga, hga = stats[Variant.BEA], stats[Variant.BIHGA], stats[Variant.HGA]
    assert bea.runs == bihga.runs == hga.runs == 50
    assert bea.success_rate >= bihga.success_rate >= hga.success_rate
    others = [s.mean_generations for s in (bihga, hga) if s.successes]
    assert bea.successes and all(bea.mean_generations < mean for mean in others)
