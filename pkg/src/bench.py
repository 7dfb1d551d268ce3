"""Experiment harness: run (instance, variant, seed) grids and render reports."""

from __future__ import annotations

import csv
import glob
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Literal, Optional, Union

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, model_validator
from rich.console import Console
from rich.table import Table

from .cnf import CnfFormula, DimacsError, generate_planted_ksat, generate_random_ksat, read_dimacs
from .solver import SolverConfig, Variant, solve

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("instance", "variant", "seed", "solved", "generations", "best_fitness", "m", "n", "wall_ms")

_LIST_FIELDS = {"instance_seeds", "files", "variants", "run_seeds"}


class ReportFormat(str, Enum):
    TABLE = "table"
    CSV = "csv"
    JSONL = "jsonl"


class ExperimentSpec(BaseModel):
    """What to run: an instance source, the variants, and explicit run seeds."""

    model_config = ConfigDict(extra="forbid")

    source: Literal["random", "planted", "files"] = "random"
    num_vars: Optional[int] = Field(None, ge=1)
    num_clauses: Optional[int] = Field(None, ge=0)
    instance_seeds: list[int] = Field(default_factory=lambda: [0])
    files: list[Path] = Field(default_factory=list)
    variants: list[Variant] = Field(default_factory=lambda: list(Variant))
    runs_per_instance: int = Field(10, ge=1)
    run_seeds: Optional[list[int]] = None
    config: SolverConfig = Field(default_factory=SolverConfig)

    @model_validator(mode="after")
    def _check(self) -> "ExperimentSpec":
        if self.source in ("random", "planted"):
            if self.num_vars is None or self.num_clauses is None:
                raise ValueError(f"{self.source} source needs num_vars and num_clauses")
            if not self.instance_seeds:
                raise ValueError(f"{self.source} source needs at least one instance seed")
        elif not self.files:
            raise ValueError("files source needs at least one file")
        if not self.variants:
            raise ValueError("at least one variant is required")
        if self.run_seeds is None:
            self.run_seeds = list(range(self.runs_per_instance))
        elif len(self.run_seeds) != self.runs_per_instance and "runs_per_instance" in self.model_fields_set:
            raise ValueError(
                f"runs_per_instance={self.runs_per_instance} but {len(self.run_seeds)} run seeds given"
            )
        else:
            self.runs_per_instance = len(self.run_seeds)
        if not self.run_seeds or any(s < 0 for s in self.run_seeds):
            raise ValueError("run seeds must be a non-empty list of non-negative integers")
        return self

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ExperimentSpec":
        """Load a ``KEY=value`` spec file.

        Keys are spec fields or solver config fields (case-insensitive); list
        values are comma-separated and file entries may be globs relative to the
        spec file.
        """
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"spec file not found: {path}")
        raw = {key.lower(): value for key, value in dotenv_values(path).items() if value is not None}

        spec_fields, config_fields = {}, {}
        for key, value in raw.items():
            if key in _LIST_FIELDS:
                items = [item.strip() for item in value.split(",") if item.strip()]
                spec_fields[key] = [item.lower() for item in items] if key == "variants" else items
            elif key in cls.model_fields and key != "config":
                spec_fields[key] = value
            elif key in SolverConfig.model_fields:
                config_fields[key] = value
            else:
                raise ValueError(f"unknown key {key.upper()} in {path}")

        if "files" in spec_fields:
            spec_fields["files"] = _expand_files(spec_fields["files"], path.parent)
        spec_fields["config"] = SolverConfig.model_validate(config_fields)
        return cls.model_validate(spec_fields)


def _expand_files(patterns: Iterable[str], base: Path) -> list[Path]:
    files: list[Path] = []
    for pattern in patterns:
        full = pattern if Path(pattern).is_absolute() else str(base / pattern)
        matches = sorted(glob.glob(full))
        if matches:
            files.extend(Path(m) for m in matches)
        else:
            # reported as unreadable by the run
            files.append(Path(full))
    return files


class RunRecord(BaseModel):
    instance: str
    variant: Variant
    seed: int
    solved: bool
    generations: int
    best_fitness: int
    m: int
    n: int
    wall_ms: float = 0.0


class AggregateStats(BaseModel):
    variant: Variant
    runs: int
    successes: int
    success_rate: float
    # Over successful runs only; None when nothing was solved.
    mean_generations: Optional[float] = None
    mean_best_unsat: float


class InstanceError(BaseModel):
    instance: str
    message: str


class ExperimentReport(BaseModel):
    spec: ExperimentSpec
    records: list[RunRecord]
    aggregates: list[AggregateStats]
    errors: list[InstanceError] = Field(default_factory=list)


# --- Running --------------------------------------------------------------


def _load_instances(spec: ExperimentSpec) -> tuple[list[tuple[str, CnfFormula]], list[InstanceError]]:
    instances, errors = [], []
    k = spec.config.clause_length
    if spec.source == "random":
        for seed in spec.instance_seeds:
            name = f"random-n{spec.num_vars}-m{spec.num_clauses}-s{seed}"
            instances.append((name, generate_random_ksat(spec.num_vars, spec.num_clauses, seed, k)))
        return instances, errors
    if spec.source == "planted":
        for seed in spec.instance_seeds:
            name = f"planted-n{spec.num_vars}-m{spec.num_clauses}-s{seed}"
            formula, _ = generate_planted_ksat(spec.num_vars, spec.num_clauses, seed, k)
            instances.append((name, formula))
        return instances, errors

    for path in spec.files:
        try:
            instances.append((path.name, read_dimacs(path)))
        except (OSError, UnicodeDecodeError, DimacsError) as e:
            logger.warning("skipping %s: %s", path, e)
            errors.append(InstanceError(instance=path.name, message=str(e)))
    return instances, errors


def _run_cell(instance: str, formula: CnfFormula, config: SolverConfig, seed: int) -> RunRecord:
    started = time.perf_counter()
    result = solve(formula, config, seed)
    return RunRecord(
        instance=instance,
        variant=config.variant,
        seed=seed,
        solved=result.solved,
        generations=result.high_level_generations_used,
        best_fitness=result.best_fitness,
        m=formula.num_clauses,
        n=formula.num_vars,
        wall_ms=(time.perf_counter() - started) * 1000.0,
    )


def _record_key(record: RunRecord) -> tuple:
    return record.instance, record.variant.value, record.seed


def aggregate(records: Iterable[RunRecord], variants: Optional[Iterable[Variant]] = None) -> list[AggregateStats]:
    records = list(records)
    order = list(variants) if variants is not None else sorted({r.variant for r in records}, key=lambda v: v.value)
    stats = []
    for variant in order:
        runs = [r for r in records if r.variant is variant]
        if not runs:
            continue
        solved = [r for r in runs if r.solved]
        stats.append(
            AggregateStats(
                variant=variant,
                runs=len(runs),
                successes=len(solved),
                success_rate=len(solved) / len(runs),
                mean_generations=sum(r.generations for r in solved) / len(solved) if solved else None,
                mean_best_unsat=sum(r.m - r.best_fitness for r in runs) / len(runs),
            )
        )
    return stats


def run_experiment(
    spec: ExperimentSpec,
    workers: int = 1,
    progress: Optional[Callable[[RunRecord], None]] = None,
) -> ExperimentReport:
    """Execute every (instance, variant, seed) cell and aggregate per variant."""
    configs = {
        variant: SolverConfig.model_validate({**spec.config.model_dump(), "variant": variant})
        for variant in spec.variants
    }
    instances, errors = _load_instances(spec)
    cells = [
        (name, formula, configs[variant], seed)
        for name, formula in instances
        for variant in spec.variants
        for seed in spec.run_seeds
    ]
    logger.info("running %d cells over %d instances", len(cells), len(instances))

    records: list[RunRecord] = []
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_cell, *cell) for cell in cells]
            for future in futures:
                records.append(future.result())
                if progress:
                    progress(records[-1])
    else:
        for cell in cells:
            records.append(_run_cell(*cell))
            if progress:
                progress(records[-1])

    records.sort(key=_record_key)
    return ExperimentReport(
        spec=spec,
        records=records,
        aggregates=aggregate(records, spec.variants),
        errors=errors,
    )


# --- Reporting ------------------------------------------------------------


def _config_items(spec: ExperimentSpec) -> list[tuple[str, str]]:
    items = []
    for key, value in spec.model_dump(mode="json").items():
        if key == "config":
            items.extend((f"config.{k}", str(v)) for k, v in value.items())
        elif isinstance(value, list):
            items.append((key, ",".join(str(v) for v in value)))
        else:
            items.append((key, "" if value is None else str(value)))
    return items


def _format_mean(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.1f}"


def _render_table(report: ExperimentReport) -> str:
    variants = report.spec.variants
    table = Table(title="Mean high-level generations and success rate")
    table.add_column("m", justify="right")
    table.add_column("n", justify="right")
    for variant in variants:
        table.add_column(f"Gens {variant.value.upper()}", justify="right")
    for variant in variants:
        table.add_column(f"Success {variant.value.upper()}", justify="right")

    groups = sorted({(r.m, r.n) for r in report.records}, key=lambda mn: (mn[1], mn[0]))
    for m, n in groups:
        stats = {s.variant: s for s in aggregate([r for r in report.records if (r.m, r.n) == (m, n)], variants)}
        means = [_format_mean(stats[v].mean_generations) if v in stats else "-" for v in variants]
        rates = [f"{stats[v].success_rate:.0%}" if v in stats else "-" for v in variants]
        table.add_row(str(m), str(n), *means, *rates)

    summary = Table(title="Per-variant totals")
    for column in ("variant", "runs", "successes", "success rate", "mean gens", "mean best unsat"):
        summary.add_column(column, justify="right")
    for s in report.aggregates:
        summary.add_row(
            s.variant.value, str(s.runs), str(s.successes), f"{s.success_rate:.0%}",
            _format_mean(s.mean_generations), f"{s.mean_best_unsat:.2f}",
        )

    console = Console(file=io.StringIO(), record=True, width=120, color_system=None)
    console.print(table)
    console.print(summary)
    for error in report.errors:
        console.print(f"error: {error.instance}: {error.message}", markup=False)
    console.print("config: " + " ".join(f"{k}={v}" for k, v in _config_items(report.spec)), markup=False)
    return console.export_text()


def _render_csv(report: ExperimentReport) -> str:
    out = io.StringIO()
    for key, value in _config_items(report.spec):
        out.write(f"# {key}={value}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in report.records:
        writer.writerow([
            r.instance, r.variant.value, r.seed, "true" if r.solved else "false",
            r.generations, r.best_fitness, r.m, r.n, f"{r.wall_ms:.3f}",
        ])
    return out.getvalue()


def _render_jsonl(report: ExperimentReport) -> str:
    lines = [json.dumps({"type": "config", "spec": report.spec.model_dump(mode="json")})]
    lines.extend(json.dumps({"type": "run", **r.model_dump(mode="json")}) for r in report.records)
    lines.extend(json.dumps({"type": "aggregate", **s.model_dump(mode="json")}) for s in report.aggregates)
    lines.extend(json.dumps({"type": "error", **e.model_dump(mode="json")}) for e in report.errors)
    return "\n".join(lines) + "\n"


def emit_report(report: ExperimentReport, fmt: Union[ReportFormat, str] = ReportFormat.TABLE) -> str:
    try:
        fmt = ReportFormat(fmt)
    except ValueError:
        raise ValueError(f"unknown report format {fmt!r}; expected one of table, csv, jsonl") from None
    if not report.records and not report.errors:
        raise ValueError("report has no results")
    if fmt is ReportFormat.CSV:
        return _render_csv(report)
    if fmt is ReportFormat.JSONL:
        return _render_jsonl(report)
    return _render_table(report)


def parse_csv_records(text: str) -> list[RunRecord]:
    """Read back the run rows of a CSV report (comment lines skipped)."""
    rows = csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#"))
    return [
        RunRecord(
            instance=row["instance"], variant=row["variant"], seed=int(row["seed"]),
            solved=row["solved"] == "true", generations=int(row["generations"]),
            best_fitness=int(row["best_fitness"]), m=int(row["m"]), n=int(row["n"]),
            wall_ms=float(row["wall_ms"]),
        )
        for row in rows
    ]


def parse_jsonl_records(text: str) -> list[RunRecord]:
    records = []
    for line in text.splitlines():
        if not line.strip():
            continue
        payload = json.loads(line)
        if payload.pop("type") == "run":
            records.append(RunRecord.model_validate(payload))
    return records
