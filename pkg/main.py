#!/usr/bin/env python3
"""SAT-GA - hierarchical genetic SAT solver and benchmark runner.

Subcommands:
  solve <cnf-file>   search for a satisfying assignment (exit 10 = SAT, 20 = budget exhausted, 1 = error)
  gen                write a random k-SAT instance in DIMACS format
  bench --spec FILE  run an experiment grid and print a report
"""

import argparse
import os
import sys
from pathlib import Path
from typing import Optional

from rich.console import Console
from rich.progress import Progress

# Add src to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.annealing import CrossoverAcceptRule
from src.bench import ExperimentSpec, ReportFormat, emit_report, run_experiment
from src.cnf import format_assignment, generate_planted_ksat, generate_random_ksat, read_dimacs, serialize_dimacs
from src.settings import configure_logging, load_settings
from src.solver import SolverConfig, Variant, solve, write_trace_csv

EXIT_SAT = 10
EXIT_UNKNOWN = 20
EXIT_ERROR = 1

# Results go to stdout unstyled; diagnostics go to stderr.
out = Console(highlight=False, soft_wrap=True)
console = Console(stderr=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="satga", description="Hierarchical genetic SAT solver")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="Solve a DIMACS CNF file")
    p_solve.add_argument("cnf_file", type=Path)
    p_solve.add_argument("--variant", choices=[v.value for v in Variant], default=Variant.BEA.value)
    p_solve.add_argument("--seed", type=int, default=0)
    p_solve.add_argument("--max-gens", type=int, default=None, help="High-level generation budget")
    p_solve.add_argument(
        "--accept-rule", choices=[r.value for r in CrossoverAcceptRule], default=CrossoverAcceptRule.ABSOLUTE.value
    )
    p_solve.add_argument("--trace", type=Path, default=None, help="Write the per-generation trace as CSV")
    p_solve.add_argument("--workers", type=int, default=None)

    p_gen = sub.add_parser("gen", help="Generate a random k-SAT instance")
    p_gen.add_argument("--vars", type=int, required=True)
    p_gen.add_argument("--clauses", type=int, required=True)
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--clause-length", type=int, default=3)
    p_gen.add_argument("--planted", action="store_true", help="keep only clauses a hidden assignment satisfies")
    p_gen.add_argument("-o", "--output", type=Path, default=None)

    p_bench = sub.add_parser("bench", help="Run an experiment spec")
    p_bench.add_argument("--spec", type=Path, required=True)
    p_bench.add_argument("--format", choices=[f.value for f in ReportFormat], default=ReportFormat.TABLE.value)
    p_bench.add_argument("--workers", type=int, default=None)
    p_bench.add_argument("-o", "--output", type=Path, default=None)

    return parser


def cmd_solve(args, workers: int) -> int:
    formula = read_dimacs(args.cnf_file)
    overrides = {
        "variant": args.variant,
        "crossover_accept_rule": args.accept_rule,
        "workers": args.workers or workers,
    }
    if args.max_gens is not None:
        overrides["max_high_level_generations"] = args.max_gens
    config = SolverConfig.model_validate(overrides)

    with console.status(f"[bold]Solving with {config.variant.value.upper()}...[/bold]"):
        result = solve(formula, config, args.seed)

    if args.trace:
        write_trace_csv(result, args.trace)

    out.print("s SATISFIABLE" if result.solved else "s UNKNOWN")
    out.print(f"c generations {result.high_level_generations_used}")
    out.print(f"c best_fitness {result.best_fitness}/{formula.num_clauses}")
    if result.solved:
        out.print(format_assignment(result.best_individual.genome))
    return EXIT_SAT if result.solved else EXIT_UNKNOWN


def cmd_gen(args) -> int:
    if args.planted:
        formula, _ = generate_planted_ksat(args.vars, args.clauses, args.seed, args.clause_length)
    else:
        formula = generate_random_ksat(args.vars, args.clauses, args.seed, args.clause_length)
    text = serialize_dimacs(formula)
    if args.output:
        args.output.write_text(text, encoding="utf-8")
        console.print(f"[green]Wrote {args.output} ({formula.num_vars} vars, {formula.num_clauses} clauses)[/green]")
    else:
        out.out(text, end="")
    return 0


def cmd_bench(args, workers: int) -> int:
    spec = ExperimentSpec.from_file(args.spec)
    instances = len(spec.files) if spec.source == "files" else len(spec.instance_seeds)
    total = instances * len(spec.variants) * len(spec.run_seeds)

    with Progress(console=console, transient=True) as progress:
        task = progress.add_task("Running cells", total=total)
        report = run_experiment(spec, workers=args.workers or workers, progress=lambda _: progress.advance(task))

    for error in report.errors:
        console.print(f"Skipped {error.instance}: {error.message}", style="yellow", markup=False)
    if not report.records:
        console.print("[red]No runs completed[/red]")
        return EXIT_ERROR

    text = emit_report(report, args.format)
    if args.output:
        args.output.write_text(text, encoding="utf-8")
        console.print(f"[green]Report written to {args.output}[/green]")
    else:
        out.out(text, end="")
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    settings = load_settings()
    configure_logging(settings.log_level)
    args = build_parser().parse_args(argv)

    try:
        if args.command == "solve":
            return cmd_solve(args, settings.workers)
        if args.command == "gen":
            return cmd_gen(args)
        return cmd_bench(args, settings.workers)
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted[/yellow]")
        return EXIT_ERROR
    except (ValueError, OSError) as e:
        console.print(f"Error: {e}", style="red", markup=False)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
