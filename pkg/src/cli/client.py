"""Command line client for the inexact inertial ADMM solver and benchmark."""

import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import click
from rich.console import Console
from rich.markup import escape
from rich.panel import Panel
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

from config import settings
from exceptions import ConfigurationError, DatasetError, InertialAdmmException
from admm.parameters import AdmmConfig
from connectors.dataset_loader import Dataset, gen_synthetic, load_dataset, parse_gen_spec, preprocess
from services.batch_processor import REFERENCE_RATIOS, BatchProcessor
from services.solver_service import SolverService

console = Console()

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_IO = 2
EXIT_CONFIG = 3

# keys accepted in --config files, mirroring the flags
CONFIG_KEYS = {'alpha', 'sigma', 'tau', 'gamma', 'theta', 'k0', 'tol', 'max_outer', 'max_inner', 'rule', 'checked'}


def exit_code_for(error: Exception) -> int:
    """0 success, 1 solver failure, 2 I/O or parse failure, 3 invalid configuration."""
    if isinstance(error, ConfigurationError):
        return EXIT_CONFIG
    if isinstance(error, (DatasetError, OSError, json.JSONDecodeError)):
        return EXIT_IO
    return EXIT_SOLVER


def fail(message: str, error: Exception) -> None:
    console.print(f"[red]{message}: {escape(str(error))}[/red]")
    sys.exit(exit_code_for(error))


def load_config_file(path: Optional[str]) -> Dict[str, Any]:
    """Flat key/value JSON; hyphenated keys are accepted."""
    if not path:
        return {}
    with open(path) as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: expected a JSON object")
    values = {key.replace('-', '_'): value for key, value in data.items()}
    unknown = sorted(set(values) - CONFIG_KEYS)
    if unknown:
        raise ConfigurationError(f"{path}: unknown keys {unknown}")
    return values


def build_config(config_path: Optional[str], flags: Dict[str, Any]) -> AdmmConfig:
    """Settings defaults, then the config file, then explicit flags."""
    values = load_config_file(config_path)
    values.update({key: value for key, value in flags.items() if value is not None})
    return AdmmConfig.from_settings(settings, **values)


def collect_datasets(data: Tuple[str, ...], gen: Optional[str], sparsity: float, noise: float,
                     seed: int, count: int) -> List[Dataset]:
    if data:
        return [load_dataset(path) for path in data]
    if gen:
        n, d = parse_gen_spec(gen)
        return [gen_synthetic(n, d, sparsity, noise, seed + i) for i in range(count)]
    raise ConfigurationError("provide --data or --gen")


def solver_options(func):
    """Flags shared by solve and bench; None means 'not given'."""
    options = [
        click.option('--gen', help='Generate a synthetic NxD instance, e.g. 50x100'),
        click.option('--sparsity', default=0.1, show_default=True, help='Fraction of nonzero coefficients'),
        click.option('--noise', default=0.01, show_default=True, help='Noise standard deviation'),
        click.option('--seed', default=0, show_default=True, help='Seed of the synthetic generator'),
        click.option('--alpha', type=float, help=f'Inertial parameter (default {settings.alpha})'),
        click.option('--sigma', type=float, help=f'Relative error tolerance (default {settings.sigma})'),
        click.option('--tau', type=float, help=f'Relaxation parameter (default {settings.tau})'),
        click.option('--gamma', type=float, help=f'Penalty parameter (default {settings.gamma})'),
        click.option('--theta', type=float, help=f'Summability ratio (default {settings.theta})'),
        click.option('--tol', type=float, help=f'Stopping tolerance (default {settings.tol})'),
        click.option('--max-outer', type=int, help=f'Outer iteration cap (default {settings.max_outer})'),
        click.option('--max-inner', type=int, help=f'Inner iteration cap (default {settings.max_inner})'),
        click.option('--rule', type=click.Choice(['constant', 'summability', 'belowbeta']),
                     help=f'Inertial rule (default {settings.rule})'),
        click.option('--checked', is_flag=True, help='Assert the per-iteration invariants'),
        click.option('--config', 'config_path', type=click.Path(), help='Flat JSON file of solver options'),
        click.option('--out', type=click.Path(), default=None, help=f'Output directory (default {settings.output_dir})'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _flags(alpha, sigma, tau, gamma, theta, tol, max_outer, max_inner, rule, checked) -> Dict[str, Any]:
    return {'alpha': alpha, 'sigma': sigma, 'tau': tau, 'gamma': gamma, 'theta': theta, 'tol': tol,
            'max_outer': max_outer, 'max_inner': max_inner, 'rule': rule, 'checked': checked or None}


def _fmt(value: Any, spec: str = '.4f') -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return '-'
    if isinstance(value, float):
        return format(value, spec)
    return str(value)


def create_bench_table(rows: List[Dict[str, Any]], means: Dict[str, float]) -> Table:
    """Rich table of the per-problem comparison."""
    table = Table(title="Inexact ADMM vs inexact inertial ADMM")

    table.add_column("Problem", style="cyan", no_wrap=True)
    table.add_column("n x d", style="magenta")
    for label in ("Outer", "Inner", "Time"):
        table.add_column(f"{label} plain", justify="right")
        table.add_column(f"{label} inertial", justify="right")
        table.add_column(f"{label} ratio", justify="right", style="yellow")

    for row in rows:
        table.add_row(
            row['problem'], f"{row['n']}x{row['d']}",
            _fmt(row['outer_plain']), _fmt(row['outer_inertial']), _fmt(row['outer_ratio']),
            _fmt(row['inner_plain']), _fmt(row['inner_inertial']), _fmt(row['inner_ratio']),
            _fmt(row['time_plain'], '.3f'), _fmt(row['time_inertial'], '.3f'), _fmt(row['time_ratio']),
        )
    table.add_row("Geometric mean", "", "", "", _fmt(means.get('outer_ratio')),
                  "", "", _fmt(means.get('inner_ratio')), "", "", _fmt(means.get('time_ratio')),
                  style="bold")
    table.add_row("Reference suite", "", "", "", _fmt(REFERENCE_RATIOS['outer_ratio']),
                  "", "", _fmt(REFERENCE_RATIOS['inner_ratio']), "", "", _fmt(REFERENCE_RATIOS['time_ratio']),
                  style="dim")
    return table


@click.group()
@click.option('--log-level', default=None, help=f'Logging level (default {settings.log_level})')
@click.pass_context
def cli(ctx, log_level):
    """Inexact inertial ADMM - solve and benchmark LASSO problems."""
    ctx.ensure_object(dict)
    level = (log_level or settings.log_level_value).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )


@cli.command()
@click.option('--data', type=click.Path(), help='Dataset file (.csv, .svm or .libsvm)')
@solver_options
@click.option('--rates', is_flag=True, help='Write the rate report (rates.json)')
def solve(data, gen, sparsity, noise, seed, alpha, sigma, tau, gamma, theta, tol, max_outer,
          max_inner, rule, checked, config_path, out, rates):
    """Solve one LASSO instance and write its summary and iterate log."""
    try:
        config = build_config(config_path, _flags(alpha, sigma, tau, gamma, theta, tol,
                                                  max_outer, max_inner, rule, checked))
        dataset = collect_datasets((data,) if data else (), gen, sparsity, noise, seed, 1)[0]
        scaled, nu = preprocess(dataset)
    except (InertialAdmmException, OSError, json.JSONDecodeError) as e:
        fail("Error preparing run", e)

    out_dir = Path(out or settings.output_dir)
    service = SolverService(str(out_dir))
    try:
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            console=console
        ) as progress:
            task = progress.add_task(f"Solving {scaled.name}...", total=None)
            result = service.solve(scaled, nu, config, rates=rates, out_dir=out_dir)
            progress.remove_task(task)
    except (InertialAdmmException, OSError) as e:
        fail("Error solving", e)

    summary = result.summary
    status_style = "green" if summary.converged else "yellow"
    objective = _fmt(summary.final_objective, '.10g')
    console.print(Panel(
        f"Problem: {summary.name} ({summary.n}x{summary.d}, nu={summary.nu:.4g})\n"
        f"Status: [{status_style}]{summary.status}[/{status_style}]\n"
        f"Outer iterations: {summary.outer_iters}\n"
        f"Inner iterations: {summary.total_inner_iters}\n"
        f"Wall time: {summary.wall_time_seconds:.3f} s\n"
        f"Final residual: {summary.final_residual:.3e}\n"
        f"Final objective: {objective}",
        title="Run Summary"
    ))
    console.print(Panel(
        ", ".join(f"{key}={value}" for key, value in summary.config.items()),
        title="Configuration"
    ))

    if result.rates is not None:
        verdict = {True: "[green]hold[/green]", False: "[red]violated[/red]",
                   None: "[yellow]not applicable[/yellow]"}[result.rates.bounds_ok]
        console.print(f"Rate bounds: {verdict} (C={_fmt(result.rates.C)}, D={_fmt(result.rates.D)}, "
                      f"d0={_fmt(result.rates.d0, '.4g')})")
    console.print(f"Results written to [bold]{out_dir}[/bold]")


@cli.command()
@click.option('--data', type=click.Path(), multiple=True, help='Dataset file; repeat for a suite')
@click.option('--count', default=10, show_default=True, help='Number of synthetic problems (with --gen)')
@solver_options
@click.option('--workers', '-w', type=int, default=None,
              help=f'Number of parallel workers (default {settings.bench_workers}, max 32)')
@click.option('--rates', is_flag=True, help='Write rates.json for every run under runs/')
def bench(data, count, gen, sparsity, noise, seed, alpha, sigma, tau, gamma, theta, tol, max_outer,
          max_inner, rule, checked, config_path, out, workers, rates):
    """Compare inexact ADMM (alpha = 0) with inexact inertial ADMM on a problem suite."""
    workers = workers or settings.bench_workers
    if workers < 1 or workers > 32:
        console.print("[red]Error: Workers must be between 1 and 32[/red]")
        sys.exit(EXIT_CONFIG)

    try:
        config = build_config(config_path, _flags(alpha, sigma, tau, gamma, theta, tol,
                                                  max_outer, max_inner, rule, checked))
        problems = [preprocess(ds) for ds in collect_datasets(data, gen, sparsity, noise, seed, count)]
    except (InertialAdmmException, OSError, json.JSONDecodeError) as e:
        fail("Error preparing bench", e)

    out_dir = Path(out or settings.output_dir)
    processor = BatchProcessor(SolverService(str(out_dir)), max_workers=workers)
    console.print(f"[blue]Benchmarking {len(problems)} problems with {workers} workers...[/blue]")
    try:
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            console=console
        ) as progress:
            task = progress.add_task("Running both methods...", total=None)
            results = processor.run_bench(problems, config, out_dir=out_dir, rates=rates)
            progress.remove_task(task)
    except OSError as e:
        fail("Error writing bench results", e)

    rows = results['table'].to_dict('records')
    console.print(create_bench_table(rows, results['geometric_mean']))
    console.print(Panel(
        f"Total Problems: {results['total_problems']}\n"
        f"Compared: [green]{results['completed']}[/green]\n"
        f"Failed: [red]{results['failed']}[/red]\n"
        f"Table: {results.get('files', {}).get('csv', '-')}",
        title="Bench Results"
    ))

    failed = [c for c in results['comparisons'] if not c.success]
    if failed:
        console.print("\n[red]Failed problems:[/red]")
        for comparison in failed[:10]:
            console.print(f"  - {comparison.name}: {escape(comparison.error)}")
        if len(failed) > 10:
            console.print(f"  ... and {len(failed) - 10} more")
        sys.exit(EXIT_SOLVER)


if __name__ == '__main__':
    cli()
