"""Command-line interface: ``rte plan | estimate | validate | curve``.

Exit codes: 0 ok, 2 bad flags, 3 sample-size budget exceeded, 4 input
errors, 5 coverage validation failed.  Results go to stdout, diagnostics to
stderr.
"""

import json
import sys
from decimal import Decimal

import click

from . import __version__
from .estimators import ObservationKind, estimate_rate, estimate_service_mean
from .io import (
    STDIN,
    InputError,
    InputSpec,
    TableFormat,
    emit_table,
    load_batch,
    write_table,
)
from .mc import SimulationConfig, Target, run_coverage
from .planner import (
    DEFAULT_MAX_N,
    CriterionKind,
    NoSolutionWithinBudget,
    PrecisionSpec,
    curve,
    solve_sample_size,
)

EXIT_BUDGET = 3
EXIT_INPUT = 4
EXIT_VALIDATION = 5

MAX_N_ENV = "RTE_MAX_N"
DEFAULT_DELTAS = "0.05,0.01,0.001"


def _unit_interval(ctx, param, value):
    if value is None:
        return None
    if not 0.0 < value < 1.0:
        raise click.BadParameter(f"must lie in the open interval (0, 1), got {value}")
    return value


def _positive(ctx, param, value):
    if value is not None and value <= 0:
        raise click.BadParameter(f"must be positive, got {value}")
    return value


def _resolve_criterion(target, criterion):
    if target == "rate":
        if criterion == "conservative":
            raise click.BadParameter(
                "the rate target has a single (exact) criterion", param_hint="--criterion")
        return CriterionKind.RATE_EXACT
    if criterion == "exact":
        return CriterionKind.SERVICE_EXACT
    return CriterionKind.SERVICE_CONSERVATIVE


def _fail(message, code):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


target_option = click.option("--target", type=click.Choice(["rate", "service"]), required=True,
                             help="Estimate an arrival rate or a mean service time.")
criterion_option = click.option(
    "--criterion", type=click.Choice(["exact", "conservative"]), default=None,
    help="Service-time criterion (default conservative; 'exact' is an extension).")
max_n_option = click.option("--max-n", type=click.IntRange(min=1), envvar=MAX_N_ENV,
                            default=DEFAULT_MAX_N, show_default=True,
                            help=f"Sample-size budget (env {MAX_N_ENV}).")


def _epsilon_option(required=True):
    return click.option("--epsilon", type=float, required=required, callback=_unit_interval,
                        help="Relative error bound in (0, 1).")


def _delta_option(required=True):
    return click.option("--delta", type=float, required=required, callback=_unit_interval,
                        help="Confidence parameter in (0, 1); coverage is 1 - delta.")


@click.group()
@click.version_option(__version__, prog_name="rte")
def cli():
    """Plan, estimate and validate traffic-parameter estimates with relative error control."""


@cli.command()
@target_option
@_epsilon_option()
@_delta_option()
@criterion_option
@max_n_option
@click.option("--format", "fmt", type=click.Choice(["text", "csv", "ndjson"]), default="text")
def plan(target, epsilon, delta, criterion, max_n, fmt):
    """Least number of observations meeting the (epsilon, delta) contract."""
    kind = _resolve_criterion(target, criterion)
    precision = PrecisionSpec(epsilon, delta)
    try:
        result = solve_sample_size(precision, kind, max_n)
    except NoSolutionWithinBudget as exc:
        _fail(str(exc), EXIT_BUDGET)
    if fmt == "text":
        click.echo(f"n = {result.n}")
        click.echo(f"criterion = {result.criterion.value}")
        click.echo(f"coverage_lb = {result.coverage_lb_at_n:.12g}")
        click.echo(f"epsilon = {epsilon:g}, delta = {delta:g}")
    else:
        write_table([result], sys.stdout, TableFormat(fmt))


@cli.command()
@target_option
@click.option("--input", "input_path", default=STDIN, show_default=True,
              help="Input file, or '-' for stdin.")
@click.option("--format", "fmt", type=click.Choice(["durations", "timestamps", "ndjson"]),
              default="durations", show_default=True)
@click.option("--unit", type=click.Choice(["s", "ms", "us"]), default="s", show_default=True)
@_epsilon_option(required=False)
@_delta_option(required=False)
@criterion_option
@max_n_option
@click.option("--json", "as_json", is_flag=True, help="Print the report as one JSON object.")
def estimate(target, input_path, fmt, unit, epsilon, delta, criterion, max_n, as_json):
    """Point estimate and chi-square pivot interval from observed durations."""
    if (epsilon is None) != (delta is None):
        raise click.UsageError("--epsilon and --delta must be given together")
    kind = _resolve_criterion(target, criterion)
    precision = PrecisionSpec(epsilon, delta) if epsilon is not None else None
    obs_kind = ObservationKind.INTERARRIVAL if target == "rate" else ObservationKind.SERVICE_TIME
    try:
        batch = load_batch(InputSpec(input_path, fmt, unit), obs_kind)
    except InputError as exc:
        _fail(str(exc), EXIT_INPUT)
    try:
        if target == "rate":
            report = estimate_rate(batch, precision, max_n=max_n)
        else:
            report = estimate_service_mean(batch, precision, max_n=max_n, criterion=kind)
    except NoSolutionWithinBudget as exc:
        _fail(str(exc), EXIT_BUDGET)

    record = {
        "target": target,
        "point": report.point,
        "n": report.n_used,
        "ci_lower": report.ci_lower,
        "ci_upper": report.ci_upper,
        "ci_level": report.ci_level,
        "stddev": report.stddev_estimate,
        "required_n": report.required_n,
        "guarantee_met": report.guarantee_met,
    }
    if as_json:
        click.echo(json.dumps(record))
    else:
        label = "rate" if target == "rate" else "mean"
        units = "1/s" if target == "rate" else "s"
        click.echo(f"{label} = {report.point:.12g} {units}")
        click.echo(f"n = {report.n_used}")
        click.echo(f"ci({report.ci_level:g}) = [{report.ci_lower:.12g}, {report.ci_upper:.12g}]"
                   " (post-hoc pivot interval)")
        if report.stddev_estimate is not None:
            click.echo(f"stddev = {report.stddev_estimate:.12g} (diagnostic only)")
    if report.guarantee_met is not None and not as_json:
        if report.guarantee_met:
            msg = (f"guarantee met: n = {report.n_used} >= planned {report.required_n} for "
                   f"epsilon={epsilon:g}, delta={delta:g}")
        else:
            msg = (f"warning: guarantee not met: n = {report.n_used} < planned "
                   f"{report.required_n} for epsilon={epsilon:g}, delta={delta:g}")
        click.echo(msg)


@cli.command()
@target_option
@click.option("--true-param", type=float, required=True, callback=_positive,
              help="True rate (1/s) or mean service time (s) to simulate.")
@_epsilon_option()
@_delta_option()
@click.option("--trials", type=click.IntRange(min=1), default=10_000, show_default=True)
@click.option("--seed", type=click.IntRange(min=0, max=2**64 - 1), required=True)
@click.option("--n", "n_obs", type=click.IntRange(min=1), default=None,
              help="Observations per trial (default: the planned n).")
@criterion_option
@max_n_option
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Print the report as one JSON object.")
def validate(target, true_param, epsilon, delta, trials, seed, n_obs, criterion, max_n,
             workers, as_json):
    """Monte Carlo check that coverage reaches 1 - delta (within 3 standard errors)."""
    kind = _resolve_criterion(target, criterion)
    precision = PrecisionSpec(epsilon, delta)
    if n_obs is None:
        try:
            n_obs = solve_sample_size(precision, kind, max_n).n
        except NoSolutionWithinBudget as exc:
            _fail(str(exc), EXIT_BUDGET)
    config = SimulationConfig(true_param, n_obs, trials, seed,
                              Target.RATE if target == "rate" else Target.SERVICE_MEAN)
    report = run_coverage(config, precision, workers=workers)
    if as_json:
        click.echo(json.dumps({
            "n": n_obs,
            "trials": report.trials,
            "hits": report.hits,
            "empirical_coverage": report.empirical_coverage,
            "std_error": report.std_error,
            "nominal_floor": report.nominal_floor,
            "pass": report.passed,
        }))
    else:
        click.echo(f"n = {n_obs}")
        click.echo(f"trials = {report.trials}, hits = {report.hits}")
        click.echo(f"empirical_coverage = {report.empirical_coverage:.6f}")
        click.echo(f"std_error = {report.std_error:.6f}")
        click.echo(f"nominal_floor = {report.nominal_floor:g}")
        click.echo("PASS" if report.passed else "FAIL")
    if not report.passed:
        sys.exit(EXIT_VALIDATION)


def epsilon_grid(start, stop, step):
    """start, start + step, ... up to stop inclusive, computed in decimal."""
    start, stop, step = (Decimal(str(v)) for v in (start, stop, step))
    if step <= 0:
        raise ValueError("step must be positive")
    if stop < start:
        raise ValueError("epsilon-to must not be below epsilon-from")
    grid = []
    value = start
    while value <= stop:
        grid.append(float(value))
        value += step
    return grid


@cli.command("curve")
@target_option
@criterion_option
@click.option("--epsilon-from", type=float, required=True, callback=_unit_interval)
@click.option("--epsilon-to", type=float, required=True, callback=_unit_interval)
@click.option("--epsilon-step", type=float, required=True, callback=_positive)
@click.option("--deltas", default=DEFAULT_DELTAS, show_default=True,
              help="Comma-separated confidence parameters.")
@click.option("--output", default=STDIN, show_default=True, help="Output file or '-'.")
@click.option("--format", "fmt", type=click.Choice(["csv", "ndjson"]), default="csv",
              show_default=True)
@max_n_option
def curve_cmd(target, criterion, epsilon_from, epsilon_to, epsilon_step, deltas, output, fmt,
              max_n):
    """Sample size over an epsilon grid for each delta, as a table."""
    kind = _resolve_criterion(target, criterion)
    try:
        grid = epsilon_grid(epsilon_from, epsilon_to, epsilon_step)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--epsilon-from/--epsilon-to") from None
    try:
        delta_list = [float(d) for d in deltas.split(",") if d.strip()]
    except ValueError:
        raise click.BadParameter(f"not a list of numbers: {deltas!r}",
                                 param_hint="--deltas") from None
    if not delta_list or not all(0.0 < d < 1.0 for d in delta_list):
        raise click.BadParameter("every delta must lie in the open interval (0, 1)",
                                 param_hint="--deltas")
    rows = curve(grid, delta_list, kind, max_n)
    try:
        emit_table(rows, TableFormat(fmt), output)
    except OSError as exc:
        _fail(str(exc), EXIT_INPUT)
    exceeded = sum(r.budget_exceeded for r in rows)
    if exceeded:
        click.echo(f"note: {exceeded} cell(s) exceed max-n={max_n}", err=True)


def main():
    cli()
