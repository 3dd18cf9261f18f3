# orchestrator/cli.py

"""
Command-line front end.

    python -m orchestrator run --scenario incident_1.1 --method BF --seed 1
    python -m orchestrator compare --scenario incident_1.1 --methods BP,VP,BF,DAT,beta-dat --seeds 20
    python -m orchestrator sweep --scenario incident_1.1 --method DAT --rates 0.1,0.5,0.75,1.0 --seeds 20
    python -m orchestrator mine --dataset transactions.txt --supervised
    python -m orchestrator combine --masses example_masses.txt --betp
    python -m orchestrator report --log results/events.csv --scenario incident_1.1

Exit codes: 0 success, 1 runtime or domain error, 2 usage or configuration error.
"""

import functools
import logging
from pathlib import Path
from typing import List

import click
from pydantic import ValidationError

from agents.analysis_agent import MetricsError
from agents.decision_agent import DecisionError, Method
from agents.evidence import EvidenceError, combine_all, pignistic, validate_mass
from agents.rule_mining import MiningConfig, MiningError, mine, mine_supervised
from data_ingestion.preprocess import (
    FormatError,
    betp_to_frame,
    mass_to_frame,
    read_dataset,
    read_event_log,
    read_masses,
    rulebook_to_csv,
    support_to_frame,
    write_rulebook,
)
from data_ingestion.scenario_loader import ScenarioError, load_scenario
from orchestrator import main as experiments
from orchestrator.settings import configure_logging, get_settings
from trafficsim.radio import SimulationError

logger = logging.getLogger(__name__)

CONFIG_ERRORS = (ScenarioError, FormatError, MiningError, ValidationError)
RUNTIME_ERRORS = (EvidenceError, DecisionError, SimulationError, MetricsError)


class InvalidMass(click.ClickException):
    exit_code = 2


def _exit_codes(command):
    """Map domain exceptions onto the CLI exit-code contract."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except CONFIG_ERRORS as exc:
            click.echo(f"Error: {exc}", err=True)
            raise click.exceptions.Exit(2)
        except RUNTIME_ERRORS as exc:
            click.echo(f"Error: {exc}", err=True)
            raise click.exceptions.Exit(1)

    return wrapper


# --- Flag parsing ---

def _method(ctx, param, value):
    try:
        return Method.from_name(value)
    except DecisionError:
        raise click.BadParameter(f"unknown method '{value}'")


def _methods(ctx, param, value) -> List[Method]:
    names = [v for v in value.split(",") if v.strip()]
    if not names:
        raise click.BadParameter("at least one method is required")
    return [_method(ctx, param, name) for name in names]


def _rates(ctx, param, value) -> List[float]:
    rates = []
    for text in value.split(","):
        try:
            rate = float(text)
        except ValueError:
            raise click.BadParameter(f"'{text}' is not a number")
        if not 0.0 <= rate <= 1.0:
            raise click.BadParameter(f"penetration rate {rate:g} is outside [0, 1]")
        rates.append(rate)
    return rates


def _load(reference: str):
    return load_scenario(reference, get_settings().scenario_dir)


def _out_dir(value):
    return Path(value) if value else get_settings().out_dir


scenario_option = click.option("--scenario", "scenario_ref", required=True, help="Bundled scenario name or TOML path.")
out_option = click.option("--out", "out", type=click.Path(file_okay=False), default=None, help="Output directory.")
workers_option = click.option("--workers", type=click.IntRange(min=1), default=None, help="Parallel runs.")


@click.group()
@click.option("--log-level", default=None, help="Overrides CONGESTION_LOG_LEVEL.")
def cli(log_level):
    """Cooperative congestion-cause simulation and evaluation."""
    configure_logging(log_level)


@cli.command()
@scenario_option
@click.option("--method", default="VP", callback=_method, help="BP, VP, BF, DAT or beta-dat.")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@out_option
@_exit_codes
def run(scenario_ref, method, seed, out):
    """Run one simulation and write events.csv, metrics.csv and accuracy.csv."""
    scenario = _load(scenario_ref)
    metrics = experiments.run_single(scenario, method, seed, _out_dir(out))
    click.echo(
        f"{metrics.scenario} {metrics.method.value} seed={metrics.seed}: "
        f"detection={metrics.detection_time} false-alarms={metrics.false_alarm_pct:.1f}% "
        f"final-accuracy={metrics.final_accuracy:.3f}"
    )


@cli.command()
@scenario_option
@click.option("--methods", default="BP,VP,BF,DAT,beta-dat", callback=_methods, show_default=True)
@click.option("--seeds", type=click.IntRange(min=1), default=1, show_default=True, help="Seeds 0..K-1.")
@workers_option
@out_option
@_exit_codes
def compare(scenario_ref, methods, seeds, workers, out):
    """Run every method over K seeds and write summary.csv."""
    scenario = _load(scenario_ref)
    summary = experiments.compare_methods(
        scenario, methods, list(range(seeds)), _out_dir(out), workers or get_settings().workers,
    )
    click.echo(summary.to_csv(index=False, lineterminator="\n"), nl=False)


@cli.command()
@scenario_option
@click.option("--method", default="VP", callback=_method)
@click.option("--rates", default="0.1,0.5,0.75,1.0", callback=_rates, show_default=True)
@click.option("--seeds", type=click.IntRange(min=1), default=1, show_default=True, help="Seeds 0..K-1.")
@workers_option
@out_option
@_exit_codes
def sweep(scenario_ref, method, rates, seeds, workers, out):
    """Penetration-rate sweep; writes sweep.csv and sweep_summary.csv."""
    scenario = _load(scenario_ref)
    table = experiments.sweep(scenario, method, rates, list(range(seeds)), _out_dir(out), workers or get_settings().workers)
    click.echo(f"{len(table)} runs over {len(rates)} rates")


@cli.command("mine")
@click.option("--dataset", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--minsup", type=float, default=0.25, show_default=True)
@click.option("--mincon", type=float, default=0.8, show_default=True)
@click.option("--supervised", is_flag=True, help="Mine correction rules from labeled transactions.")
@click.option("--out", type=click.Path(file_okay=False), default=None)
@_exit_codes
def mine_command(dataset, minsup, mincon, supervised, out):
    """Mine a rulebook and print it as CSV."""
    cfg = MiningConfig(minsup=minsup, mincon=mincon)
    data = read_dataset(dataset)
    book = mine_supervised(data, cfg) if supervised else mine(data, cfg)
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        write_rulebook(book, Path(out) / "rulebook.csv")
    click.echo(rulebook_to_csv(book), nl=False)


@cli.command()
@click.option("--masses", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--rule", type=click.Choice(["conjunctive", "dempster"]), default="conjunctive", show_default=True)
@click.option("--betp", is_flag=True, help="Append the pignistic vector.")
@click.option("--support", is_flag=True, help="Append belief and plausibility of each focal element.")
@_exit_codes
def combine(masses, rule, betp, support):
    """Fold the masses of a file and print the result as CSV."""
    loaded = read_masses(masses)
    for i, m in enumerate(loaded, start=1):
        verdict = validate_mass(m)
        if not verdict:
            raise InvalidMass(f"mass {i} is not a valid mass function: {verdict.violation}")
    combined = combine_all(loaded, rule)
    click.echo(mass_to_frame(combined).to_csv(index=False, lineterminator="\n"), nl=False)
    if betp:
        click.echo(betp_to_frame(pignistic(combined)).to_csv(index=False, lineterminator="\n"), nl=False)
    if support:
        click.echo(support_to_frame(combined).to_csv(index=False, lineterminator="\n"), nl=False)


@cli.command()
@click.option("--log", "log_path", required=True, type=click.Path(exists=True, dir_okay=False))
@scenario_option
@out_option
@_exit_codes
def report(log_path, scenario_ref, out):
    """Recompute run metrics from a saved events.csv."""
    scenario = _load(scenario_ref)
    metrics = experiments.report_from_log(read_event_log(log_path), scenario, _out_dir(out))
    click.echo(
        f"detection={metrics.detection_time} false-alarms={metrics.false_alarm_pct:.1f}% "
        f"final-accuracy={metrics.final_accuracy:.3f} gap-p85={metrics.gap_p85}"
    )


def main():
    cli(prog_name="orchestrator")
