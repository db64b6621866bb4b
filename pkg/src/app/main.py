"""
Command-line entry point (``cavity-sim``).

- One subcommand per experiment, plus ``preset``, ``rerun`` and ``presets``
- Configs are JSON files; ``--set key=value`` overrides single parameters
- Exit codes: 0 success, 2 invalid input, 3 numerical invariant violated
"""
from functools import wraps
from pathlib import Path
from typing import Optional, Tuple
import json
import logging
import sys

import click

from src.app.api.v1.experiments import (
    compare_checksums,
    list_experiment_presets,
    load_manifest,
    rerun_from_manifest,
    resolve_run_directory,
    run_experiment,
)
from src.app.core.logging import setup_logging
from src.app.schemas.presets import EXPERIMENTS
from src.app.schemas.requests import validate_config
from src.cavity_sim import __version__
from src.cavity_sim.errors import ConfigValidationError, NumericalInvariantError

logger = logging.getLogger("cavity_sim.cli")

EXIT_INVALID = 2
EXIT_NUMERICAL = 3


def _parse_override(item: str) -> Tuple[str, object]:
    if "=" not in item:
        raise ConfigValidationError([f"--set expects key=value, got '{item}'"])
    key, text = item.split("=", 1)
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    return key.strip(), value


def build_raw_config(
    config_path: Optional[str] = None,
    overrides: Tuple[str, ...] = (),
    seed: Optional[int] = None,
    experiment: Optional[str] = None,
    preset: Optional[str] = None,
) -> dict:
    """Merge a JSON config file, the command's experiment/preset and overrides."""
    raw = {}
    if config_path:
        with open(config_path, "r", encoding="utf-8") as f:
            raw = json.load(f)
        if not isinstance(raw, dict):
            raise ConfigValidationError([f"{config_path}: config must be a JSON object"])
    if experiment is not None:
        if raw.get("experiment", experiment) != experiment:
            raise ConfigValidationError([
                f"experiment: config file runs {raw['experiment']}, command is {experiment}"
            ])
        raw["experiment"] = experiment
    if preset is not None:
        raw["preset"] = preset
    params = dict(raw.get("params") or {})
    for item in overrides:
        key, value = _parse_override(item)
        params[key] = value
    if seed is not None:
        params["seed"] = seed
    if params:
        raw["params"] = params
    return raw


def _guarded(func):
    """Map simulator errors to exit codes."""
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ConfigValidationError as e:
            click.echo(str(e), err=True)
            sys.exit(EXIT_INVALID)
        except NumericalInvariantError as e:
            click.echo(f"numerical invariant violated: {e}", err=True)
            sys.exit(EXIT_NUMERICAL)
        except (ValueError, FileNotFoundError, json.JSONDecodeError) as e:
            click.echo(f"invalid input: {e}", err=True)
            sys.exit(EXIT_INVALID)
    return wrapper


def _report(manifest, run_dir: Path) -> None:
    experiment = manifest.config.get("experiment")
    click.echo(f"[OK] {experiment} → {run_dir} ({len(manifest.files)} files, {manifest.wall_time_s:.1f}s)")
    for warning in manifest.warnings:
        click.echo(f"[WARN] {warning}", err=True)


def _execute(raw: dict, out: Optional[str], jobs: Optional[int]) -> None:
    config = validate_config(raw)
    run_dir = resolve_run_directory(config, out)
    manifest = run_experiment(config, out_dir=run_dir, jobs=jobs)
    _report(manifest, run_dir)


def run_options(func):
    func = click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
                        help="Override one parameter (repeatable); VALUE is parsed as JSON when possible.")(func)
    func = click.option("--jobs", type=click.IntRange(min=1), default=None, help="joblib workers.")(func)
    func = click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), default=None, help="RNG seed (u64).")(func)
    func = click.option("--out", type=click.Path(file_okay=False), default=None, help="Run directory.")(func)
    func = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
                        help="JSON experiment config.")(func)
    return func


@click.group()
@click.version_option(__version__, prog_name="cavity-sim")
@click.option("--log-level", default=None, help="Logging level (defaults to settings.log_level).")
def cli(log_level: Optional[str]) -> None:
    """Atom-in-cavity simulator with quantized motion."""
    setup_logging(log_level)


def _experiment_command(name: str):
    @cli.command(name=name, help=f"Run the {name} experiment.")
    @run_options
    @_guarded
    def command(config_path, out, seed, jobs, overrides):
        _execute(build_raw_config(config_path, overrides, seed, experiment=name), out, jobs)
    return command


for _name in EXPERIMENTS:
    _experiment_command(_name)


@cli.command(name="preset")
@click.argument("name")
@run_options
@_guarded
def preset_command(name, config_path, out, seed, jobs, overrides):
    """Run a named preset; explicit parameters override it."""
    _execute(build_raw_config(config_path, overrides, seed, preset=name), out, jobs)


@cli.command(name="rerun")
@click.argument("manifest", type=click.Path(exists=True))
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Run directory.")
@click.option("--jobs", type=click.IntRange(min=1), default=None)
@_guarded
def rerun_command(manifest, out, jobs):
    """Re-execute the resolved config of an earlier run and compare checksums."""
    previous = load_manifest(manifest)
    config = validate_config(previous.config)
    run_dir = Path(out) if out else resolve_run_directory(config.model_copy(update={"output_dir": None}), None)
    current = rerun_from_manifest(manifest, out_dir=run_dir, jobs=jobs)
    _report(current, run_dir)
    differing = compare_checksums(previous, current)
    if differing:
        click.echo(f"[WARN] outputs differ from the original run: {', '.join(differing)}", err=True)
    else:
        click.echo("[OK] CSV and JSON outputs match the original checksums")


@cli.command(name="presets")
def presets_command():
    """List the presets."""
    for entry in list_experiment_presets():
        click.echo(f"{entry['name']:<14} {entry['experiment']:<16} {entry['description']}")


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
