from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Union
import logging
import time

from src.app.core.config import settings
from src.app.schemas.presets import list_presets
from src.app.schemas.requests import ExperimentConfig, validate_config
from src.app.schemas.responses import FileEntry, RunManifest
from src.cavity_sim import __version__
from src.cavity_sim.pipeline import run_pipeline
from src.infra.storage import MANIFEST_NAME, RunStorage

logger = logging.getLogger("cavity_sim.api.experiments")

# compressed checkpoints embed zip timestamps, so they never match bitwise
REPRODUCIBLE_SUFFIXES = (".csv", ".json")


def resolve_run_directory(config: ExperimentConfig, out_dir: Optional[Union[str, Path]]) -> Path:
    if out_dir is not None:
        return Path(out_dir)
    if config.output_dir:
        return Path(config.output_dir)
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    name = config.preset or config.experiment.value
    return Path(settings.output_dir) / f"{name}_{timestamp}"


def run_experiment(
    config: ExperimentConfig,
    out_dir: Optional[Union[str, Path]] = None,
    jobs: Optional[int] = None,
) -> RunManifest:
    """
    Run a validated config and write ``manifest.json`` next to its outputs.

    Numerical invariant errors propagate to the caller (the CLI maps them to
    exit status 3); nothing is written to the manifest in that case.
    """
    jobs = jobs or settings.jobs
    run_dir = resolve_run_directory(config, out_dir)
    storage = RunStorage(run_dir)
    logger.info("Experiment %s → %s", config.experiment.value, run_dir)

    start = time.perf_counter()
    try:
        result = run_pipeline(config.experiment.value, config.set_params(), storage, jobs=jobs)
    except Exception as e:
        logger.exception("Experiment %s failed: %s", config.experiment.value, e)
        raise
    wall_time = time.perf_counter() - start

    for warning in result.warnings:
        logger.warning("%s: %s", config.experiment.value, warning)

    manifest = RunManifest(
        config=config.model_dump(mode="json", exclude_none=True),
        code_version=__version__,
        created_at=datetime.now(timezone.utc).isoformat(),
        wall_time_s=wall_time,
        jobs=jobs,
        convergence=result.convergence,
        summary=result.summary,
        files=[FileEntry(**entry) for entry in storage.inventory()],
        seeds=result.seeds,
        streams=result.streams,
        bit_generator=settings.rng_bit_generator if result.seeds else None,
        warnings=result.warnings,
    )
    storage.write_json(MANIFEST_NAME, manifest.model_dump())
    logger.info("[OK] %s finished in %.1fs (%d files)", config.experiment.value, wall_time, len(manifest.files))
    return manifest


def load_manifest(path: Union[str, Path]) -> RunManifest:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    storage = RunStorage(path.parent)
    return RunManifest.model_validate(storage.read_json(path.name))


def rerun_from_manifest(
    path: Union[str, Path],
    out_dir: Optional[Union[str, Path]] = None,
    jobs: Optional[int] = None,
) -> RunManifest:
    """Re-execute the resolved config recorded in a manifest."""
    previous = load_manifest(path)
    config = validate_config(previous.config)
    if out_dir is None:
        config = config.model_copy(update={"output_dir": None})
    logger.info("Re-running %s from %s", config.experiment.value, path)
    return run_experiment(config, out_dir=out_dir, jobs=jobs or previous.jobs)


def compare_checksums(first: RunManifest, second: RunManifest) -> List[str]:
    """Reproducible files whose checksums differ (or exist in only one run)."""
    a = {k: v for k, v in first.checksums().items() if k.endswith(REPRODUCIBLE_SUFFIXES)}
    b = {k: v for k, v in second.checksums().items() if k.endswith(REPRODUCIBLE_SUFFIXES)}
    return sorted(name for name in set(a) | set(b) if a.get(name) != b.get(name))


def list_experiment_presets() -> List[Dict[str, str]]:
    return list_presets()
