"""
runner_figures.py
=================
Acceptance suite for the figure-level properties of the simulator.

Each case runs a preset through the same code path as the CLI, then checks
the written tables and manifest. Results are saved as timestamped JSON in
``reports/``.

Run with:
    python tests/figure_quality/runner_figures.py          # smoke cases
    python tests/figure_quality/runner_figures.py --full   # full-scale figures

The full-scale cases (N_max = 120 steady states, 2000/κ trajectories) take
from minutes up to hours.
"""

import os
import sys
import tempfile
import time
from pathlib import Path


def _find_project_root(marker: str = "src") -> str:
    """Walk up the directory tree until we find the folder containing `marker`."""
    current = os.path.dirname(os.path.abspath(__file__))
    for _ in range(10):
        if os.path.isdir(os.path.join(current, marker)):
            return current
        parent = os.path.dirname(current)
        if parent == current:
            break
        current = parent
    raise RuntimeError(
        f"Could not find a parent directory containing '{marker}/'. "
        "Make sure you're running from inside the project tree."
    )


_PROJECT_ROOT = _find_project_root("src")
if _PROJECT_ROOT not in sys.path:
    sys.path.insert(0, _PROJECT_ROOT)

from reports.reports import generate_report, save_reports  # noqa: E402
from src.app.api.v1.experiments import run_experiment  # noqa: E402
from src.app.core.config import settings  # noqa: E402
from src.app.core.logging import setup_logging  # noqa: E402
from src.app.schemas.requests import validate_config  # noqa: E402
from src.cavity_sim.errors import NumericalInvariantError  # noqa: E402
from tests.figure_quality import evaluator_figures as ev  # noqa: E402

REPORT_DIR = os.path.join(_PROJECT_ROOT, "reports")
FULL = "--full" in sys.argv

# batch size for the switching statistics of the full trajectory check
TRAJECTORY_SEEDS = 10

# (id, category, preset, param overrides, check, full-scale only)
CASES = [
    ("rabi_recoil_free", "closed", "fig1a", {}, ev.check_rabi, False),
    ("walk_1d", "closed", "fig1b", {}, ev.check_walk_1d, False),
    ("walk_2d", "closed", "fig1cd", {}, ev.check_walk_2d, False),
    ("masked_1d", "closed", "fig2", {}, ev.check_masked_1d, False),
    ("masked_2d", "closed", "fig2_2d", {}, ev.check_masked_2d, False),
    ("meanfield_branches", "mean_field", "fig3", {}, ev.check_meanfield, False),
    ("wigner_smoke_single", "open", "fig4_smoke_a", {}, ev.check_wigner_single, False),
    ("wigner_smoke_double", "open", "fig4_smoke_b", {}, ev.check_wigner_double, False),
    ("unraveling", "trajectories", "unraveling", {}, ev.check_unraveling, False),
    ("wigner_single", "open", "fig4a", {}, ev.check_wigner_single, True),
    ("wigner_double", "open", "fig4b", {}, ev.check_wigner_double, True),
    ("trajectory_control", "trajectories", "fig6_control", {}, ev.check_trajectory_control, True),
]

# short control trajectory for the smoke pass
SMOKE_CONTROL = {"t_end": 50.0}


def _run(preset: str, overrides: dict, out_dir: Path):
    config = validate_config({"preset": preset, "params": overrides})
    manifest = run_experiment(config, out_dir=out_dir)
    return manifest


def _record(results: list, case_id: str, category: str, preset: str, check, run_dir, manifest, started: float):
    try:
        passed, metrics = check(run_dir, manifest)
    except Exception as e:
        passed, metrics = False, {"error": f"{type(e).__name__}: {e}"}
    results.append({
        "id": case_id,
        "category": category,
        "preset": preset,
        "criterion": (check.__doc__ or check.__name__).strip().splitlines()[0],
        "passed": bool(passed),
        "metrics": metrics,
        "warnings": list(manifest.warnings) if manifest is not None else [],
        "wall_time_s": round(time.perf_counter() - started, 2),
    })
    status = "PASS" if passed else "FAIL"
    print(f"  [{status}] {case_id:<24} {metrics}")


def _failure(results: list, case_id: str, category: str, preset: str, error: Exception, started: float):
    results.append({
        "id": case_id,
        "category": category,
        "preset": preset,
        "criterion": "run completes",
        "passed": False,
        "metrics": {"error": f"{type(error).__name__}: {error}"},
        "warnings": [],
        "wall_time_s": round(time.perf_counter() - started, 2),
    })
    print(f"  [FAIL] {case_id:<24} {type(error).__name__}: {error}")


def _run_cases(base: Path, results: list) -> dict:
    manifests = {}
    for case_id, category, preset, overrides, check, full_only in CASES:
        if full_only and not FULL:
            results.append({"id": case_id, "category": category, "preset": preset,
                            "criterion": "full-scale only", "passed": None, "metrics": {}, "warnings": []})
            continue
        started = time.perf_counter()
        run_dir = base / case_id
        try:
            manifest = _run(preset, overrides, run_dir)
        except (NumericalInvariantError, ValueError) as e:
            _failure(results, case_id, category, preset, e, started)
            continue
        manifests[case_id] = (run_dir, manifest)
        _record(results, case_id, category, preset, check, run_dir, manifest, started)
    return manifests


def _run_sector_comparison(base: Path, results: list, manifests: dict) -> None:
    case_id = "wigner_sector_match" if FULL else "wigner_smoke_sector_match"
    reference = "wigner_double" if FULL else "wigner_smoke_double"
    preset = "fig4b" if FULL else "fig4_smoke_b"
    if reference not in manifests:
        return
    started = time.perf_counter()
    run_dir = base / f"{case_id}_plus"
    try:
        plus = _run(preset, {"initial": "parity_plus"}, run_dir)
    except (NumericalInvariantError, ValueError) as e:
        _failure(results, case_id, "open", preset, e, started)
        return
    minus_dir, minus = manifests[reference]

    def check(_run_dir, _manifest):
        """Steady Wigner distributions agree across parity sectors."""
        return ev.compare_sectors(minus_dir, run_dir, minus, plus)

    _record(results, case_id, "open", preset, check, run_dir, plus, started)


def _run_trajectories(base: Path, results: list) -> None:
    if not FULL:
        started = time.perf_counter()
        run_dir = base / "trajectory_smoke_control"
        try:
            manifest = _run("fig6_control", SMOKE_CONTROL, run_dir)
        except (NumericalInvariantError, ValueError) as e:
            _failure(results, "trajectory_smoke_control", "trajectories", "fig6_control", e, started)
            return
        _record(results, "trajectory_smoke_control", "trajectories", "fig6_control",
                ev.check_trajectory_control, run_dir, manifest, started)
        return

    started = time.perf_counter()
    runs = []
    for seed in range(1, TRAJECTORY_SEEDS + 1):
        run_dir = base / f"trajectory_seed_{seed}"
        try:
            runs.append((run_dir, _run("fig6", {"seed": seed}, run_dir)))
        except (NumericalInvariantError, ValueError) as e:
            _failure(results, f"trajectory_seed_{seed}", "trajectories", "fig6", e, started)
    if runs:
        def check(_run_dir, _manifest):
            """Switches, branch correlation and ⟨σ−⟩ spectral peak over the seed batch."""
            return ev.check_trajectory_batch(runs)

        _record(results, "trajectory_batch", "trajectories", "fig6", check, base, runs[0][1], started)


def _print_report(report: dict) -> None:
    s = report["summary"]
    sep = "=" * 60
    dist = s["status_distribution"]

    print(sep)
    print(f"  FIGURE CHECKS ({s['total_checks']} checks, {'full' if FULL else 'smoke'} mode)")
    print(sep)
    print(f"  PASS     {dist['PASS']}")
    print(f"  FAIL     {dist['FAIL']}")
    print(f"  SKIPPED  {dist['SKIPPED']}")
    print(f"  rate     {s['pass_rate']}")

    print()
    print("  BY CATEGORY:")
    header = f"  {'category':<16} {'n':>4}  {'pass rate':>9}  failed"
    print(header)
    print("  " + "-" * (len(header) - 2))
    for category, m in sorted(report["by_category"].items()):
        rate = "-" if m["pass_rate"] is None else f"{m['pass_rate']:.2f}"
        print(f"  {category:<16} {m['total_checks']:>4}  {rate:>9}  {', '.join(m['failed'])}")
    print(sep)


def main() -> int:
    setup_logging()
    settings.show_progress = False
    print("=" * 60)
    print(f"  Figure acceptance  |  mode={'full' if FULL else 'smoke'}")
    print("=" * 60)

    results = []
    with tempfile.TemporaryDirectory(prefix="figure_runs_") as tmp:
        base = Path(tmp)
        try:
            manifests = _run_cases(base, results)
            _run_sector_comparison(base, results, manifests)
            _run_trajectories(base, results)
        except KeyboardInterrupt:
            print("\n  [Interrupted: partial results will be saved]")

    report = generate_report(results)
    report_path = save_reports(results, report, output_dir=REPORT_DIR)
    _print_report(report)
    print(f"  Report saved to: {report_path}")
    print("=" * 60)
    return 0 if not report["summary"]["failed_checks"] else 1


if __name__ == "__main__":
    sys.exit(main())
