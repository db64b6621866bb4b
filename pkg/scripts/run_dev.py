# scripts/run_dev.py
import sys
from pathlib import Path

# adds the project root to PYTHONPATH
ROOT = Path(__file__).resolve().parents[1]
sys.path.append(str(ROOT))

from src.app.main import cli  # noqa: E402

DEFAULT_PRESET = "fig4_smoke_b"

if __name__ == "__main__":
    # python scripts/run_dev.py [preset] [--set key=value ...]
    args = sys.argv[1:]
    preset = args.pop(0) if args and not args[0].startswith("-") else DEFAULT_PRESET
    cli(["--log-level", "INFO", "preset", preset, *args])
