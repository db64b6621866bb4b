import hashlib
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple
import logging

import numpy as np
import pandas as pd

from src.cavity_sim.errors import SpaceError
from src.cavity_sim.hilbert import DensityMatrix, SpaceDescriptor

logger = logging.getLogger("cavity_sim.storage")

CHECKPOINT_VERSION = 1
MANIFEST_NAME = "manifest.json"


def to_jsonable(value: Any) -> Any:
    """Recursively convert numpy scalars/arrays and complex numbers for json.dump."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


class RunStorage:
    """One run directory: tables, sidecars, checkpoints and the inventory."""

    def __init__(self, base_path: Path):
        self.base_path = Path(base_path)
        self.base_path.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.base_path / name

    def exists(self, name: str) -> bool:
        return self.path(name).exists()

    def write_table(self, name: str, frame: pd.DataFrame, units: Optional[Dict[str, str]] = None) -> Path:
        """CSV whose header carries units as ``column [unit]``."""
        units = units or {}
        out = frame.rename(columns={c: f"{c} [{units[c]}]" for c in frame.columns if units.get(c)})
        path = self.path(name)
        out.to_csv(path, index=False)
        logger.debug("Wrote %s (%d rows)", path, len(out))
        return path

    def read_table(self, name: str) -> pd.DataFrame:
        return pd.read_csv(self.path(name))

    def write_json(self, name: str, payload: Any) -> Path:
        path = self.path(name)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(to_jsonable(payload), f, indent=2, ensure_ascii=False)
        return path

    def read_json(self, name: str) -> Any:
        with open(self.path(name), "r", encoding="utf-8") as f:
            return json.load(f)

    def save_checkpoint(self, name: str, rho: DensityMatrix, t: float, extra: Optional[dict] = None) -> Path:
        """``.npz`` with the matrix and a versioned JSON header."""
        header = {
            "format_version": CHECKPOINT_VERSION,
            "space": rho.space.describe(),
            "t": float(t),
            **(extra or {}),
        }
        path = self.path(name)
        with open(path, "wb") as f:
            np.savez_compressed(f, matrix=rho.matrix, header=np.array(json.dumps(to_jsonable(header))))
        logger.debug("Checkpoint %s at t=%.4g", path, t)
        return path

    def load_checkpoint(self, name: str) -> Tuple[DensityMatrix, dict]:
        with np.load(self.path(name), allow_pickle=False) as data:
            header = json.loads(str(data["header"]))
            matrix = data["matrix"]
        if header.get("format_version") != CHECKPOINT_VERSION:
            raise SpaceError(
                f"checkpoint format {header.get('format_version')} is not supported "
                f"(expected {CHECKPOINT_VERSION})"
            )
        space = SpaceDescriptor.from_description(header["space"])
        return DensityMatrix(matrix, space), header

    @staticmethod
    def sha256(path: Path) -> str:
        digest = hashlib.sha256()
        with open(path, "rb") as f:
            for block in iter(lambda: f.read(1 << 20), b""):
                digest.update(block)
        return digest.hexdigest()

    def inventory(self) -> List[Dict[str, Any]]:
        """Every output file except the manifest, with size and SHA-256."""
        entries = []
        for path in sorted(p for p in self.base_path.rglob("*") if p.is_file()):
            if path.name == MANIFEST_NAME:
                continue
            entries.append({
                "path": path.relative_to(self.base_path).as_posix(),
                "sha256": self.sha256(path),
                "bytes": path.stat().st_size,
            })
        return entries
