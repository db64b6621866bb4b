from typing import Any, Dict, List, Optional
from pydantic import BaseModel, Field


class FileEntry(BaseModel):
    """One output file of a run."""
    path: str = Field(..., description="Path relative to the run directory")
    sha256: str = Field(..., description="SHA-256 of the file contents")
    bytes: int = Field(..., ge=0)


class RunManifest(BaseModel):
    """
    Provenance record written as ``manifest.json`` in every run directory.
    """

    config: Dict[str, Any] = Field(..., description="Fully resolved ExperimentConfig")
    code_version: str
    created_at: str = Field(..., description="UTC timestamp, ISO 8601")
    wall_time_s: float = Field(..., ge=0.0)
    jobs: int = Field(1, ge=1)

    convergence: Dict[str, Any] = Field(
        default_factory=dict,
        description="Convergence flags and residuals reported by the pipeline",
    )
    summary: Dict[str, Any] = Field(
        default_factory=dict,
        description="Scalar results (peak counts, entropies, switch counts, ...)",
    )
    files: List[FileEntry] = Field(default_factory=list)
    seeds: List[int] = Field(default_factory=list)
    streams: List[int] = Field(default_factory=list)
    bit_generator: Optional[str] = None

    warnings: List[str] = Field(
        default_factory=list,
        description="Non-fatal problems (small grids, leakage-prone cutoffs, restarts)",
    )

    def checksums(self) -> Dict[str, str]:
        return {entry.path: entry.sha256 for entry in self.files}
