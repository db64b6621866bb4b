from pydantic_settings import BaseSettings, SettingsConfigDict #transform the class in a variable loader
from pydantic import Field


class Settings(BaseSettings):
    # output / runtime
    output_dir: str = Field("data/runs", description="Root folder for run directories")
    log_level: str = Field("INFO", description="Root logging level")
    show_progress: bool = Field(True, description="Show tqdm progress bars in long loops")
    jobs: int = Field(1, ge=1, description="Default worker count for sweeps and ensembles")

    # cutoffs
    l_max_1d: int = Field(128, ge=1)
    l_max_rotated_2d: int = Field(64, ge=1)
    n_max_open: int = Field(120, ge=1)
    cutoff_growth: float = Field(1.5, gt=1.0)
    max_cutoff_restarts: int = Field(3, ge=1)

    # numerical tolerances
    leakage_tol: float = Field(1e-8, gt=0)
    tail_tol: float = Field(1e-6, gt=0)
    degeneracy_tol: float = Field(1e-6, gt=0)  # relative to Ω
    residual_tol: float = Field(1e-9, gt=0)
    steady_tol: float = Field(1e-6, gt=0)
    steady_probe_window: float = Field(10.0, gt=0)  # units of 1/κ
    steady_t_max: float = Field(5000.0, gt=0)  # units of 1/κ

    # stochastic integration
    sse_dt: float = Field(1e-3, gt=0)  # units of 1/κ
    rng_bit_generator: str = Field("Philox")

    # wigner grid
    wigner_half_width: float = Field(12.0, gt=0)
    wigner_step: float = Field(0.1, gt=0)

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

settings = Settings() #create a global object
