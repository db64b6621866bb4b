from typing import Any, Dict, List, Literal, Optional
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.app.schemas.presets import CLOSED_EXPERIMENTS, EXPERIMENT_PARAMS, PRESETS, experiment_defaults
from src.cavity_sim.errors import ConfigValidationError
from src.utils.text import SYMBOLS, display_name, unknown_key_message

FORMAT_VERSION = 1


class ExperimentKind(str, Enum):
    RABI1D = "rabi1d"
    RABI2D = "rabi2d"
    WALK = "walk"
    MASKED_GROUND = "masked_ground"
    MEANFIELD_SWEEP = "meanfield_sweep"
    WIGNER_STEADY = "wigner_steady"
    TRAJECTORY = "trajectory"
    ENSEMBLE = "ensemble"


_POSITIVE = (
    "omega", "kappa", "kappa_d", "dt", "t_end", "grid_half_width", "grid_step",
    "probe_window", "t_max",
)
_NON_NEGATIVE = ("omega_r", "epsilon", "eps_ratio", "eps_ratio_min", "eps_ratio_max")


class ExperimentParams(BaseModel):
    """
    Flat parameter map shared by every experiment.

    Unset fields are filled from the experiment defaults by validate_config.
    """

    model_config = ConfigDict(extra="forbid")

    omega: Optional[float] = Field(None, description="Coupling Ω")
    omega_r: Optional[float] = Field(None, description="Recoil frequency ω_r")
    kappa: Optional[float] = Field(None, description="Cavity decay κ")
    epsilon: Optional[float] = Field(None, description="Drive amplitude ε")
    eps_ratio: Optional[float] = Field(None, description="Drive as ε/ε_crit (ε_crit = Ω/2)")
    n_max: Optional[int] = Field(None, ge=2, description="Photon cutoff N_max")
    l_max: Optional[int] = Field(None, ge=1, description="Momentum ladder cutoff (rotated ladder for rabi2d)")
    l_max_1d: Optional[int] = Field(None, ge=1, description="1D ladder cutoff for the rabi2d comparison")
    dims: Optional[int] = Field(None, ge=1, le=3, description="Motional dimensions")
    n_excitations: Optional[int] = Field(None, ge=0, description="Excitation manifold n")
    dt: Optional[float] = Field(None, description="SDE step")
    t_end: Optional[float] = Field(None, description="Final time")
    n_times: Optional[int] = Field(None, ge=2, description="Recorded time points")
    seed: Optional[int] = Field(None, ge=0, lt=2 ** 64, description="RNG seed (u64)")
    stream: Optional[int] = Field(None, ge=0, description="SeedSequence stream")
    n_seeds: Optional[int] = Field(None, ge=1, description="Ensemble size")
    kappa_d: Optional[float] = Field(None, description="Detector linewidth κ_D")
    record_stride: Optional[int] = Field(None, ge=1, description="Steps between records")
    scheme: Optional[Literal["euler", "exponential"]] = None
    initial: Optional[Literal["parity_minus", "parity_plus", "mixed"]] = Field(
        None, description="Open-system initial state",
    )
    grid_half_width: Optional[float] = Field(None, description="Wigner grid half-width A")
    grid_step: Optional[float] = Field(None, description="Wigner grid step δ")
    grid_points: Optional[int] = Field(None, ge=16, description="Position grid points")
    steady_method: Optional[Literal["krylov", "rk4"]] = None
    probe_window: Optional[float] = Field(None, description="Steady-state probe window (1/κ)")
    t_max: Optional[float] = Field(None, description="Steady-state time limit (1/κ)")
    eps_ratio_min: Optional[float] = None
    eps_ratio_max: Optional[float] = None
    eps_points: Optional[int] = Field(None, ge=1)
    compare_1d: Optional[bool] = None

    @field_validator(*_POSITIVE)
    @classmethod
    def _positive(cls, value, info):
        if value is not None and not value > 0:
            raise ValueError(f"{SYMBOLS.get(info.field_name, info.field_name)} must be positive")
        return value

    @field_validator(*_NON_NEGATIVE)
    @classmethod
    def _non_negative(cls, value, info):
        if value is not None and value < 0:
            raise ValueError(f"{SYMBOLS.get(info.field_name, info.field_name)} must be non-negative")
        return value

    @model_validator(mode="after")
    def _ranges(self):
        if self.epsilon is not None and self.eps_ratio is not None:
            raise ValueError("give either ε/epsilon or ε/ε_crit/eps_ratio, not both")
        if (self.eps_ratio_min is not None and self.eps_ratio_max is not None
                and self.eps_ratio_min > self.eps_ratio_max):
            raise ValueError("eps_ratio_min must not exceed eps_ratio_max")
        return self

    def resolved_epsilon(self) -> Optional[float]:
        if self.epsilon is not None:
            return self.epsilon
        if self.eps_ratio is not None and self.omega is not None:
            return self.eps_ratio * 0.5 * self.omega
        return None


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    experiment: ExperimentKind
    params: ExperimentParams = Field(default_factory=ExperimentParams)
    output_dir: Optional[str] = Field(None, description="Run directory (a timestamped one when omitted)")
    format_version: Literal[1] = FORMAT_VERSION
    preset: Optional[str] = Field(None, description="Preset the config was expanded from")

    def set_params(self) -> Dict[str, Any]:
        """Parameters with a value (the resolved view once validated)."""
        return self.params.model_dump(exclude_none=True)


_TOP_LEVEL = set(ExperimentConfig.model_fields)
_PARAM_KEYS = set(ExperimentParams.model_fields)


def _format_error(err: dict) -> str:
    location = ".".join(str(part) for part in err["loc"])
    message = err["msg"].removeprefix("Value error, ")
    if err["type"] == "extra_forbidden":
        return ""
    return f"{location}: {message}" if location else message


def validate_config(raw: Any) -> ExperimentConfig:
    """
    Check a raw JSON config and return it fully resolved.

    A ``"preset"`` key expands to the preset's experiment and parameters;
    explicit parameters override the preset. Every problem is collected
    before a single ConfigValidationError is raised.
    """
    if not isinstance(raw, dict):
        raise ConfigValidationError(["config must be a JSON object"])
    errors: List[str] = []
    raw = dict(raw)

    for key in raw:
        if key not in _TOP_LEVEL:
            errors.append(unknown_key_message(key, _TOP_LEVEL, where="config"))

    params = raw.get("params") or {}
    if not isinstance(params, dict):
        errors.append("params: must be an object")
        params = {}

    preset_name = raw.get("preset")
    if preset_name is not None:
        preset = PRESETS.get(preset_name)
        if preset is None:
            errors.append(unknown_key_message(preset_name, PRESETS, where="preset"))
        else:
            if raw.get("experiment", preset["experiment"]) != preset["experiment"]:
                errors.append(
                    f"experiment: preset '{preset_name}' runs {preset['experiment']}, not {raw['experiment']}"
                )
            raw["experiment"] = preset["experiment"]
            explicit = set(params)
            base = {k: v for k, v in preset["params"].items()
                    if not ({"epsilon", "eps_ratio"} & explicit and k in ("epsilon", "eps_ratio"))}
            params = {**base, **params}

    for key in params:
        if key not in _PARAM_KEYS:
            errors.append(unknown_key_message(key, _PARAM_KEYS))

    experiment = raw.get("experiment")
    if experiment in EXPERIMENT_PARAMS:
        allowed = EXPERIMENT_PARAMS[experiment]
        for key in params:
            if key in _PARAM_KEYS and key not in allowed:
                errors.append(f"params: {display_name(key)} is not used by {experiment}")
        defaults = experiment_defaults(experiment)
        if {"epsilon", "eps_ratio"} & set(params):
            defaults.pop("epsilon", None)
            defaults.pop("eps_ratio", None)
        params = {**defaults, **params}

    candidate = {k: v for k, v in raw.items() if k in _TOP_LEVEL}
    candidate["params"] = {k: v for k, v in params.items() if k in _PARAM_KEYS}
    config = None
    try:
        config = ExperimentConfig.model_validate(candidate)
    except ValidationError as exc:
        errors.extend(msg for msg in map(_format_error, exc.errors()) if msg)

    if config is not None:
        errors.extend(_cross_checks(config))
    if errors:
        raise ConfigValidationError(errors)
    return config


def _cross_checks(config: ExperimentConfig) -> List[str]:
    p = config.params
    kind = config.experiment.value
    errors = []
    if kind in ("wigner_steady", "trajectory", "ensemble"):
        eps = p.resolved_epsilon()
        if eps is None:
            errors.append("params: a drive ε/epsilon or ε/ε_crit/eps_ratio is required")
        elif kind != "wigner_steady" and p.dt is not None:
            rate = max(p.omega, eps, p.kappa)
            if p.dt * rate > 0.02 * (1 + 1e-12):
                errors.append(f"params: dt={p.dt:g} exceeds 0.02/max(Ω, ε, κ) = {0.02 / rate:.3g}")
    if kind == "ensemble" and p.n_seeds is not None and p.n_seeds < 50:
        errors.append("params: n_seeds must be >= 50 for ensemble statistics")
    if kind in CLOSED_EXPERIMENTS and p.n_excitations is not None and p.n_excitations < 1:
        errors.append(f"params: {kind} needs a doublet manifold, n_excitations >= 1")
    if kind == "walk" and p.dims == 3:
        errors.append("params: walk supports dims 1 and 2")
    if kind == "masked_ground" and p.dims == 3:
        errors.append("params: masked_ground supports dims 1 and 2")
    return errors
