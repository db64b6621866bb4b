"""
Two-level classification of a recorded current and detection of the
persistent crossings between the levels.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Union
import logging

import numpy as np

from src.cavity_sim.trajectories.runner import HeterodyneRecord
from src.utils.metrics import histogram_modes

logger = logging.getLogger("cavity_sim.trajectories.switches")

NO_BIMODALITY = "no bimodality"


@dataclass
class SwitchReport:
    switch_times: List[float]
    threshold: float
    modes: List[float]
    bimodal: bool
    flag: Optional[str] = None
    labels: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    def to_dict(self) -> dict:
        return {
            "switch_times": [float(t) for t in self.switch_times],
            "threshold": None if np.isnan(self.threshold) else float(self.threshold),
            "modes": [float(m) for m in self.modes],
            "bimodal": self.bimodal,
            "flag": self.flag,
        }


def _persistent_crossings(times: np.ndarray, labels: np.ndarray, min_dwell: float) -> List[float]:
    # a candidate crossing is confirmed once the new label has held for min_dwell
    state = labels[0]
    candidate = None
    switches: List[float] = []
    for i in range(1, labels.size):
        if labels[i] == state:
            candidate = None
            continue
        if candidate is None:
            candidate = i
        if times[i] - times[candidate] >= min_dwell:
            switches.append(float(times[candidate]))
            state = labels[i]
            candidate = None
    return switches


def detect_switches(
    source: Union[HeterodyneRecord, np.ndarray],
    kappa_d: Optional[float] = None,
    times: Optional[np.ndarray] = None,
    min_dwell: Optional[float] = None,
    bins: int = 60,
    burn_in: float = 0.0,
) -> SwitchReport:
    """
    Switch times of Re I between its two metastable levels.

    Args:
        source: a HeterodyneRecord (Re I is used, and its ``switch_times``
            are filled in) or a real series sampled at ``times``
        kappa_d: detector linewidth; taken from the record when omitted
        times: sample times for a raw series
        min_dwell: persistence required for a crossing, default 5/κ_D
        bins: histogram bins for the level fit
        burn_in: initial span excluded from the histogram and the search

    Returns:
        SwitchReport; a unimodal histogram gives no switches and the
        "no bimodality" flag.
    """
    record = source if isinstance(source, HeterodyneRecord) else None
    if record is not None:
        series = np.real(record.current)
        times = record.times
        kappa_d = record.kappa_d if kappa_d is None else kappa_d
    else:
        series = np.real(np.asarray(source))
        if times is None:
            raise ValueError("times are required for a raw series")
        times = np.asarray(times, dtype=float)
    if series.shape != times.shape:
        raise ValueError(f"series and times differ in shape: {series.shape} vs {times.shape}")
    if min_dwell is None:
        if kappa_d is None or not kappa_d > 0:
            raise ValueError("κ_D > 0 is needed to set the default dwell time")
        min_dwell = 5.0 / kappa_d

    keep = times >= times[0] + burn_in
    series, times = series[keep], times[keep]
    if series.size < 2:
        raise ValueError("not enough samples after burn-in")

    fit = histogram_modes(series, bins=bins)
    if not fit["bimodal"]:
        logger.info("Current histogram is unimodal; no switches reported")
        report = SwitchReport([], float("nan"), fit["modes"], False, NO_BIMODALITY)
    else:
        labels = (series > fit["threshold"]).astype(int)
        switches = _persistent_crossings(times, labels, min_dwell)
        logger.info("Detected %d switch(es) with threshold %.4g", len(switches), fit["threshold"])
        report = SwitchReport(switches, fit["threshold"], fit["modes"], True, None, labels)

    if record is not None:
        record.switch_times = list(report.switch_times)
    return report
