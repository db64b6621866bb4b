"""
Numerical helpers shared by the analysis code: trace distance, smoothing,
local maxima, spectral peaks and histogram modes.
"""
from typing import List, Tuple

import numpy as np
from scipy import ndimage, signal


def trace_norm(a: np.ndarray) -> float:
    """‖A‖_tr for a hermitian matrix (sum of absolute eigenvalues)."""
    a = np.asarray(a)
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (a + a.conj().T)))))


def smooth_box(values: np.ndarray, size: int = 3) -> np.ndarray:
    return ndimage.uniform_filter(np.asarray(values, dtype=float), size=size, mode="nearest")


def local_maxima(values: np.ndarray, size: int = 3) -> List[Tuple[int, ...]]:
    """Indices of strict-neighbourhood maxima (plateaus count once)."""
    values = np.asarray(values, dtype=float)
    peak = values == ndimage.maximum_filter(values, size=size, mode="nearest")
    # drop flat regions (all-equal neighbourhoods)
    peak &= values > ndimage.minimum_filter(values, size=size, mode="nearest")
    labels, count = ndimage.label(peak)
    if count == 0:
        return []
    centers = ndimage.maximum_position(values, labels, range(1, count + 1))
    return [tuple(int(i) for i in c) for c in centers]


def dominant_frequency(times: np.ndarray, series: np.ndarray) -> float:
    """
    Angular frequency of the largest non-DC periodogram peak.

    Complex series use the two-sided spectrum and return |ω|.
    """
    times = np.asarray(times, dtype=float)
    series = np.asarray(series)
    if times.size < 4:
        raise ValueError("need at least 4 samples for a spectrum")
    dt = float(np.mean(np.diff(times)))
    if not np.allclose(np.diff(times), dt, rtol=1e-6):
        raise ValueError("dominant_frequency needs uniformly sampled data")
    centered = series - np.mean(series)
    freqs, power = signal.periodogram(centered, fs=1.0 / dt, return_onesided=not np.iscomplexobj(series),
                                      scaling="spectrum")
    keep = freqs != 0.0
    if not np.any(keep) or np.max(power[keep]) == 0.0:
        return 0.0
    f_peak = abs(float(freqs[keep][np.argmax(power[keep])]))
    return 2.0 * np.pi * f_peak


def histogram_modes(samples: np.ndarray, bins: int = 60, rel_prominence: float = 0.1,
                    min_fraction: float = 0.05) -> dict:
    """
    Dominant modes of a 1D sample histogram.

    Returns a dict with the two tallest mode centres (when present), the
    midpoint threshold between them and a ``bimodal`` flag. Two modes only
    count as bimodal when each side of the threshold holds at least
    ``min_fraction`` of the samples.
    """
    samples = np.asarray(samples, dtype=float)
    counts, edges = np.histogram(samples, bins=bins)
    centers = 0.5 * (edges[:-1] + edges[1:])
    smooth = np.convolve(counts, np.ones(3) / 3.0, mode="same")
    padded = np.concatenate([[0.0], smooth, [0.0]])
    peaks, props = signal.find_peaks(padded, prominence=rel_prominence * max(padded.max(), 1e-300))
    peaks = peaks - 1
    order = np.argsort(props["prominences"])[::-1]
    modes = sorted(float(centers[peaks[i]]) for i in order[:2])
    result = {"modes": modes, "bimodal": len(modes) == 2, "threshold": float("nan")}
    if result["bimodal"]:
        threshold = 0.5 * (modes[0] + modes[1])
        upper = float(np.mean(samples > threshold))
        if min(upper, 1.0 - upper) < min_fraction:
            result["bimodal"] = False
        else:
            result["threshold"] = threshold
    return result
