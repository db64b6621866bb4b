"""
Small text helpers for user-facing messages.
"""
import difflib
from typing import Dict, Iterable, Optional

# display symbols for parameter names
SYMBOLS: Dict[str, str] = {
    "omega": "Ω",
    "omega_r": "ω_r",
    "kappa": "κ",
    "kappa_d": "κ_D",
    "epsilon": "ε",
    "eps_ratio": "ε/ε_crit",
    "n_max": "N_max",
    "l_max": "l_max",
    "dt": "dt",
    "t_end": "t_end",
    "grid_half_width": "A",
    "grid_step": "δ",
}


def display_name(key: str) -> str:
    """``ω_r/omega_r`` style label for a parameter key."""
    symbol = SYMBOLS.get(key)
    return f"{symbol}/{key}" if symbol and symbol != key else key


def _fold(key: str) -> str:
    return key.lower().replace("-", "_").strip()


def suggest_key(key: str, candidates: Iterable[str]) -> Optional[str]:
    """
    Closest known key to a misspelled one, or None.

    Case and dash differences are matched first, then difflib similarity.
    """
    candidates = list(candidates)
    folded = {_fold(c): c for c in candidates}
    if _fold(key) in folded:
        return folded[_fold(key)]
    matches = difflib.get_close_matches(_fold(key), list(folded), n=1, cutoff=0.6)
    return folded[matches[0]] if matches else None


def unknown_key_message(key: str, candidates: Iterable[str], where: str = "params") -> str:
    suggestion = suggest_key(key, candidates)
    message = f"{where}: unknown key '{key}'"
    if suggestion is not None:
        message += f" (did you mean {display_name(suggestion)}?)"
    return message
