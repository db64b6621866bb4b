"""
In-memory operator cache.

Operators are immutable once built, so a process-wide memo keyed by
(kind, space, axis, omega_r) avoids rebuilding the same sparse embeddings
across evolutions, sweeps and tests. Entries are evicted oldest-first once
MAX_ENTRIES is reached.
"""

from typing import Any, Callable, Dict, Hashable
import logging

logger = logging.getLogger("cavity_sim.cache")

# key -> built object (insertion ordered, used for FIFO eviction)
_operator_cache: Dict[Hashable, Any] = {}

MAX_ENTRIES = 256

_hits = 0
_misses = 0


def get_or_build(key: Hashable, builder: Callable[[], Any]) -> Any:
    """
    Return the cached object for ``key``, building it on first use.

    Args:
        key: hashable cache key (must include the space descriptor)
        builder: zero-argument callable producing the object

    Returns:
        The cached or freshly built object
    """
    global _hits, _misses
    if key in _operator_cache:
        _hits += 1
        return _operator_cache[key]

    _misses += 1
    value = builder()
    if len(_operator_cache) >= MAX_ENTRIES:
        oldest = next(iter(_operator_cache))
        del _operator_cache[oldest]
        logger.debug("Evicted cached operator: %s", oldest[0])
    _operator_cache[key] = value
    logger.debug("Cached operator %s (%d entries)", key[0], len(_operator_cache))
    return value


def clear_cache() -> None:
    """Drop every cached operator and reset the counters."""
    global _hits, _misses
    _operator_cache.clear()
    _hits = 0
    _misses = 0


def cache_stats() -> Dict[str, int]:
    """Get cache size and hit/miss counters."""
    return {"entries": len(_operator_cache), "hits": _hits, "misses": _misses}
