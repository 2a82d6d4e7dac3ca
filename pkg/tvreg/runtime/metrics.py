"""In-memory solver metrics for tvreg runs."""

from __future__ import annotations

import os
import threading
import time
from collections import deque
from typing import Any

_LOCK = threading.Lock()
_START_TIME = time.time()

_INITIAL: dict[str, Any] = {
    "total_solves": 0,
    "total_nonconverged": 0,
    "total_outer_iterations": 0,
    "total_inner_iterations": 0,
    "total_solve_ms": 0.0,
    "last_solve_ms": 0.0,
    "max_solve_ms": 0.0,
    "total_oracle_calls": 0,
    "total_oracle_cache_hits": 0,
}
_STATE: dict[str, Any] = dict(_INITIAL)
_SOLVE_SAMPLES: deque[float] = deque(maxlen=2048)


def _percentile(values: list[float], p: float) -> float:
    if not values:
        return 0.0
    vals = sorted(values)
    idx = int(round((len(vals) - 1) * p))
    idx = max(0, min(idx, len(vals) - 1))
    return float(vals[idx])


def record_solve(
    duration_ms: float,
    *,
    outer_iterations: int,
    inner_iterations: int,
    converged: bool,
) -> None:
    with _LOCK:
        _STATE["total_solves"] += 1
        _STATE["total_outer_iterations"] += max(0, int(outer_iterations))
        _STATE["total_inner_iterations"] += max(0, int(inner_iterations))
        if not converged:
            _STATE["total_nonconverged"] += 1
        _STATE["total_solve_ms"] += duration_ms
        _STATE["last_solve_ms"] = duration_ms
        if duration_ms > _STATE["max_solve_ms"]:
            _STATE["max_solve_ms"] = duration_ms
        _SOLVE_SAMPLES.append(float(duration_ms))


def record_oracle(*, cache_hit: bool) -> None:
    with _LOCK:
        _STATE["total_oracle_calls"] += 1
        if cache_hit:
            _STATE["total_oracle_cache_hits"] += 1


def reset() -> None:
    with _LOCK:
        _STATE.clear()
        _STATE.update(_INITIAL)
        _SOLVE_SAMPLES.clear()


def snapshot() -> dict[str, Any]:
    with _LOCK:
        total = _STATE["total_solves"]
        avg_ms = (_STATE["total_solve_ms"] / total) if total else 0.0
        state_copy = dict(_STATE)
        samples = list(_SOLVE_SAMPLES)

    state_copy["avg_solve_ms"] = avg_ms
    state_copy["process_id"] = os.getpid()
    state_copy["uptime_seconds"] = time.time() - _START_TIME
    state_copy["solve_ms_p50"] = _percentile(samples, 0.50)
    state_copy["solve_ms_p95"] = _percentile(samples, 0.95)
    state_copy["solve_ms_p99"] = _percentile(samples, 0.99)
    return state_copy
