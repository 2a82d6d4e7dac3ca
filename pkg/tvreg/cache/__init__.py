"""Memoization of oracle results keyed on field contents."""

from __future__ import annotations

import functools
import hashlib
import inspect
import os
import threading
from collections import OrderedDict
from typing import Any, Callable, TypeVar

import numpy as np

from tvreg.core.fields import ScalarField
from tvreg.reference.dual import DualState, dual_projection
from tvreg.reference.taut_string import taut_string_1d
from tvreg.runtime import metrics

F = TypeVar("F", bound=Callable[..., Any])

_lock = threading.Lock()

_DEFAULT_MAX = 64

_oracle_cache: OrderedDict[str, Any] = OrderedDict()
_MISSING = object()


def _max_entries() -> int:
    return max(1, int(os.environ.get("TVREG_ORACLE_CACHE_MAX", str(_DEFAULT_MAX))))


def _function_cache_prefix(func: Callable) -> str:
    try:
        source = inspect.getsource(func)
    except (OSError, TypeError):
        source = func.__qualname__
    return hashlib.sha256(source.encode("utf-8")).hexdigest()


def _feed(digest: Any, value: Any) -> None:
    if isinstance(value, ScalarField):
        grid = value.grid
        digest.update(f"field:{grid.grid_id}:{grid.h!r}".encode("utf-8"))
        digest.update(np.ascontiguousarray(grid.mask).tobytes())
        digest.update(np.ascontiguousarray(value.values, dtype=np.float64).tobytes())
    elif isinstance(value, np.ndarray):
        digest.update(f"array:{value.shape}:{value.dtype}".encode("utf-8"))
        digest.update(np.ascontiguousarray(value).tobytes())
    elif isinstance(value, float):
        digest.update(f"float:{value!r}".encode("utf-8"))
    else:
        digest.update(f"{type(value).__name__}:{value!r}".encode("utf-8"))


def _make_cache_key(prefix: str, args: tuple, kwargs: dict) -> str:
    digest = hashlib.sha256()
    for arg in args:
        _feed(digest, arg)
    for name, value in sorted(kwargs.items()):
        digest.update(f"|{name}=".encode("utf-8"))
        _feed(digest, value)
    return f"{prefix}:{digest.hexdigest()}"


def cache_oracle(func: F) -> F:
    """Memoize an oracle whose results are immutable.

    Keys hash the grid identity, the raw field bytes and the remaining
    arguments. The store is a process-wide LRU bounded by
    ``TVREG_ORACLE_CACHE_MAX`` entries.
    """
    fn_prefix = _function_cache_prefix(func)

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        key = _make_cache_key(fn_prefix, args, kwargs)
        with _lock:
            cached = _oracle_cache.get(key, _MISSING)
            if cached is not _MISSING:
                _oracle_cache.move_to_end(key)
        if cached is not _MISSING:
            metrics.record_oracle(cache_hit=True)
            return cached

        # Compute outside lock.
        result = func(*args, **kwargs)
        metrics.record_oracle(cache_hit=False)

        limit = _max_entries()
        with _lock:
            _oracle_cache[key] = result
            _oracle_cache.move_to_end(key)
            while len(_oracle_cache) > limit:
                _oracle_cache.popitem(last=False)
        return result

    def _clear_fn_cache() -> None:
        target = f"{fn_prefix}:"
        with _lock:
            for key in [k for k in _oracle_cache if k.startswith(target)]:
                del _oracle_cache[key]

    wrapper.clear = _clear_fn_cache  # type: ignore[attr-defined]
    return wrapper  # type: ignore[return-value]


def cache_size() -> int:
    with _lock:
        return len(_oracle_cache)


def clear_all() -> None:
    with _lock:
        _oracle_cache.clear()


@cache_oracle
def cached_taut_string(f: ScalarField, mu: float) -> ScalarField:
    return taut_string_1d(f, mu)


@cache_oracle
def cached_dual_projection(f: ScalarField, mu: float, tol: float = 1e-8, max_iter: int = 20000) -> DualState:
    return dual_projection(f, mu, tol=tol, max_iter=max_iter)
