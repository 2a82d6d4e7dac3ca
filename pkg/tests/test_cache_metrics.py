import pytest

from tvreg import cache
from tvreg.core import ScalarField
from tvreg.runtime import metrics
from tvreg.runtime.workers import max_threads, ordered_map
from tvreg.solver import SolverConfig, solve_regularized


def test_oracle_cache_hits_are_counted(step_1d):
    first = cache.cached_taut_string(step_1d, 0.05)
    second = cache.cached_taut_string(step_1d, 0.05)
    assert second is first
    assert cache.cache_size() == 1
    snap = metrics.snapshot()
    assert snap["total_oracle_calls"] == 2
    assert snap["total_oracle_cache_hits"] == 1


def test_cache_keys_follow_values_and_arguments(step_1d):
    cache.cached_taut_string(step_1d, 0.05)
    cache.cached_taut_string(step_1d, 0.1)
    cache.cached_taut_string(step_1d * 2.0, 0.05)
    assert cache.cache_size() == 3
    assert metrics.snapshot()["total_oracle_cache_hits"] == 0


def test_cache_bound_from_environment(monkeypatch, step_1d, trig_1d):
    monkeypatch.setenv("TVREG_ORACLE_CACHE_MAX", "1")
    cache.cached_taut_string(step_1d, 0.05)
    cache.cached_taut_string(trig_1d, 0.05)
    assert cache.cache_size() == 1
    cache.cached_taut_string(step_1d, 0.05)
    assert metrics.snapshot()["total_oracle_cache_hits"] == 0


def test_per_function_clear(step_1d):
    cache.cached_taut_string(step_1d, 0.05)
    cache.cached_taut_string.clear()
    assert cache.cache_size() == 0


def test_ordered_map_keeps_input_order(monkeypatch):
    monkeypatch.setenv("TVREG_THREADS", "3")
    assert max_threads() == 3
    assert ordered_map(lambda k: k * k, range(12)) == [k * k for k in range(12)]


def test_thread_setting_is_clamped(monkeypatch):
    monkeypatch.setenv("TVREG_THREADS", "0")
    assert max_threads() == 1
    assert ordered_map(str, []) == []


def test_solves_are_recorded(square):
    f = ScalarField.from_function(square, lambda x, y: x + y)
    _, trace = solve_regularized(f, SolverConfig(eps=1e-1, max_outer=50))
    snap = metrics.snapshot()
    assert snap["total_solves"] == 1
    assert snap["total_outer_iterations"] == trace.outer_iterations
    assert snap["total_inner_iterations"] == trace.total_inner_iterations
    assert snap["solve_ms_p50"] >= 0.0
    metrics.reset()
    assert metrics.snapshot()["total_solves"] == 0


def test_snapshot_reports_runtime_fields():
    snap = metrics.snapshot()
    for key in ("avg_solve_ms", "process_id", "uptime_seconds", "solve_ms_p95"):
        assert key in snap
    assert snap["avg_solve_ms"] == pytest.approx(0.0)
