import sys
import types

import pytest

from optomech.src import tracing
from optomech.src.tracing_models import OptimizationResult, RobustnessCurve


def test_disabled_tracking_calls_through():
    calls = []

    @tracing.maybe_track(name="double")
    def double(x):
        """Doubles x."""
        calls.append(x)
        return 2 * x

    assert double(3) == 6
    assert calls == [3]
    assert double.__name__ == "double" and double.__doc__ == "Doubles x."


def test_helpers_are_no_ops_when_disabled():
    tracing.update_current_span(metadata={"a": 1})
    tracing.update_current_trace(metadata={"a": 1})
    with tracing.span_context("block", metadata={"a": 1}):
        pass
    tracing.log_optimizer_result(OptimizationResult(3, [0.0, 2.0, 0.0], 0.0, 0.0))


def test_enabled_tracking_wraps_once(monkeypatch):
    wrapped = []

    def track(name):
        def decorate(fn):
            wrapped.append(name)
            return fn
        return decorate

    monkeypatch.setitem(sys.modules, "opik", types.SimpleNamespace(track=track))
    monkeypatch.setenv("OPIK_ENABLED", "1")

    @tracing.maybe_track(name="increment")
    def increment(x):
        return x + 1

    assert increment(1) == 2
    assert increment(2) == 3
    assert wrapped == ["increment"]


def test_enabled_flag_values(monkeypatch):
    for value, expected in (("true", True), ("YES", True), ("0", False), ("", False)):
        monkeypatch.setenv("OPIK_ENABLED", value)
        assert tracing.is_opik_enabled() is expected


def test_optimizer_metadata():
    result = OptimizationResult(3, [0.0, 2.0, 0.0], 0.1, 1e-12, starts_tried=2, evaluations=40)
    meta = result.to_metadata()["optimizer"]
    assert meta["starts_tried"] == 2 and meta["converged"] is True
    assert "phases" not in meta


def test_robustness_curve_validation():
    with pytest.raises(ValueError):
        RobustnessCurve(deviations=[0.0, 0.1], phonons=[1.0])
    with pytest.raises(ValueError):
        RobustnessCurve(deviations=[0.1, 0.0], phonons=[1.0, 1.0])
    curve = RobustnessCurve(deviations=[-0.1, 0.1], phonons=[1.0, 3.0])
    assert curve.value_at(0.0) == pytest.approx(2.0)
