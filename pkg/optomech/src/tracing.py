"""Optional Opik spans around the expensive solvers.

Optimizer runs, Monte Carlo studies and the master-equation and classical
integrations are wrapped with ``maybe_track``. Unless OPIK_ENABLED is set
every helper returns immediately, and opik is only imported on first use.

    @maybe_track(name="run_study")
    def run_study(...):
        update_current_span(metadata={"instances": n})
"""
import os
from contextlib import contextmanager
from functools import wraps
from typing import Any, Callable, Dict, Optional


def is_opik_enabled() -> bool:
    """True when OPIK_ENABLED is 1, true or yes (any case)."""
    return os.getenv("OPIK_ENABLED", "").lower() in ("1", "true", "yes")


def maybe_track(name: Optional[str] = None):
    """
    Wrap a solver in ``opik.track`` when tracing is on.

    The flag is read per call, so a .env loaded after import still counts.
    The tracked wrapper is built once and reused.

    Args:
        name: span name; the function name when omitted.
    """
    def decorator(fn: Callable) -> Callable:
        tracked: Dict[str, Callable] = {}

        @wraps(fn)
        def wrapper(*args, **kwargs):
            if not is_opik_enabled():
                return fn(*args, **kwargs)
            if "fn" not in tracked:
                try:
                    from opik import track
                    tracked["fn"] = track(name=name or fn.__name__)(fn)
                except ImportError:
                    tracked["fn"] = fn
            return tracked["fn"](*args, **kwargs)
        return wrapper
    return decorator


def _push(target: str, **fields: Any) -> None:
    if not is_opik_enabled():
        return
    try:
        from opik import opik_context
        if target == "span" and opik_context.get_current_span_data() is None:
            return
        update = getattr(opik_context, f"update_current_{target}")
        for key, value in fields.items():
            if value:
                update(**{key: value})
    except (ImportError, AttributeError):
        pass


def update_current_span(
    metadata: Optional[Dict[str, Any]] = None,
    input: Optional[Dict[str, Any]] = None,
    output: Optional[Any] = None,
    tags: Optional[list] = None,
) -> None:
    """Attach fields to the active span, if any."""
    _push("span", metadata=metadata, input=input, output=output, tags=tags)


def update_current_trace(metadata: Optional[Dict[str, Any]] = None, tags: Optional[list] = None) -> None:
    _push("trace", metadata=metadata, tags=tags)


@contextmanager
def span_context(name: str, metadata: Optional[Dict[str, Any]] = None):
    """Child span around a block, e.g. one master-equation segment."""
    if not is_opik_enabled():
        yield
        return
    try:
        from opik import start_as_current_span
    except ImportError:
        yield
        return
    with start_as_current_span(name=name, metadata=metadata or {}):
        yield


# DOMAIN HELPERS -------------------------------------------------------------

def log_optimizer_result(result) -> None:
    """Attach an OptimizationResult to the current span."""
    update_current_span(metadata=result.to_metadata())


def log_study_summary(report) -> None:
    """Attach a MonteCarloReport summary (no per-instance values)."""
    update_current_span(metadata=report.to_metadata())


def log_leakage(cutoff: int, leakage: float, threshold: float) -> None:
    update_current_span(metadata={
        "truncation": {"cutoff": cutoff, "leakage": leakage, "threshold": threshold}
    })


def log_drift_metrics(metrics) -> None:
    update_current_span(metadata={"drift": metrics.to_dict()})
