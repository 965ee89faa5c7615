# src/infrastructure/services/logging_observability_service.py
import json
import logging
import time
import uuid
from collections import defaultdict
from typing import Any, Dict, List, Optional, Tuple

from src.domain.interfaces.services import ObservabilityService
from src.infrastructure.config.settings import Settings

FAILURE_SUFFIX = "_failed"


class LoggingObservabilityService(ObservabilityService):
    """Pipeline events, metrics and stage traces on top of `logging`.

    Metric samples stay in memory so callers can read them back. Nothing
    here reaches run artifacts.
    """

    def __init__(self, settings: Settings = None):
        self.settings = settings or Settings()
        self.logger = logging.getLogger(__name__)
        self._context = {"service": self.settings.PROJECT_NAME, "environment": self.settings.ENVIRONMENT}
        self._metrics: Dict[str, List[Tuple[float, Dict[str, str]]]] = defaultdict(list)
        self._open_traces: Dict[str, Tuple[str, float]] = {}

    def log_event(self, event_type: str, event_data: Dict[str, Any]) -> None:
        # `<stage>_started` / `<stage>_completed` / `<stage>_failed`
        stage = event_type.rsplit("_", 1)[0]
        payload = {**self._context, "stage": stage, "data": event_data}
        level = logging.ERROR if event_type.endswith(FAILURE_SUFFIX) else logging.INFO
        try:
            self.logger.log(level, f"Event: {event_type} - {json.dumps(payload, default=str, sort_keys=True)}")
        except (TypeError, ValueError) as e:
            self.logger.error(f"Event {event_type} could not be serialized: {e}")

    def track_metric(self, metric_name: str, value: float, dimensions: Dict[str, str] = None) -> None:
        self._metrics[metric_name].append((float(value), dict(dimensions or {})))
        self.logger.debug(f"Metric: {metric_name}={value} {dimensions or ''}".rstrip())

    def metric_values(self, metric_name: str, dimensions: Optional[Dict[str, str]] = None) -> List[float]:
        """Recorded values, optionally only those whose dimensions include `dimensions`."""
        wanted = (dimensions or {}).items()
        return [value for value, dims in self._metrics.get(metric_name, []) if wanted <= dims.items()]

    def start_trace(self, trace_name: str, trace_data: Dict[str, Any] = None) -> str:
        trace_id = uuid.uuid4().hex
        self._open_traces[trace_id] = (trace_name, time.perf_counter())
        self.logger.debug(f"Trace {trace_name} [{trace_id}] opened {trace_data or ''}".rstrip())
        return trace_id

    def end_trace(self, trace_id: str, success: bool = True, result_data: Dict[str, Any] = None) -> None:
        if trace_id not in self._open_traces:
            self.logger.warning(f"Trace {trace_id} was never opened")
            return
        trace_name, opened_at = self._open_traces.pop(trace_id)
        elapsed = time.perf_counter() - opened_at
        self.track_metric(f"{trace_name}_seconds", elapsed)
        self.log_event(f"{trace_name}_trace" if success else f"{trace_name}_trace{FAILURE_SUFFIX}", {
            "trace_id": trace_id,
            "duration_seconds": round(elapsed, 6),
            **(result_data or {}),
        })
