# src/domain/interfaces/services.py
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional


class ObservabilityService(ABC):
    """Sink for pipeline stage events, numeric metrics and timed traces."""

    @abstractmethod
    def log_event(self, event_type: str, event_data: Dict[str, Any]) -> None:
        """Emit a `<stage>_started|_completed|_failed` event."""
        pass

    @abstractmethod
    def track_metric(self, metric_name: str, value: float, dimensions: Dict[str, str] = None) -> None:
        pass

    @abstractmethod
    def start_trace(self, trace_name: str, trace_data: Dict[str, Any] = None) -> str:
        """Open a timed trace; the returned id closes it."""
        pass

    @abstractmethod
    def end_trace(self, trace_id: str, success: bool = True, result_data: Dict[str, Any] = None) -> None:
        pass

    def metric_values(self, metric_name: str, dimensions: Optional[Dict[str, str]] = None) -> List[float]:
        """Values recorded for a metric, when the implementation keeps them."""
        return []
