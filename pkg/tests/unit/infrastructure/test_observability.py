# tests/unit/infrastructure/test_observability.py
import json
import logging

from src.infrastructure.services.logging_observability_service import LoggingObservabilityService


def _payload(record):
    return json.loads(record.getMessage().split(" - ", 1)[1])


def test_metrics_are_kept_in_memory():
    service = LoggingObservabilityService()
    service.track_metric("loc_loss", 1.5)
    service.track_metric("loc_loss", 0.5, {"epoch": "1"})
    assert service.metric_values("loc_loss") == [1.5, 0.5]
    assert service.metric_values("loc_loss", {"epoch": "1"}) == [0.5]
    assert service.metric_values("unknown") == []


def test_failed_events_are_logged_as_errors(caplog):
    service = LoggingObservabilityService()
    with caplog.at_level(logging.INFO):
        service.log_event("train_failed", {"error": "boom"})
        service.log_event("train_completed", {"epochs": 2})
    levels = {record.getMessage().split(" - ")[0]: record.levelno for record in caplog.records}
    assert levels["Event: train_failed"] == logging.ERROR
    assert levels["Event: train_completed"] == logging.INFO
    assert all(_payload(record)["stage"] == "train" for record in caplog.records)


def test_traces_report_their_duration(caplog):
    service = LoggingObservabilityService()
    with caplog.at_level(logging.INFO):
        trace_id = service.start_trace("synth", {"tag": "x"})
        service.end_trace(trace_id, success=True, result_data={"frames": 12})
    [record] = [r for r in caplog.records if "synth_trace" in r.getMessage()]
    data = _payload(record)["data"]
    assert data["duration_seconds"] >= 0
    assert data["frames"] == 12
    assert len(service.metric_values("synth_seconds")) == 1


def test_failed_trace_logs_an_error_and_unknown_trace_is_ignored(caplog):
    service = LoggingObservabilityService()
    with caplog.at_level(logging.INFO):
        service.end_trace(service.start_trace("synth"), success=False)
        service.end_trace("missing")
    assert any(r.levelno == logging.ERROR and "synth_trace_failed" in r.getMessage() for r in caplog.records)
    assert any(r.levelno == logging.WARNING and "missing" in r.getMessage() for r in caplog.records)
