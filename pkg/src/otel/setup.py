#!/usr/bin/env python3
"""
OpenTelemetry setup for the hafrm command-line runs.
"""
import logging
import tracemalloc

import psutil
from opentelemetry import trace, metrics
from opentelemetry.sdk.resources import Resource
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import BatchSpanProcessor, ConsoleSpanExporter
from opentelemetry.sdk.metrics import MeterProvider
from opentelemetry.sdk.metrics.export import (
    PeriodicExportingMetricReader,
    ConsoleMetricExporter,
)

from hafrm.config import get_settings

logger = logging.getLogger(__name__)

_configured = False


def setup_telemetry() -> str:
    """Install meter and tracer providers according to OTEL_EXPORTER.

    Returns the exporter mode actually used. Safe to call more than once.
    """
    global _configured
    settings = get_settings()
    exporter = settings.otel_exporter
    if _configured:
        return exporter

    resource = Resource.create(attributes={"service.name": settings.otel_service_name})

    if exporter == "none":
        logger.debug("OpenTelemetry disabled (none mode)")
        metrics.set_meter_provider(MeterProvider(resource=resource))
        _configured = True
        return exporter

    #### METRICS ####
    if exporter == "otlp":
        from opentelemetry.exporter.otlp.proto.http.metric_exporter import OTLPMetricExporter
        logger.info("[Metrics]: Using OpenTelemetry Protocol exporter")
        metric_exporter = OTLPMetricExporter(endpoint=f"{settings.otel_endpoint}/v1/metrics")
    else:
        logger.info("[Metrics]: Using Console metric exporter")
        metric_exporter = ConsoleMetricExporter()

    metric_reader = PeriodicExportingMetricReader(metric_exporter, export_interval_millis=5000)
    metrics.set_meter_provider(MeterProvider(metric_readers=[metric_reader], resource=resource))

    #### TRACES ####
    if exporter == "otlp":
        from opentelemetry.exporter.otlp.proto.http.trace_exporter import OTLPSpanExporter
        logger.info("[Traces]: Using OpenTelemetry Protocol exporter")
        span_exporter = OTLPSpanExporter(endpoint=f"{settings.otel_endpoint}/v1/traces")
    else:
        logger.info("[Traces]: Using Console span exporter")
        span_exporter = ConsoleSpanExporter()

    trace_provider = TracerProvider(resource=resource)
    trace.set_tracer_provider(trace_provider)
    trace_provider.add_span_processor(BatchSpanProcessor(span_exporter, schedule_delay_millis=5000))

    _register_process_gauges()
    _configured = True
    return exporter


def _register_process_gauges() -> None:
    tracemalloc.start()
    meter = metrics.get_meter("hafrm.process")
    process = psutil.Process()

    def process_rss_callback(_):
        yield metrics.Observation(process.memory_info().rss / (1024 ** 2))

    meter.create_observable_gauge(
        name="process_resident_memory_mb",
        description="Resident Set Size (RSS) memory used by the process in megabytes",
        unit="MB",
        callbacks=[process_rss_callback],
    )

    def heap_memory_callback(_):
        current, _peak = tracemalloc.get_traced_memory()
        yield metrics.Observation(current)

    meter.create_observable_gauge(
        name="python_heap_memory_bytes",
        description="Current Python heap memory used (tracked by tracemalloc)",
        unit="By",
        callbacks=[heap_memory_callback],
    )
