"""Managed interleaving planner, arrival traces and the discrete-event simulator."""

from .interleave import (
    InterleavePlan,
    is_sustainable,
    peak_latency,
    plan_concurrent_infer,
    plan_inference,
    plan_interleave,
)
from .simulator import SimConfig, SimResult, simulate
from .trace import ArrivalTrace, Segment, gen_trace

__all__ = [
    "ArrivalTrace",
    "InterleavePlan",
    "Segment",
    "SimConfig",
    "SimResult",
    "gen_trace",
    "is_sustainable",
    "peak_latency",
    "plan_concurrent_infer",
    "plan_inference",
    "plan_interleave",
    "simulate",
]
