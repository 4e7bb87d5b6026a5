"""Discrete-event simulation of managed interleaving under an arrival trace.

The device runs exactly one minibatch at a time. An inference batch starts as
soon as enough requests are queued; otherwise a training minibatch runs if it
finishes before the next batch is predicted to be ready.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Deque, Dict, Generator, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
import simpy

from .interleave import InterleavePlan
from .trace import ArrivalTrace

logger = logging.getLogger(__name__)

PlanSchedule = Union[InterleavePlan, Sequence[Optional[InterleavePlan]]]

# Float slack when checking whether a training minibatch fits before batch-ready.
_FIT_EPS = 1e-12


@dataclass(frozen=True)
class SimConfig:
    """Simulation knobs."""

    drop_factor: float = 10.0
    """Queued requests whose latency would exceed this many budgets are dropped."""
    seed: int = 0
    """Seed for Poisson arrivals."""

    def __post_init__(self) -> None:
        if self.drop_factor <= 1:
            raise ValueError("Drop factor must be greater than 1")


@dataclass
class SimResult:
    """Per-request outcomes and device bookkeeping for one simulated run."""

    horizon: float
    arrivals: np.ndarray
    """Arrival time of every completed request."""
    finishes: np.ndarray
    dropped: int = 0
    unfinished: int = 0
    train_minibatches: int = 0
    inference_batches: int = 0
    peak_power: float = 0.0
    energy_j: float = 0.0
    queue_peak: int = 0
    busy_time: float = 0.0
    drop_times: List[float] = field(default_factory=list)

    @property
    def latencies(self) -> np.ndarray:
        return self.finishes - self.arrivals

    @property
    def completed(self) -> int:
        return int(self.arrivals.size)

    @property
    def max_latency(self) -> float:
        return float(self.latencies.max()) if self.completed else 0.0

    @property
    def train_throughput(self) -> float:
        """Training (or background) minibatches per second of horizon."""
        return self.train_minibatches / self.horizon

    def percentile(self, q: float) -> float:
        return float(np.percentile(self.latencies, q)) if self.completed else 0.0

    def violations(self, latency_budget: float, tolerance: float = 1e-9) -> int:
        return int(np.count_nonzero(self.latencies > latency_budget + tolerance))

    def to_dict(self, latency_budget: Optional[float] = None) -> Dict[str, object]:
        summary: Dict[str, object] = {
            "horizon_s": self.horizon,
            "completed": self.completed,
            "dropped": self.dropped,
            "unfinished": self.unfinished,
            "train_minibatches": self.train_minibatches,
            "inference_batches": self.inference_batches,
            "train_throughput": self.train_throughput,
            "peak_power_w": self.peak_power,
            "energy_j": self.energy_j,
            "queue_peak": self.queue_peak,
            "latency_max_s": self.max_latency,
            "latency_p50_s": self.percentile(50),
            "latency_p99_s": self.percentile(99),
        }
        if latency_budget is not None:
            summary["violations"] = self.violations(latency_budget)
        return summary

    def request_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "arrival_s": self.arrivals,
                "finish_s": self.finishes,
                "latency_s": self.latencies,
            }
        )

    def write_requests(self, path: Union[str, Path]) -> None:
        self.request_frame().to_csv(path, index=False)


class _Device:
    """Simpy processes for the request source and the interleaving device."""

    def __init__(
        self,
        env: simpy.Environment,
        plans: List[Optional[InterleavePlan]],
        trace: ArrivalTrace,
        latency_budget: Optional[float],
        config: SimConfig,
    ) -> None:
        self.env = env
        self.plans = plans
        self.trace = trace
        self.latency_budget = latency_budget
        self.config = config
        self.queue: Deque[float] = deque()
        self.in_flight = 0
        self.last_arrival: Optional[float] = None
        self.wakeup = env.event()
        self.arrived: List[float] = []
        self.finished: List[float] = []
        self.result = SimResult(trace.horizon, np.array([]), np.array([]))

    def source(self, times: np.ndarray) -> Generator:
        env = self.env
        for t in times:
            t = float(t)
            if t > env.now:
                yield env.timeout(t - env.now)
            self.queue.append(t)
            self.last_arrival = t
            self.result.queue_peak = max(self.result.queue_peak, len(self.queue))
            if not self.wakeup.triggered:
                self.wakeup.succeed()

    def _plan(self) -> Optional[InterleavePlan]:
        return self.plans[self.trace.segment_index(self.env.now)]

    def _drop_stale(self, plan: Optional[InterleavePlan]) -> None:
        if self.latency_budget is None:
            return
        limit = self.config.drop_factor * self.latency_budget
        extra = plan.t_in if plan is not None else 0.0
        while self.queue and self.env.now + extra - self.queue[0] > limit:
            self.queue.popleft()
            self.result.dropped += 1
            self.result.drop_times.append(self.env.now)

    def _training_fits(self, plan: InterleavePlan) -> bool:
        if plan.t_tr is None or plan.tau <= 0:
            return False
        rate = self.trace.rate_at(self.env.now)
        missing = plan.batch_size - len(self.queue)
        if self.last_arrival is None:
            start = self.trace.starts[self.trace.segment_index(self.env.now)]
            last = start - 1.0 / rate
        else:
            last = self.last_arrival
        ready = last + missing / rate
        return self.env.now + plan.t_tr <= ready + _FIT_EPS

    def _charge(self, plan: InterleavePlan, power: float, seconds: float) -> None:
        self.result.energy_j += power * seconds
        self.result.busy_time += seconds
        peak = plan.power if plan.tau > 0 else plan.p_in
        self.result.peak_power = max(self.result.peak_power, peak)

    def run(self) -> Generator:
        env = self.env
        while True:
            plan = self._plan()
            self._drop_stale(plan)
            if plan is not None and len(self.queue) >= plan.batch_size:
                batch = [self.queue.popleft() for _ in range(plan.batch_size)]
                self.in_flight = len(batch)
                yield env.timeout(plan.t_in)
                self.in_flight = 0
                self.arrived.extend(batch)
                self.finished.extend([env.now] * len(batch))
                self.result.inference_batches += 1
                self._charge(plan, plan.p_in, plan.t_in)
                continue
            if plan is not None and self._training_fits(plan):
                assert plan.t_tr is not None and plan.p_tr is not None
                yield env.timeout(plan.t_tr)
                self.result.train_minibatches += 1
                self._charge(plan, plan.p_tr, plan.t_tr)
                continue
            if self.wakeup.triggered:
                self.wakeup = env.event()
            boundary = self.trace.next_boundary(env.now)
            if boundary is None:
                yield self.wakeup
            else:
                yield self.wakeup | env.timeout(boundary - env.now)


def _schedule(
    plans: PlanSchedule, trace: ArrivalTrace
) -> List[Optional[InterleavePlan]]:
    if isinstance(plans, InterleavePlan):
        return [plans] * len(trace)
    schedule = list(plans)
    if len(schedule) != len(trace):
        raise ValueError(
            f"Got {len(schedule)} plans for a trace of {len(trace)} segments"
        )
    return schedule


def simulate(
    plans: PlanSchedule,
    trace: ArrivalTrace,
    latency_budget: Optional[float] = None,
    config: Optional[SimConfig] = None,
) -> SimResult:
    """Replay ``trace`` against one plan or one plan per segment.

    A ``None`` plan leaves the device idle for that segment. Requests still
    queued when the horizon ends are reported as unfinished.
    """
    config = config or SimConfig()
    schedule = _schedule(plans, trace)
    env = simpy.Environment()
    device = _Device(env, schedule, trace, latency_budget, config)
    env.process(device.source(trace.arrival_times(config.seed)))
    env.process(device.run())
    env.run(until=trace.horizon)

    result = device.result
    result.arrivals = np.asarray(device.arrived, dtype=float)
    result.finishes = np.asarray(device.finished, dtype=float)
    result.unfinished = len(device.queue) + device.in_flight
    logger.debug(
        "Simulated %.0fs: %d completed, %d dropped, %d training minibatches",
        trace.horizon, result.completed, result.dropped, result.train_minibatches,
    )
    return result
