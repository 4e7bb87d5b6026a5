"""Managed interleaving: one inference minibatch per cycle, training in the slack."""
import math
from dataclasses import dataclass
from typing import Dict, Optional

from ..device import ProfileSample
from ..power_mode import PowerMode

# Absorbs float error in slack/t_tr so exact multiples are not floored down.
_FLOOR_EPS = 1e-9


@dataclass(frozen=True)
class InterleavePlan:
    """A schedule alternating ``tau`` training minibatches with one inference batch.

    An infeasible plan is returned as a tagged result with ``feasible=False``.
    """

    mode: PowerMode
    batch_size: int
    arrival_rate: float
    tau: int
    cycle_time: float
    """Seconds between inference batches, ``batch_size / arrival_rate``."""
    latency: float
    """Peak per-request latency, ``(batch_size - 1) / arrival_rate + t_in``."""
    throughput: float
    """Training (or background) minibatches per second."""
    power: float
    t_in: float
    p_in: float
    t_tr: Optional[float] = None
    p_tr: Optional[float] = None
    train_batch_size: int = 1
    feasible: bool = True

    @property
    def slack(self) -> float:
        return self.cycle_time - self.t_in

    @property
    def items_per_second(self) -> float:
        """Background throughput in items, for non-urgent inference slots."""
        return self.throughput * self.train_batch_size

    def to_dict(self) -> Dict[str, object]:
        return {
            "mode": self.mode.to_dict(),
            "batch_size": self.batch_size,
            "arrival_rate": self.arrival_rate,
            "tau": self.tau,
            "cycle_time": self.cycle_time,
            "latency": self.latency,
            "throughput": self.throughput,
            "power": self.power,
            "feasible": self.feasible,
        }


def peak_latency(batch_size: int, arrival_rate: float, t_in: float) -> float:
    """Latency of the first request of a batch: queueing plus one inference."""
    return (batch_size - 1) / arrival_rate + t_in


def is_sustainable(batch_size: int, arrival_rate: float, t_in: float) -> bool:
    """Whether the service rate ``batch_size / t_in`` keeps up with arrivals."""
    return t_in <= batch_size / arrival_rate + 1e-12


def plan_interleave(
    mode: PowerMode,
    batch_size: int,
    arrival_rate: float,
    t_tr: float,
    t_in: float,
    p_tr: float,
    p_in: float,
    train_batch_size: int = 1,
) -> InterleavePlan:
    """Fit as many whole training minibatches as the inference slack allows.

    Raises:
        ValueError: If any input is not positive
    """
    if min(batch_size, arrival_rate, t_tr, t_in, p_tr, p_in) <= 0:
        raise ValueError("Interleave inputs must all be positive")
    cycle = batch_size / arrival_rate
    feasible = is_sustainable(batch_size, arrival_rate, t_in)
    tau = max(0, math.floor((cycle - t_in) / t_tr + _FLOOR_EPS)) if feasible else 0
    return InterleavePlan(
        mode=mode,
        batch_size=batch_size,
        arrival_rate=arrival_rate,
        tau=tau,
        cycle_time=cycle,
        latency=peak_latency(batch_size, arrival_rate, t_in),
        throughput=tau / cycle,
        power=max(p_tr, p_in),
        t_in=t_in,
        p_in=p_in,
        t_tr=t_tr,
        p_tr=p_tr,
        train_batch_size=train_batch_size,
        feasible=feasible,
    )


def plan_inference(
    mode: PowerMode, batch_size: int, arrival_rate: float, t_in: float, p_in: float
) -> InterleavePlan:
    """An inference-only plan: the device idles in the slack."""
    if min(batch_size, arrival_rate, t_in, p_in) <= 0:
        raise ValueError("Inference plan inputs must all be positive")
    return InterleavePlan(
        mode=mode,
        batch_size=batch_size,
        arrival_rate=arrival_rate,
        tau=0,
        cycle_time=batch_size / arrival_rate,
        latency=peak_latency(batch_size, arrival_rate, t_in),
        throughput=0.0,
        power=p_in,
        t_in=t_in,
        p_in=p_in,
        feasible=is_sustainable(batch_size, arrival_rate, t_in),
    )


def plan_concurrent_infer(
    urgent: ProfileSample, nonurgent: ProfileSample, arrival_rate: float
) -> InterleavePlan:
    """Interleave non-urgent inference batches into an urgent workload's slack.

    ``nonurgent`` is measured at its fixed batch size and takes the place of a
    training minibatch; the plan's throughput counts non-urgent batches per second.
    """
    if urgent.mode != nonurgent.mode:
        raise ValueError("Both samples must come from the same power mode")
    return plan_interleave(
        urgent.mode,
        urgent.batch_size,
        arrival_rate,
        t_tr=nonurgent.time,
        t_in=urgent.time,
        p_tr=nonurgent.power,
        p_in=urgent.power,
        train_batch_size=nonurgent.batch_size,
    )
