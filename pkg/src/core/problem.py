"""Problem configurations, candidate assessment and solutions."""
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, List, Optional, Tuple

from .device import ProfileSample
from .power_mode import PowerMode
from .scheduler.interleave import (
    InterleavePlan,
    is_sustainable,
    peak_latency,
    plan_interleave,
)

DEFAULT_BACKGROUND_BATCH_SIZE = 16


class Variant(str, Enum):
    """The optimization problems a strategy can be asked to solve."""

    TRAIN = "train"
    INFER = "infer"
    CONCURRENT = "concurrent"
    CONCURRENT_INFER = "concurrent-infer"

    @property
    def has_latency(self) -> bool:
        return self is not Variant.TRAIN

    @property
    def is_concurrent(self) -> bool:
        return self in (Variant.CONCURRENT, Variant.CONCURRENT_INFER)

    @property
    def sense(self) -> str:
        """Direction of the objective: time and latency shrink, throughput grows."""
        return "maximize" if self.is_concurrent else "minimize"


@dataclass(frozen=True)
class ProblemConfig:
    """User budgets and workloads for one optimization problem.

    ``train_workload`` holds the throughput-bound workload: training, or the
    non-urgent inference workload for ``concurrent-infer``. ``infer_workload`` holds
    the latency-bound inference workload.
    """

    variant: Variant
    power_budget: float
    """Watts; compared inclusively."""
    train_workload: Optional[str] = None
    infer_workload: Optional[str] = None
    latency_budget: Optional[float] = None
    """Seconds per request."""
    arrival_rate: Optional[float] = None
    """Requests per second."""
    background_batch_size: int = DEFAULT_BACKGROUND_BATCH_SIZE
    latency_guard: bool = False
    """Plan concurrent problems against ``latency_budget - t_tr``."""

    def __post_init__(self) -> None:
        """Validate budgets and required workloads for the variant."""
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.power_budget < 0:
            raise ValueError("Power budget must not be negative")
        if self.variant is not Variant.INFER and not self.train_workload:
            raise ValueError(f"Variant {self.variant.value} needs a train workload")
        if self.variant is not Variant.TRAIN:
            if not self.infer_workload:
                raise ValueError(
                    f"Variant {self.variant.value} needs an infer workload"
                )
            if self.latency_budget is None or self.latency_budget <= 0:
                raise ValueError("Latency budget must be greater than 0")
            if self.arrival_rate is None or self.arrival_rate <= 0:
                raise ValueError("Arrival rate must be greater than 0")
        if self.background_batch_size < 1:
            raise ValueError("Background batch size must be at least 1")

    @property
    def throughput_batch_size(self) -> int:
        """Batch size the throughput-bound workload runs at."""
        if self.variant is Variant.CONCURRENT_INFER:
            return self.background_batch_size
        return 1

    def with_arrival_rate(self, rate: float) -> "ProblemConfig":
        return replace(self, arrival_rate=rate)

    def with_power_budget(self, budget: float) -> "ProblemConfig":
        return replace(self, power_budget=budget)

    def to_dict(self) -> Dict[str, object]:
        return {
            "variant": self.variant.value,
            "power_budget": self.power_budget,
            "train_workload": self.train_workload,
            "infer_workload": self.infer_workload,
            "latency_budget": self.latency_budget,
            "arrival_rate": self.arrival_rate,
        }


@dataclass(frozen=True)
class Assessment:
    """How one (mode, batch size) fares against a problem's constraints."""

    mode: PowerMode
    batch_size: int
    time: float
    """Training minibatch time for ``train``, inference time otherwise."""
    power: float
    power_ok: bool
    latency_ok: bool = True
    sustainable: bool = True
    latency: Optional[float] = None
    plan: Optional[InterleavePlan] = None

    @property
    def feasible(self) -> bool:
        return self.power_ok and self.latency_ok and self.sustainable

    @property
    def tau(self) -> Optional[int]:
        return self.plan.tau if self.plan is not None else None

    @property
    def throughput(self) -> float:
        if self.plan is not None:
            return self.plan.throughput
        return 1.0 / self.time if self.latency is None else 0.0


def assess(
    problem: ProblemConfig,
    mode: PowerMode,
    batch_size: int,
    train: Optional[ProfileSample],
    infer: Optional[ProfileSample],
) -> Assessment:
    """Score a configuration from observed (or predicted) samples.

    ``train`` is the throughput-side sample and ``infer`` the latency-side sample;
    each variant reads only the samples it needs.
    """
    variant = problem.variant
    if variant is Variant.TRAIN:
        assert train is not None
        return Assessment(
            mode, 1, train.time, train.power, train.power <= problem.power_budget
        )
    assert infer is not None
    assert problem.arrival_rate is not None and problem.latency_budget is not None
    alpha = problem.arrival_rate
    if variant is Variant.INFER:
        latency = peak_latency(batch_size, alpha, infer.time)
        return Assessment(
            mode,
            batch_size,
            infer.time,
            infer.power,
            power_ok=infer.power <= problem.power_budget,
            latency_ok=latency <= problem.latency_budget,
            sustainable=is_sustainable(batch_size, alpha, infer.time),
            latency=latency,
        )
    assert train is not None
    plan = plan_interleave(
        mode,
        batch_size,
        alpha,
        t_tr=train.time,
        t_in=infer.time,
        p_tr=train.power,
        p_in=infer.power,
        train_batch_size=problem.throughput_batch_size,
    )
    budget = problem.latency_budget
    if problem.latency_guard:
        budget -= train.time
    return Assessment(
        mode,
        batch_size,
        infer.time,
        plan.power,
        power_ok=plan.power <= problem.power_budget,
        latency_ok=plan.latency <= budget,
        sustainable=plan.feasible,
        latency=plan.latency,
        plan=plan,
    )


def objective(problem: ProblemConfig, assessment: Assessment) -> float:
    """Time for training, peak latency for inference, throughput when concurrent."""
    if problem.variant is Variant.TRAIN:
        return assessment.time
    if problem.variant is Variant.INFER:
        assert assessment.latency is not None
        return assessment.latency
    return assessment.throughput


def rank_key(problem: ProblemConfig, assessment: Assessment) -> Tuple[float, ...]:
    """Sort key under which the best assessment comes first.

    Ties on the objective go to lower latency (concurrent), then lower power, then
    smaller batch, then the lexicographically smaller mode.
    """
    tail = (assessment.power, float(assessment.batch_size), *assessment.mode.as_tuple())
    if problem.variant.is_concurrent:
        assert assessment.latency is not None
        return (-assessment.throughput, assessment.latency, *tail)
    return (objective(problem, assessment), *tail)


def best_of(
    problem: ProblemConfig, assessments: List[Assessment]
) -> Optional[Assessment]:
    """The best feasible assessment, or ``None``."""
    feasible = [a for a in assessments if a.feasible]
    return min(feasible, key=lambda a: rank_key(problem, a)) if feasible else None


@dataclass(frozen=True)
class Solution:
    """A selected configuration with its observed time, power and objective."""

    mode: PowerMode
    batch_size: int
    time: float
    power: float
    objective: float
    trials_used: int = 0
    tau: Optional[int] = None
    latency: Optional[float] = None
    throughput: Optional[float] = None
    strategy: str = ""

    @classmethod
    def from_assessment(
        cls,
        problem: ProblemConfig,
        assessment: Assessment,
        trials_used: int = 0,
        strategy: str = "",
    ) -> "Solution":
        return cls(
            mode=assessment.mode,
            batch_size=assessment.batch_size,
            time=assessment.time,
            power=assessment.power,
            objective=objective(problem, assessment),
            trials_used=trials_used,
            tau=assessment.tau,
            latency=assessment.latency,
            throughput=assessment.throughput if problem.variant.is_concurrent else None,
            strategy=strategy,
        )

    def to_dict(self) -> Dict[str, object]:
        return {
            "strategy": self.strategy,
            "mode": self.mode.to_dict(),
            "batch_size": self.batch_size,
            "time_s": self.time,
            "power_w": self.power,
            "objective": self.objective,
            "tau": self.tau,
            "latency_s": self.latency,
            "throughput": self.throughput,
            "trials_used": self.trials_used,
        }
