"""Problem-aware observations made through a profiling session."""
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, TextIO, Tuple, Union

from ..device import ProfileSample
from ..errors import BudgetExhaustedError
from ..power_mode import PowerMode
from ..problem import Assessment, ProblemConfig, Variant, assess
from ..profiler import ProfilingSession, dominant_workload


@dataclass(frozen=True)
class Observation:
    """An assessed configuration with the samples behind it.

    ``train`` is the throughput-side sample and ``infer`` the latency-side one;
    a standalone problem carries only its own. ``dominant`` names the workload
    drawing more power, whose sample steers slope estimates.
    """

    assessment: Assessment
    train: Optional[ProfileSample] = None
    infer: Optional[ProfileSample] = None
    dominant: str = "train"

    def __post_init__(self) -> None:
        if self.sample_for(self.dominant) is None:
            raise ValueError(f"Observation has no {self.dominant} sample")

    def sample_for(self, role: str) -> Optional[ProfileSample]:
        """The ``"train"`` or ``"infer"`` sample, if it was profiled."""
        if role == "train":
            return self.train
        if role == "infer":
            return self.infer
        raise ValueError(f"Unknown workload role {role!r}")

    @property
    def steer(self) -> ProfileSample:
        sample = self.sample_for(self.dominant)
        assert sample is not None
        return sample

    @property
    def roles(self) -> Tuple[str, ...]:
        return tuple(r for r in ("train", "infer") if self.sample_for(r) is not None)

    @property
    def mode(self) -> PowerMode:
        return self.assessment.mode

    @property
    def batch_size(self) -> int:
        return self.assessment.batch_size


class ProblemProbe:
    """Observes configurations for one problem, charging the session."""

    def __init__(self, problem: ProblemConfig, session: ProfilingSession) -> None:
        self.problem = problem
        self.session = session
        self.observations: Dict[Tuple[PowerMode, int], Observation] = {}

    def observe(self, mode: PowerMode, batch_size: int) -> Observation:
        """Profile (or recall) ``mode`` at ``batch_size`` and assess it.

        Raises:
            BudgetExhaustedError: If a new profile is needed and none are left
        """
        key = (mode, batch_size)
        if key in self.observations:
            return self.observations[key]
        problem = self.problem
        if problem.variant is Variant.TRAIN:
            assert problem.train_workload is not None
            train = self.session.profile(mode, 1, problem.train_workload)
            observation = Observation(
                assess(problem, mode, 1, train, None), train=train
            )
        elif problem.variant is Variant.INFER:
            assert problem.infer_workload is not None
            infer = self.session.profile(mode, batch_size, problem.infer_workload)
            observation = Observation(
                assess(problem, mode, batch_size, None, infer),
                infer=infer,
                dominant="infer",
            )
        else:
            assert problem.train_workload and problem.infer_workload
            train, infer = self.session.profile_pair(
                mode,
                batch_size,
                problem.train_workload,
                problem.infer_workload,
                problem.throughput_batch_size,
            )
            observation = Observation(
                assess(problem, mode, batch_size, train, infer),
                train=train,
                infer=infer,
                dominant=dominant_workload(train, infer),
            )
        self.observations[key] = observation
        return observation

    def try_observe(self, mode: PowerMode, batch_size: int) -> Optional[Observation]:
        """Like :meth:`observe` but returns ``None`` once the budget is spent."""
        try:
            return self.observe(mode, batch_size)
        except BudgetExhaustedError:
            return None

    def assessments(self) -> List[Assessment]:
        return [o.assessment for o in self.observations.values()]


@dataclass
class TraceEvent:
    """One step of a search, serialized as a JSON line."""

    step: int
    mode: PowerMode
    batch_size: int
    time: float
    power: float
    action: str
    rho: Dict[str, float] = field(default_factory=dict)
    pruned: Optional[Tuple[str, int, int]] = None
    """Dimension name and the (low, high) values removed from the search."""

    def to_dict(self) -> Dict[str, object]:
        return {
            "step": self.step,
            "mode": self.mode.to_dict(),
            "batch_size": self.batch_size,
            "time_s": self.time,
            "power_w": self.power,
            "rho": self.rho,
            "pruned": list(self.pruned) if self.pruned else None,
            "action": self.action,
        }


class SearchTrace:
    """Ordered record of the steps a search took."""

    def __init__(self) -> None:
        self.events: List[TraceEvent] = []

    def __len__(self) -> int:
        return len(self.events)

    def record(
        self,
        observation: Observation,
        action: str,
        rho: Optional[Dict[str, float]] = None,
        pruned: Optional[Tuple[str, int, int]] = None,
    ) -> None:
        self.events.append(
            TraceEvent(
                step=len(self.events) + 1,
                mode=observation.mode,
                batch_size=observation.batch_size,
                time=observation.steer.time,
                power=observation.assessment.power,
                action=action,
                rho=dict(rho or {}),
                pruned=pruned,
            )
        )

    def lines(self) -> List[str]:
        return [json.dumps(event.to_dict()) for event in self.events]

    def write(self, target: Union[str, Path, TextIO]) -> None:
        text = "\n".join(self.lines()) + ("\n" if self.events else "")
        if isinstance(target, (str, Path)):
            Path(target).write_text(text, encoding="utf-8")
        else:
            target.write(text)
