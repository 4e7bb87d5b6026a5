"""Profiled sample sets that answer many problems through observed fronts."""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..device import ProfileSample
from ..pareto import ParetoFront, ParetoPoint, build_front
from ..problem import Assessment, ProblemConfig, Solution, Variant, assess, objective
from ..surrogate import CostSurrogate, TrainConfig

TRAIN = "train"
INFER = "infer"
CONCURRENT = "concurrent"


def kind_for(variant: Variant) -> str:
    """Sample-set kind able to answer problems of ``variant``."""
    variant = Variant(variant)
    if variant is Variant.TRAIN:
        return TRAIN
    if variant is Variant.INFER:
        return INFER
    return CONCURRENT


@dataclass
class SampleSet:
    """Observed samples of one workload, or of a throughput/latency pair.

    Pairs are profiled together per mode: the throughput-side workload at
    ``throughput_batch_size`` and the latency-side workload at each batch size.
    """

    kind: str
    train_workload: Optional[str] = None
    infer_workload: Optional[str] = None
    samples: List[ProfileSample] = field(default_factory=list)
    throughput_batch_size: int = 1
    trials_used: int = 0
    profiling_time: float = 0.0
    strategy: str = ""
    _surrogates: Dict[Tuple[object, ...], CostSurrogate] = field(
        default_factory=dict, init=False, repr=False, compare=False
    )

    @classmethod
    def for_problem(cls, problem: ProblemConfig, strategy: str = "") -> "SampleSet":
        return cls(
            kind=kind_for(problem.variant),
            train_workload=problem.train_workload,
            infer_workload=(
                None if problem.variant is Variant.TRAIN else problem.infer_workload
            ),
            throughput_batch_size=problem.throughput_batch_size,
            strategy=strategy,
        )

    @property
    def sampled_workload(self) -> Optional[str]:
        """Workload sampled on its own (the latency side for pairs)."""
        return self.train_workload if self.kind == TRAIN else self.infer_workload

    def of_workload(self, workload: Optional[str]) -> List[ProfileSample]:
        return [s for s in self.samples if s.workload == workload]

    def add(self, sample: ProfileSample) -> None:
        key = (sample.mode, sample.batch_size, sample.workload)
        if all((s.mode, s.batch_size, s.workload) != key for s in self.samples):
            self.samples.append(sample)

    def surrogate(
        self,
        workload: Optional[str],
        with_batch: bool,
        config: Optional[TrainConfig] = None,
        seed: int = 0,
    ) -> CostSurrogate:
        """Surrogate fitted on ``workload``'s samples, refitted only when they change."""
        observed = self.of_workload(workload)
        key = (workload, with_batch, repr(config), seed, len(observed))
        if key not in self._surrogates:
            self._surrogates[key] = CostSurrogate.fit_samples(
                observed, with_batch, config, seed
            )
        return self._surrogates[key]

    def pairs(self) -> List[Tuple[ProfileSample, ProfileSample]]:
        """(throughput-side, latency-side) samples profiled at the same mode."""
        background = {
            s.mode: s
            for s in self.of_workload(self.train_workload)
            if s.batch_size == self.throughput_batch_size
        }
        return [
            (background[s.mode], s)
            for s in self.of_workload(self.infer_workload)
            if s.mode in background
        ]

    def check(self, problem: ProblemConfig) -> None:
        """Raise ``ValueError`` unless these samples can answer ``problem``."""
        if kind_for(problem.variant) != self.kind:
            raise ValueError(
                f"{self.kind} samples cannot solve a {problem.variant.value} problem"
            )
        if self.kind != INFER and problem.train_workload != self.train_workload:
            raise ValueError("Problem throughput workload does not match the samples")
        if self.kind != TRAIN and problem.infer_workload != self.infer_workload:
            raise ValueError("Problem inference workload does not match the samples")
        if (
            self.kind == CONCURRENT
            and problem.throughput_batch_size != self.throughput_batch_size
        ):
            raise ValueError("Problem background batch size does not match the samples")

    def assessments(self, problem: ProblemConfig) -> List[Assessment]:
        """Every profiled configuration scored against ``problem``."""
        self.check(problem)
        if self.kind == TRAIN:
            return [
                assess(problem, s.mode, 1, s, None)
                for s in self.of_workload(self.train_workload)
            ]
        if self.kind == INFER:
            return [
                assess(problem, s.mode, s.batch_size, None, s)
                for s in self.of_workload(self.infer_workload)
            ]
        return [
            assess(problem, infer.mode, infer.batch_size, train, infer)
            for train, infer in self.pairs()
        ]

    def front_for(self, problem: ProblemConfig) -> Optional[ParetoFront]:
        """Observed front of configurations meeting every constraint but power."""
        usable = {
            (a.mode, a.batch_size): a
            for a in self.assessments(problem)
            if a.latency_ok and a.sustainable
        }
        if not usable:
            return None
        points = [
            ParetoPoint(a.mode, a.batch_size, a.power, objective(problem, a), a.tau)
            for a in usable.values()
        ]
        return build_front(points, problem.variant.sense)

    def solve(self, problem: ProblemConfig) -> Optional[Solution]:
        """Look ``problem`` up on the observed front; profiles nothing."""
        front = self.front_for(problem)
        if front is None:
            return None
        point = front.best_within(problem.power_budget)
        if point is None:
            return None
        index = {(a.mode, a.batch_size): a for a in self.assessments(problem)}
        return Solution.from_assessment(
            problem,
            index[(point.mode, point.batch_size)],
            self.trials_used,
            self.strategy,
        )
