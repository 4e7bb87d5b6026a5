"""Random-profiling, neural-prediction and binary-search baselines."""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..device import DeviceModel, ProfileSample
from ..oracle import GroundTruth
from ..power_mode import PowerModeGrid
from ..problem import Assessment, ProblemConfig, Solution, Variant, assess, best_of
from ..profiler import ProfileHistory, ProfilingSession
from ..surrogate import TrainConfig
from .dimension_search import ROUND_ROBIN, DimensionSearch
from .probe import ProblemProbe, SearchTrace
from .samples import CONCURRENT, INFER, TRAIN, SampleSet, kind_for

logger = logging.getLogger(__name__)

KINDS = ("rnd", "nn", "binary")


@dataclass(frozen=True)
class BaselineConfig:
    """Which baseline to run, how many profiles it may take, and its seed."""

    kind: str = "rnd"
    k: int = 250
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"Baseline kind must be one of {KINDS}")
        if self.k < 1:
            raise ValueError("Baseline profile count must be at least 1")

    @property
    def name(self) -> str:
        return self.kind if self.kind == "binary" else f"{self.kind}{self.k}"


def random_samples(
    problem: ProblemConfig,
    device: DeviceModel,
    k: int,
    seed: int = 0,
    history: Optional[ProfileHistory] = None,
    strategy: str = "",
) -> SampleSet:
    """Profile ``k`` configurations drawn without replacement.

    Latency-bound workloads draw ``k // len(batch_sizes)`` modes and profile each
    at every batch size.

    Raises:
        ValueError: If ``k`` exceeds the candidate space
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    grid = device.grid
    modes = grid.modes
    kind = kind_for(problem.variant)
    sizes: Tuple[int, ...] = (1,)
    if kind != TRAIN:
        assert problem.infer_workload is not None
        sizes = device.workload(problem.infer_workload).eval_batch_sizes
    if k > len(modes) * len(sizes):
        raise ValueError(
            f"k={k} exceeds the {len(modes) * len(sizes)} candidate configurations"
        )
    count = max(1, k // len(sizes))
    rng = np.random.default_rng(seed)
    picks = [modes[int(i)] for i in rng.choice(len(modes), size=count, replace=False)]

    samples = SampleSet.for_problem(problem, strategy or f"rnd{k}")
    session = ProfilingSession(device, count * len(sizes), history)
    for mode in picks:
        for batch_size in sizes:
            if kind == TRAIN:
                assert problem.train_workload is not None
                samples.add(session.profile(mode, 1, problem.train_workload))
            elif kind == CONCURRENT:
                assert problem.train_workload and problem.infer_workload
                for sample in session.profile_pair(
                    mode,
                    batch_size,
                    problem.train_workload,
                    problem.infer_workload,
                    problem.throughput_batch_size,
                ):
                    samples.add(sample)
            else:
                assert problem.infer_workload is not None
                samples.add(session.profile(mode, batch_size, problem.infer_workload))
    samples.trials_used = session.trials_used
    samples.profiling_time = session.profiling_time
    logger.debug("Profiled %d random configurations", session.trials_used)
    return samples


def rnd_k(
    problem: ProblemConfig,
    device: DeviceModel,
    k: int,
    seed: int = 0,
    history: Optional[ProfileHistory] = None,
) -> Optional[Solution]:
    """Best configuration on the observed front of ``k`` random profiles."""
    return random_samples(problem, device, k, seed, history).solve(problem)


@dataclass(frozen=True)
class NnOutcome:
    """A prediction-driven choice and how it fares on the real device."""

    solution: Optional[Solution]
    """The choice, with predicted time and power."""
    actual: Optional[Assessment] = None
    power_violation: bool = False
    latency_violation: bool = False

    @property
    def violated(self) -> bool:
        return self.power_violation or self.latency_violation

    @property
    def solved(self) -> bool:
        """A violating choice counts as no solution."""
        return self.solution is not None and not self.violated


def _predicted_assessments(
    problem: ProblemConfig,
    grid: PowerModeGrid,
    samples: SampleSet,
    batch_sizes: Tuple[int, ...],
    config: Optional[TrainConfig],
    seed: int,
) -> List[Assessment]:
    modes = grid.modes
    kind = samples.kind
    train_preds: List[Optional[ProfileSample]] = [None] * len(modes)
    if kind != INFER:
        train_model = samples.surrogate(samples.train_workload, False, config, seed)
        train_preds = list(
            train_model.predict_samples(
                modes, problem.throughput_batch_size, str(samples.train_workload)
            )
        )
        if kind == TRAIN:
            return [
                assess(problem, mode, 1, train, None)
                for mode, train in zip(modes, train_preds)
            ]
    infer_model = samples.surrogate(samples.infer_workload, True, config, seed + 2)
    result: List[Assessment] = []
    for batch_size in batch_sizes:
        infer_preds = infer_model.predict_samples(
            modes, batch_size, str(samples.infer_workload)
        )
        for mode, train, infer in zip(modes, train_preds, infer_preds):
            result.append(assess(problem, mode, batch_size, train, infer))
    return result


def nn_k(
    problem: ProblemConfig,
    device: DeviceModel,
    k: int = 250,
    seed: int = 0,
    config: Optional[TrainConfig] = None,
    samples: Optional[SampleSet] = None,
    truth: Optional[GroundTruth] = None,
) -> NnOutcome:
    """Choose from surrogate predictions over the whole candidate space.

    The surrogates are fitted on ``k`` random profiles (or on ``samples`` when
    given). The chosen configuration is then checked on the device model.
    """
    if samples is None:
        samples = random_samples(problem, device, k, seed)
    if truth is None:
        truth = GroundTruth(device)
    sizes = truth.batch_sizes(problem)
    predicted = _predicted_assessments(
        problem, device.grid, samples, sizes, config, seed
    )
    best = best_of(problem, predicted)
    if best is None:
        return NnOutcome(None)
    solution = Solution.from_assessment(problem, best, samples.trials_used, f"nn{k}")
    actual = truth.assess(problem, best.mode, best.batch_size)
    outcome = NnOutcome(
        solution,
        actual,
        power_violation=not actual.power_ok,
        latency_violation=problem.variant is not Variant.TRAIN
        and not (actual.latency_ok and actual.sustainable),
    )
    if outcome.violated:
        logger.debug("NN choice %s violates on the device", best.mode)
    return outcome


def binary_budget(grid: PowerModeGrid) -> int:
    """One start profile plus one halving per bit of the grid size."""
    return math.ceil(math.log2(len(grid))) + 1


def binary_search(
    problem: ProblemConfig,
    session: ProfilingSession,
    trace: Optional[SearchTrace] = None,
) -> Optional[Solution]:
    """Round-robin halving from the grid midpoint, kept only as a comparator.

    Latency-bound problems search at the smallest batch size, concurrent ones at
    the largest.
    """
    batch_size = 1
    if problem.variant is not Variant.TRAIN:
        assert problem.infer_workload is not None
        sizes = session.device.workload(problem.infer_workload).eval_batch_sizes
        batch_size = max(sizes) if problem.variant.is_concurrent else min(sizes)
    probe = ProblemProbe(problem, session)
    DimensionSearch(
        probe, session.device.grid, batch_size, trace=trace, order=ROUND_ROBIN
    ).run()
    best = best_of(problem, probe.assessments())
    if best is None:
        return None
    return Solution.from_assessment(problem, best, session.trials_used, "binary")
