"""Exhaustive ground-truth evaluation and the constrained optimum."""
from typing import Dict, Iterator, List, Optional, Tuple

from .device import DeviceModel, ProfileSample
from .power_mode import PowerMode
from .problem import Assessment, ProblemConfig, Solution, Variant, assess, best_of


class GroundTruth:
    """Memoized device evaluations over the whole grid.

    Used wherever a strategy's answer is re-checked, so every check agrees with
    the optimum it is compared against.
    """

    def __init__(self, device: DeviceModel) -> None:
        self.device = device
        self._cache: Dict[Tuple[str, int], Dict[PowerMode, ProfileSample]] = {}

    def _table(self, workload: str, batch_size: int) -> Dict[PowerMode, ProfileSample]:
        key = (workload, batch_size)
        if key not in self._cache:
            spec = self.device.workload(workload)
            self._cache[key] = {
                mode: self.device.sample(mode, batch_size, spec)
                for mode in self.device.grid
            }
        return self._cache[key]

    def sample(self, workload: str, mode: PowerMode, batch_size: int) -> ProfileSample:
        self.device.grid.validate(mode)
        return self._table(workload, batch_size)[mode]

    def batch_sizes(self, problem: ProblemConfig) -> Tuple[int, ...]:
        """Candidate inference batch sizes for the problem (``(1,)`` for training)."""
        if problem.variant is Variant.TRAIN:
            return (1,)
        assert problem.infer_workload is not None
        return self.device.workload(problem.infer_workload).eval_batch_sizes

    def assess(
        self, problem: ProblemConfig, mode: PowerMode, batch_size: int
    ) -> Assessment:
        train = infer = None
        if problem.train_workload is not None:
            train = self.sample(
                problem.train_workload, mode, problem.throughput_batch_size
            )
        if problem.variant is not Variant.TRAIN:
            assert problem.infer_workload is not None
            infer = self.sample(problem.infer_workload, mode, batch_size)
        return assess(problem, mode, batch_size, train, infer)

    def candidates(self, problem: ProblemConfig) -> Iterator[Assessment]:
        for batch_size in self.batch_sizes(problem):
            for mode in self.device.grid:
                yield self.assess(problem, mode, batch_size)


def optimal_oracle(
    truth: GroundTruth, problem: ProblemConfig
) -> Optional[Solution]:
    """Best configuration over every grid mode and candidate batch size."""
    assessments: List[Assessment] = list(truth.candidates(problem))
    best = best_of(problem, assessments)
    if best is None:
        return None
    return Solution.from_assessment(problem, best, strategy="optimal")


def recheck(
    truth: GroundTruth, problem: ProblemConfig, solution: Solution
) -> Assessment:
    """Re-evaluate a returned solution against ground truth."""
    return truth.assess(problem, solution.mode, solution.batch_size)
