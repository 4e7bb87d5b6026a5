"""Named strategies, dispatched uniformly for single solves and sweeps."""
import logging
import re
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from ..device import DeviceModel
from ..errors import ConfigError
from ..oracle import GroundTruth, optimal_oracle
from ..problem import ProblemConfig, Solution, Variant
from ..profiler import ProfilingSession
from ..search import (
    AlsConfig,
    GmdConfig,
    SampleSet,
    SearchTrace,
    als_for_problem,
    binary_budget,
    binary_search,
    gmd_solve,
    kind_for,
    nn_k,
    random_samples,
)
from ..surrogate import TrainConfig

logger = logging.getLogger(__name__)

FIXED = ("optimal", "gmd", "als", "binary")
_COUNTED = re.compile(r"^(rnd|nn)(\d+)$")


def parse_strategy(name: str) -> Tuple[str, Optional[int]]:
    """Split a strategy name into its kind and profile count.

    Raises:
        ConfigError: If the name is not ``optimal``, ``gmd``, ``als``, ``binary``,
            ``rnd<k>`` or ``nn<k>``
    """
    if name in FIXED:
        return name, None
    match = _COUNTED.match(name)
    if match is None or int(match.group(2)) < 1:
        raise ConfigError(
            f"Unknown strategy {name!r}; expected one of {FIXED}, rnd<k> or nn<k>"
        )
    return match.group(1), int(match.group(2))


@dataclass
class StrategyRun:
    """A strategy's answer plus what it cost."""

    strategy: str
    solution: Optional[Solution]
    trials: int = 0
    violated: bool = False
    """A prediction-driven choice that breaks a budget on the device."""
    trace: Optional[SearchTrace] = None


def _als_config(variant: Variant, train: Optional[TrainConfig]) -> AlsConfig:
    if variant is Variant.TRAIN:
        return AlsConfig.for_train(train)
    if variant is Variant.INFER:
        return AlsConfig.for_infer(train=train)
    return AlsConfig.for_concurrent(train=train)


@dataclass
class StrategyRunner:
    """Runs named strategies on one device, caching pre-profiled sample sets.

    ALS and random-profiling strategies sample a workload once per seed and answer
    every later problem on that workload from the same samples.
    """

    device: DeviceModel
    seed: int = 0
    gmd_config: GmdConfig = field(default_factory=GmdConfig)
    train_config: Optional[TrainConfig] = None
    als_config: Optional[AlsConfig] = None
    truth: GroundTruth = field(init=False)
    _samples: Dict[Tuple[object, ...], SampleSet] = field(
        default_factory=dict, init=False
    )

    def __post_init__(self) -> None:
        self.truth = GroundTruth(self.device)

    def _key(self, name: str, problem: ProblemConfig) -> Tuple[object, ...]:
        return (
            name,
            kind_for(problem.variant),
            problem.train_workload if problem.variant is not Variant.INFER else None,
            problem.infer_workload if problem.variant is not Variant.TRAIN else None,
            problem.throughput_batch_size,
            self.seed,
        )

    def samples(self, name: str, problem: ProblemConfig) -> SampleSet:
        """The cached sample set a pre-profiled strategy answers ``problem`` from."""
        key = self._key(name, problem)
        if key not in self._samples:
            kind, k = parse_strategy(name)
            if kind == "als":
                config = self.als_config or _als_config(
                    problem.variant, self.train_config
                )
                self._samples[key] = als_for_problem(
                    problem, self.device, config, self.seed
                )
            elif kind in ("rnd", "nn"):
                assert k is not None
                self._samples[key] = random_samples(
                    problem, self.device, k, self.seed, strategy=name
                )
            else:
                raise ConfigError(f"Strategy {name!r} does not pre-profile")
            logger.info(
                "Pre-profiled %s for %s: %d trials",
                name, key[2] or key[3], self._samples[key].trials_used,
            )
        return self._samples[key]

    def optimum(self, problem: ProblemConfig) -> Optional[Solution]:
        return optimal_oracle(self.truth, problem)

    def run(self, name: str, problem: ProblemConfig) -> StrategyRun:
        """Solve ``problem`` with the named strategy.

        Raises:
            ConfigError: If the strategy name is unknown
        """
        kind, k = parse_strategy(name)
        if kind == "optimal":
            return StrategyRun(name, self.optimum(problem))
        if kind in ("gmd", "binary"):
            grid = self.device.grid
            budget = (
                self.gmd_config.budget_for(problem.variant)
                if kind == "gmd"
                else binary_budget(grid)
            )
            session = ProfilingSession(self.device, budget)
            trace = SearchTrace()
            if kind == "gmd":
                solution = gmd_solve(problem, session, self.gmd_config, trace)
            else:
                solution = binary_search(problem, session, trace)
            return StrategyRun(name, solution, session.trials_used, trace=trace)
        samples = self.samples(name, problem)
        if kind == "nn":
            assert k is not None
            outcome = nn_k(
                problem,
                self.device,
                k,
                self.seed,
                self.train_config,
                samples=samples,
                truth=self.truth,
            )
            return StrategyRun(
                name, outcome.solution, samples.trials_used, violated=outcome.violated
            )
        return StrategyRun(name, samples.solve(problem), samples.trials_used)


def solve_one(
    problem: ProblemConfig,
    strategy: str,
    device: DeviceModel,
    seed: int = 0,
    gmd_config: Optional[GmdConfig] = None,
    train_config: Optional[TrainConfig] = None,
) -> StrategyRun:
    """Solve a single problem with a named strategy."""
    runner = StrategyRunner(
        device, seed, gmd_config or GmdConfig(), train_config=train_config
    )
    return runner.run(strategy, problem)
