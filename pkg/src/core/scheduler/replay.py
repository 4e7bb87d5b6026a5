"""Re-solving a latency-bound problem as its arrival rate changes along a trace.

Not re-exported from the package: the search strategies it drives import the
interleave planner from here.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

import numpy as np
import pandas as pd

from ..device import DeviceModel
from ..errors import BudgetExhaustedError, ConfigError
from ..harness.strategies import StrategyRunner, parse_strategy
from ..oracle import GroundTruth
from ..power_mode import PowerMode
from ..problem import Assessment, ProblemConfig, Solution, Variant, assess, best_of
from ..profiler import ProfileHistory, ProfilingSession
from ..search.als import AlsResult
from ..search.gmd import GmdConfig, gmd_solve
from ..search.probe import ProblemProbe
from ..surrogate import TrainConfig
from .interleave import InterleavePlan, plan_inference
from .simulator import SimConfig, SimResult, simulate
from .trace import ArrivalTrace

logger = logging.getLogger(__name__)

STRATEGIES = ("gmd", "als", "optimal", "rnd<k>", "nn<k>")

# Widening applied to the covered rate range when ALS has to extend it.
_EXTEND_MARGIN = 0.1


@dataclass(frozen=True)
class Decision:
    """A strategy's answer for one segment and the profiling it took."""

    solution: Optional[Solution]
    action: str
    new_profiles: int = 0
    profiling_time: float = 0.0
    violated: bool = False


def check_strategy(name: str) -> str:
    """Validate a replay strategy name and return its kind.

    Raises:
        ConfigError: If the name is not ``gmd``, ``als``, ``optimal``, ``rnd<k>``
            or ``nn<k>``
    """
    kind, _ = parse_strategy(name)
    if kind == "binary":
        raise ConfigError(f"Replay strategy must be one of {STRATEGIES}")
    return kind


@dataclass(frozen=True)
class SegmentLog:
    """What a strategy decided for one trace segment and what it cost."""

    index: int
    start: float
    duration: float
    rate: float
    solution: Optional[Solution]
    plan: Optional[InterleavePlan]
    action: str
    """One of reuse, backtrack, search, lookup, extend, predict, optimal or unsolved."""
    new_profiles: int = 0
    profiling_time: float = 0.0
    optimal_latency: Optional[float] = None
    """Best achievable peak latency at this segment's rate (inference templates)."""
    optimal_throughput: Optional[float] = None
    """Best achievable training throughput at this rate (concurrent templates)."""
    violated: bool = False
    """The chosen configuration breaks a budget on the device."""

    @property
    def solved(self) -> bool:
        return self.solution is not None and not self.violated

    @property
    def excess_latency_pct(self) -> Optional[float]:
        """How far the running plan's peak latency sits above the optimum, in %."""
        if not self.solved or self.plan is None or not self.optimal_latency:
            return None
        return 100.0 * (self.plan.latency - self.optimal_latency) / self.optimal_latency

    @property
    def tput_loss_pct(self) -> Optional[float]:
        """How far the running plan's throughput falls below the optimum, in %."""
        if not self.solved or self.plan is None or not self.optimal_throughput:
            return None
        best = self.optimal_throughput
        return 100.0 * (best - self.plan.throughput) / best

    def to_dict(self) -> Dict[str, object]:
        solution = self.solution
        return {
            "segment": self.index,
            "t_start_s": self.start,
            "rate_rps": self.rate,
            "action": self.action,
            "solved": self.solved,
            "violated": self.violated,
            "mode": str(solution.mode) if solution else None,
            "batch_size": solution.batch_size if solution else None,
            "latency_s": self.plan.latency if self.plan and solution else None,
            "power_w": self.plan.power if self.plan and solution else None,
            "optimal_latency_s": self.optimal_latency,
            "excess_latency_pct": self.excess_latency_pct,
            "optimal_throughput": self.optimal_throughput,
            "tput_loss_pct": self.tput_loss_pct,
            "new_profiles": self.new_profiles,
            "profiling_time_s": self.profiling_time,
        }


@dataclass
class ReplayResult:
    """Per-segment decisions plus the simulation of the whole trace."""

    strategy: str
    segments: List[SegmentLog]
    sim: SimResult
    latency_budget: float

    @property
    def total_profiles(self) -> int:
        return sum(s.new_profiles for s in self.segments)

    @property
    def profiling_time(self) -> float:
        return sum(s.profiling_time for s in self.segments)

    @property
    def profiling_share(self) -> float:
        """Profiling seconds as a fraction of the trace horizon."""
        return self.profiling_time / self.sim.horizon

    @property
    def solved_segments(self) -> int:
        return sum(1 for s in self.segments if s.solved)

    @property
    def violated_segments(self) -> int:
        return sum(1 for s in self.segments if s.violated)

    def excess_latency(self) -> np.ndarray:
        """Excess latency over the optimum, in %, of every solved segment."""
        return _defined([s.excess_latency_pct for s in self.segments])

    def tput_loss(self) -> np.ndarray:
        return _defined([s.tput_loss_pct for s in self.segments])

    def segment_frame(self) -> pd.DataFrame:
        return pd.DataFrame([s.to_dict() for s in self.segments])

    def to_dict(self) -> Dict[str, object]:
        return {
            "strategy": self.strategy,
            "segments": len(self.segments),
            "solved_segments": self.solved_segments,
            "violated_segments": self.violated_segments,
            "total_profiles": self.total_profiles,
            "profiling_time_s": self.profiling_time,
            "profiling_share": self.profiling_share,
            "excess_latency_pct": _stats(self.excess_latency()),
            "tput_loss_pct": _stats(self.tput_loss()),
            "sim": self.sim.to_dict(self.latency_budget),
            "log": [s.to_dict() for s in self.segments],
        }


def _defined(values: List[Optional[float]]) -> np.ndarray:
    return np.array([v for v in values if v is not None], dtype=float)


def _stats(values: np.ndarray) -> Dict[str, Optional[float]]:
    if not values.size:
        return {"median": None, "mean": None, "max": None}
    return {
        "median": float(np.median(values)),
        "mean": float(values.mean()),
        "max": float(values.max()),
    }


def _plan_for(
    truth: GroundTruth, problem: ProblemConfig, solution: Solution
) -> InterleavePlan:
    """The plan the device actually runs for ``solution`` at ``problem``'s rate."""
    assert problem.arrival_rate is not None
    actual = truth.assess(problem, solution.mode, solution.batch_size)
    if actual.plan is not None:
        return actual.plan
    return plan_inference(
        solution.mode, solution.batch_size, problem.arrival_rate, actual.time,
        actual.power,
    )


@dataclass
class _GmdReplayer:
    """GMD with a shared history: reuse, then backtrack, then search."""

    device: DeviceModel
    config: GmdConfig
    history: ProfileHistory = field(default_factory=ProfileHistory)
    previous: List[Solution] = field(default_factory=list)

    def _known(self, problem: ProblemConfig) -> List[Assessment]:
        assert problem.infer_workload is not None
        infers = self.history.for_workload(problem.infer_workload)
        if problem.variant is Variant.INFER:
            return [assess(problem, s.mode, s.batch_size, None, s) for s in infers]
        assert problem.train_workload is not None
        known = []
        for infer in infers:
            train = self.history.get(
                (infer.mode, problem.throughput_batch_size, problem.train_workload)
            )
            if train is not None:
                known.append(assess(problem, infer.mode, infer.batch_size, train, infer))
        return known

    def _reuse(self, problem: ProblemConfig) -> Optional[Solution]:
        best = best_of(problem, self._known(problem))
        if best is None:
            return None
        return Solution.from_assessment(problem, best, 0, "gmd")

    def _backtrack(
        self, problem: ProblemConfig, session: ProfilingSession
    ) -> Optional[Solution]:
        """Retry earlier solutions' modes at larger batch sizes."""
        assert problem.infer_workload is not None
        sizes = sorted(self.device.workload(problem.infer_workload).eval_batch_sizes)
        probe = ProblemProbe(problem, session)
        seen: Set[PowerMode] = set()
        try:
            for solution in reversed(self.previous):
                if solution.mode in seen:
                    continue
                seen.add(solution.mode)
                for batch_size in (b for b in sizes if b > solution.batch_size):
                    if probe.observe(solution.mode, batch_size).assessment.feasible:
                        break
        except BudgetExhaustedError:
            logger.debug("Budget exhausted while backtracking")
        best = best_of(problem, probe.assessments())
        if best is None:
            return None
        return Solution.from_assessment(problem, best, session.trials_used, "gmd")

    def solve(self, problem: ProblemConfig) -> Decision:
        solution = self._reuse(problem)
        if solution is not None:
            return Decision(solution, "reuse")
        session = ProfilingSession(
            self.device, self.config.budget_for(problem.variant), self.history
        )
        action = "backtrack"
        solution = self._backtrack(problem, session) if self.previous else None
        if solution is None:
            action = "search"
            solution = gmd_solve(problem, session, self.config)
        if solution is not None:
            self.previous.append(solution)
        return Decision(solution, action, session.trials_used, session.profiling_time)


@dataclass
class _AlsReplayer:
    """Front lookups, extending the sampled rate range when a rate falls outside."""

    device: DeviceModel
    result: AlsResult
    covered: Tuple[float, float] = field(init=False)

    def __post_init__(self) -> None:
        self.covered = self.result.config.rate_range

    def solve(self, problem: ProblemConfig) -> Decision:
        assert problem.arrival_rate is not None
        rate = problem.arrival_rate
        low, high = self.covered
        extra: Optional[Tuple[float, float]] = None
        if rate > high:
            extra = (high, rate * (1.0 + _EXTEND_MARGIN))
        elif rate < low:
            extra = (rate * (1.0 - _EXTEND_MARGIN), low)
        if extra is None:
            return Decision(self.result.solve(problem), "lookup")
        before_trials = self.result.trials_used
        before_time = self.result.profiling_time
        self.result = self.result.extend(self.device, extra)
        self.covered = (min(low, extra[0]), max(high, extra[1]))
        return Decision(
            self.result.solve(problem),
            "extend",
            self.result.trials_used - before_trials,
            self.result.profiling_time - before_time,
        )


@dataclass
class _SampledReplayer:
    """Random-profiling strategies: profile once up front, then answer every rate.

    ``rnd<k>`` looks each rate up on its observed front; ``nn<k>`` picks from
    surrogate predictions and runs the pick even when it breaks a budget.
    """

    runner: StrategyRunner
    name: str
    charged: bool = False

    def solve(self, problem: ProblemConfig) -> Decision:
        samples = self.runner.samples(self.name, problem)
        profiles, seconds = 0, 0.0
        if not self.charged:
            profiles, seconds = samples.trials_used, samples.profiling_time
            self.charged = True
        run = self.runner.run(self.name, problem)
        action = "predict" if self.name.startswith("nn") else "lookup"
        return Decision(run.solution, action, profiles, seconds, run.violated)


def replay_dynamic(
    strategy: str,
    trace: ArrivalTrace,
    problem: ProblemConfig,
    device: DeviceModel,
    als_result: Optional[AlsResult] = None,
    gmd_config: Optional[GmdConfig] = None,
    sim_config: Optional[SimConfig] = None,
    seed: int = 0,
    train_config: Optional[TrainConfig] = None,
) -> ReplayResult:
    """Re-solve ``problem`` at every segment's rate and simulate the whole trace.

    ``problem`` is an inference or concurrent template; its arrival rate is
    replaced per segment. A segment without a solution keeps running the previous
    plan at the new rate, or leaves the device idle when there is none. Every
    plan is built from the device's own timings, so a prediction that misses
    shows up in the simulated latencies.

    Raises:
        ValueError: If the strategy is unknown or the problem is a training one
    """
    kind = check_strategy(strategy)
    if problem.variant is Variant.TRAIN:
        raise ValueError("Dynamic replay needs an infer or concurrent problem template")
    assert problem.infer_workload is not None and problem.latency_budget is not None

    runner = StrategyRunner(
        device, seed, gmd_config or GmdConfig(), train_config=train_config
    )
    truth = runner.truth
    gmd = _GmdReplayer(device, runner.gmd_config)
    als: Optional[_AlsReplayer] = None
    sampled: Optional[_SampledReplayer] = None
    charge = 0, 0.0
    if kind == "als":
        if als_result is None:
            fresh = runner.samples("als", problem)
            assert isinstance(fresh, AlsResult)
            als_result = fresh
            charge = als_result.trials_used, als_result.profiling_time
        als = _AlsReplayer(device, als_result)
    elif kind in ("rnd", "nn"):
        sampled = _SampledReplayer(runner, strategy)

    logs: List[SegmentLog] = []
    plans: List[Optional[InterleavePlan]] = []
    last: Optional[Solution] = None
    for index, (start, segment) in enumerate(zip(trace.starts, trace.segments)):
        current = problem.with_arrival_rate(segment.rate)
        optimum = runner.optimum(current)
        best_latency: Optional[float] = None
        best_throughput: Optional[float] = None
        if optimum is not None and problem.variant is Variant.INFER:
            best_latency = optimum.latency
        elif optimum is not None:
            best_throughput = optimum.throughput
        if kind == "gmd":
            decision = gmd.solve(current)
        elif als is not None:
            decision = als.solve(current)
        elif sampled is not None:
            decision = sampled.solve(current)
        else:
            decision = Decision(optimum, "optimal")
        profiles = decision.new_profiles + (charge[0] if index == 0 else 0)
        seconds = decision.profiling_time + (charge[1] if index == 0 else 0.0)

        action = decision.action
        if decision.solution is None:
            action = "unsolved"
            logger.warning(
                "Segment %d at %.1f rps has no solution under %s",
                index, segment.rate, strategy,
            )
        else:
            last = decision.solution
            if decision.violated:
                logger.warning(
                    "Segment %d at %.1f rps runs a configuration that breaks its "
                    "budgets under %s",
                    index, segment.rate, strategy,
                )
        plan = _plan_for(truth, current, last) if last is not None else None
        plans.append(plan)
        logs.append(
            SegmentLog(
                index, start, segment.duration, segment.rate,
                decision.solution, plan, action, profiles, seconds,
                best_latency, best_throughput, decision.violated,
            )
        )

    sim = simulate(plans, trace, problem.latency_budget, sim_config)
    result = ReplayResult(strategy, logs, sim, problem.latency_budget)
    logger.info(
        "Replayed %d segments with %s: %d solved, %d profiles (%.2f%% of horizon)",
        len(logs), strategy, result.solved_segments, result.total_profiles,
        100.0 * result.profiling_share,
    )
    return result
