"""Gradient-ratio multi-dimensional search for the three problem variants."""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

from ..errors import BudgetExhaustedError
from ..problem import ProblemConfig, Solution, Variant, best_of
from ..profiler import ProfilingSession
from .dimension_search import SLOPE, DimensionSearch
from .probe import Observation, ProblemProbe, SearchTrace

logger = logging.getLogger(__name__)

STRATEGY = "gmd"


@dataclass(frozen=True)
class GmdConfig:
    """Profiling budgets per variant and the slope-suppression threshold."""

    train_budget: int = 10
    infer_budget: int = 11
    concurrent_budget: int = 15
    power_epsilon: float = 0.5
    """Watts; power steps smaller than this zero a dimension's slope ratio."""
    combine_trials: int = 2
    """Trials kept for the fastest predicted combinations of dimension values."""
    backtrack_trials: int = 1
    """Trials kept for retrying modes at other batch sizes."""

    def __post_init__(self) -> None:
        if min(self.train_budget, self.infer_budget, self.concurrent_budget) < 1:
            raise ValueError("Search budgets must be at least 1")
        if self.power_epsilon < 0:
            raise ValueError("Power epsilon must not be negative")
        if self.combine_trials < 0 or self.backtrack_trials < 0:
            raise ValueError("Reserved trials must not be negative")

    def budget_for(self, variant: Variant) -> int:
        variant = Variant(variant)
        if variant is Variant.TRAIN:
            return self.train_budget
        if variant is Variant.INFER:
            return self.infer_budget
        return self.concurrent_budget


def _batch_sizes(problem: ProblemConfig, session: ProfilingSession) -> List[int]:
    assert problem.infer_workload is not None
    return sorted(session.device.workload(problem.infer_workload).eval_batch_sizes)


def _finish(
    problem: ProblemConfig, probe: ProblemProbe, session: ProfilingSession
) -> Optional[Solution]:
    best = best_of(problem, probe.assessments())
    if best is None:
        logger.info(
            "GMD found no feasible configuration in %d trials", session.trials_used
        )
        return None
    return Solution.from_assessment(problem, best, session.trials_used, STRATEGY)


def _search(
    probe: ProblemProbe,
    session: ProfilingSession,
    batch_size: int,
    config: GmdConfig,
    trace: SearchTrace,
    spare: int = 0,
) -> List[Observation]:
    search = DimensionSearch(
        probe,
        session.device.grid,
        batch_size,
        trace=trace,
        power_epsilon=config.power_epsilon,
        order=SLOPE,
        spare=spare,
        combine=config.combine_trials,
    )
    return search.run()


def gmd_train(
    problem: ProblemConfig,
    session: ProfilingSession,
    config: Optional[GmdConfig] = None,
    trace: Optional[SearchTrace] = None,
) -> Optional[Solution]:
    """Fastest training mode within the power budget.

    Only observed modes that fit the budget can be returned, so the answer never
    violates it.
    """
    if problem.variant is not Variant.TRAIN:
        raise ValueError("gmd_train needs a train problem")
    config = config or GmdConfig()
    probe = ProblemProbe(problem, session)
    _search(probe, session, 1, config, trace if trace is not None else SearchTrace())
    return _finish(problem, probe, session)


def _backtrack(
    probe: ProblemProbe,
    candidates: Sequence[Observation],
    batch_sizes: Sequence[int],
    trace: SearchTrace,
) -> None:
    """Retry ``candidates`` in order at each of ``batch_sizes`` until one fits."""
    for batch_size in batch_sizes:
        for candidate in candidates:
            observation = probe.observe(candidate.mode, batch_size)
            trace.record(observation, "backtrack")
            if observation.assessment.feasible:
                return


def gmd_infer(
    problem: ProblemConfig,
    session: ProfilingSession,
    config: Optional[GmdConfig] = None,
    trace: Optional[SearchTrace] = None,
) -> Optional[Solution]:
    """Lowest-latency inference configuration, starting from the smallest batch.

    When nothing at the smallest batch keeps up with the arrival rate, modes that
    met the power budget are retried at larger batches in increasing-latency order.
    """
    if problem.variant is not Variant.INFER:
        raise ValueError("gmd_infer needs an infer problem")
    config = config or GmdConfig()
    trace = trace if trace is not None else SearchTrace()
    assert problem.latency_budget is not None
    probe = ProblemProbe(problem, session)
    sizes = _batch_sizes(problem, session)
    observed = _search(
        probe,
        session,
        sizes[0],
        config,
        trace,
        spare=config.backtrack_trials if len(sizes) > 1 else 0,
    )
    if best_of(problem, [o.assessment for o in observed]) is None:
        candidates = sorted(
            (
                o
                for o in observed
                if o.assessment.power_ok
                and not o.assessment.sustainable
                and o.assessment.time <= problem.latency_budget
            ),
            key=lambda o: (o.assessment.latency, o.mode.as_tuple()),
        )
        logger.debug("Backtracking over %d modes to larger batches", len(candidates))
        try:
            _backtrack(probe, candidates, sizes[1:], trace)
        except BudgetExhaustedError:
            logger.debug("Budget exhausted while backtracking")
    return _finish(problem, probe, session)


def gmd_concurrent(
    problem: ProblemConfig,
    session: ProfilingSession,
    config: Optional[GmdConfig] = None,
    trace: Optional[SearchTrace] = None,
) -> Optional[Solution]:
    """Highest background throughput under power and latency budgets.

    Starts from the largest batch and steps down while even MAXN misses the
    latency budget. Slopes follow whichever workload draws more power at each mode.
    """
    if not problem.variant.is_concurrent:
        raise ValueError("gmd_concurrent needs a concurrent problem")
    config = config or GmdConfig()
    trace = trace if trace is not None else SearchTrace()
    probe = ProblemProbe(problem, session)
    sizes = sorted(_batch_sizes(problem, session), reverse=True)
    maxn = session.device.grid.maxn

    try:
        start = None
        for position, batch_size in enumerate(sizes):
            bound = probe.observe(maxn, batch_size)
            trace.record(bound, "bound")
            if bound.assessment.latency_ok:
                start = position
                break
        if start is None:
            logger.info("MAXN misses the latency budget at every batch size")
            return _finish(problem, probe, session)
    except BudgetExhaustedError:
        return _finish(problem, probe, session)

    observed = _search(
        probe,
        session,
        sizes[start],
        config,
        trace,
        spare=config.backtrack_trials if start + 1 < len(sizes) else 0,
    )
    at_start = [o for o in observed if o.batch_size == sizes[start]]
    if best_of(problem, [o.assessment for o in at_start]) is None:
        candidates = sorted(
            (o for o in at_start if o.assessment.sustainable and o.assessment.power_ok),
            key=lambda o: (o.assessment.latency, o.mode.as_tuple()),
        )
        try:
            _backtrack(probe, candidates, sizes[start + 1 :], trace)
        except BudgetExhaustedError:
            logger.debug("Budget exhausted while backtracking")
    return _finish(problem, probe, session)


def gmd_solve(
    problem: ProblemConfig,
    session: ProfilingSession,
    config: Optional[GmdConfig] = None,
    trace: Optional[SearchTrace] = None,
) -> Optional[Solution]:
    """Dispatch to the GMD variant matching ``problem``."""
    if problem.variant is Variant.TRAIN:
        return gmd_train(problem, session, config, trace)
    if problem.variant is Variant.INFER:
        return gmd_infer(problem, session, config, trace)
    return gmd_concurrent(problem, session, config, trace)
