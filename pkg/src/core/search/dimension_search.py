"""Dimension-wise search over the power-mode grid at a fixed batch size.

Power grows monotonically along every dimension, so one observation splits a
dimension's remaining values: if it fits the power budget, every lower value is
slower and can be dropped; if it does not, every higher value is over budget too.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..device import ProfileSample
from ..errors import BudgetExhaustedError
from ..power_mode import DIMENSIONS, PowerModeGrid
from ..problem import Assessment, ProblemConfig, assess, best_of, rank_key
from .probe import Observation, ProblemProbe, SearchTrace

logger = logging.getLogger(__name__)

SLOPE = "slope"
ROUND_ROBIN = "round_robin"

_MIN_POWER = 1e-6
_MIN_RATIO = 1e-6


@dataclass
class SlopeState:
    """Finite-difference slopes of time and power along each dimension."""

    power_epsilon: float = 0.5
    """Power changes (W) below this suppress a dimension's ratio."""
    m_time: List[float] = field(default_factory=lambda: [0.0] * len(DIMENSIONS))
    m_power: List[float] = field(default_factory=lambda: [0.0] * len(DIMENSIONS))
    rho: List[float] = field(default_factory=lambda: [0.0] * len(DIMENSIONS))
    exhausted: List[bool] = field(default_factory=lambda: [False] * len(DIMENSIONS))

    def update(
        self,
        dim: int,
        first: Tuple[int, Observation],
        second: Tuple[int, Observation],
    ) -> None:
        """Recompute ``dim``'s slopes from two ``(value, observation)`` points.

        Both differences come from the workload dominant at the newer point.
        """
        (v1, o1), (v2, o2) = first, second
        dv = float(v2 - v1)
        if dv == 0:
            return
        role = o2.dominant
        s1, s2 = o1.sample_for(role), o2.sample_for(role)
        if s1 is None or s2 is None:
            return
        dt = s2.time - s1.time
        dp = s2.power - s1.power
        self.m_time[dim] = dt / dv
        self.m_power[dim] = dp / dv
        self.rho[dim] = 0.0 if abs(dp) < self.power_epsilon else abs(dt) / abs(dp)

    def exhaust(self, dim: int) -> None:
        self.exhausted[dim] = True
        self.rho[dim] = 0.0

    def best_dimension(self) -> Optional[int]:
        """Non-exhausted dimension with the largest ratio; lowest index wins ties."""
        active = [d for d in range(len(self.rho)) if not self.exhausted[d]]
        if not active:
            return None
        return max(active, key=lambda d: (self.rho[d], -d))

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(DIMENSIONS, self.rho))


def _extend(xs: np.ndarray, ys: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Piecewise-linear interpolation, continued linearly past both end points."""
    out = np.interp(targets, xs, ys)
    if len(xs) < 2:
        return out
    below, above = targets < xs[0], targets > xs[-1]
    out[below] = ys[0] + (targets[below] - xs[0]) * (ys[1] - ys[0]) / (xs[1] - xs[0])
    out[above] = ys[-1] + (targets[above] - xs[-1]) * (ys[-1] - ys[-2]) / (
        xs[-1] - xs[-2]
    )
    return out


class SlopeModel:
    """Per-dimension time and power curves measured around one anchor mode.

    Time is a product of per-dimension factors and power a sum of per-dimension
    terms, so curves taken one dimension at a time predict any combination. Each
    curve stores time ratios and power differences against the anchor; ratios are
    interpolated in the inverse of the dimension value and power in the value.
    """

    def __init__(
        self, grid: PowerModeGrid, anchor: Sequence[int], reference: Observation
    ) -> None:
        self.grid = grid
        self.anchor = tuple(anchor)
        self.reference = reference
        self._points: Dict[str, List[Dict[int, Tuple[float, float]]]] = {
            role: [{index: (1.0, 0.0)} for index in self.anchor]
            for role in reference.roles
        }

    def add(self, dim: int, index: int, observation: Observation) -> None:
        """Record an observation that differs from the anchor only along ``dim``."""
        for role, curves in self._points.items():
            sample = observation.sample_for(role)
            base = self.reference.sample_for(role)
            if sample is None or base is None:
                continue
            curves[dim][index] = (sample.time / base.time, sample.power - base.power)

    def known(self, role: str, dim: int) -> List[int]:
        return sorted(self._points[role][dim])

    def curve(self, role: str, dim: int) -> Tuple[np.ndarray, np.ndarray]:
        """Predicted time ratio and power difference for every value of ``dim``."""
        points = self._points[role][dim]
        indices = sorted(points)
        values = np.asarray(self.grid.dimension_values()[dim], dtype=float)
        inverse = 1.0 / values
        descending = indices[::-1]
        ratio = _extend(
            inverse[descending], np.array([points[i][0] for i in descending]), inverse
        )
        power = _extend(
            values[indices], np.array([points[i][1] for i in indices]), values
        )
        return np.maximum(ratio, _MIN_RATIO), power

    def predict(self, role: str) -> Tuple[np.ndarray, np.ndarray]:
        """Predicted time and power of every grid mode, in grid iteration order."""
        base = self.reference.sample_for(role)
        assert base is not None
        ratio = np.ones(self.grid.shape)
        power = np.zeros(self.grid.shape)
        for dim in range(len(DIMENSIONS)):
            dim_ratio, dim_power = self.curve(role, dim)
            shape = [1] * len(DIMENSIONS)
            shape[dim] = -1
            ratio = ratio * dim_ratio.reshape(shape)
            power = power + dim_power.reshape(shape)
        times = base.time * ratio.ravel()
        powers = np.maximum(base.power + power, _MIN_POWER).ravel()
        return times, powers

    def assessments(self, problem: ProblemConfig, batch_size: int) -> List[Assessment]:
        """Assess every grid mode from predicted samples."""
        predicted = {role: self.predict(role) for role in self._points}
        out = []
        for position, mode in enumerate(self.grid):
            samples: Dict[str, ProfileSample] = {}
            for role, (times, powers) in predicted.items():
                base = self.reference.sample_for(role)
                assert base is not None
                samples[role] = ProfileSample(
                    mode,
                    base.batch_size,
                    float(times[position]),
                    float(powers[position]),
                    base.workload,
                )
            out.append(
                assess(
                    problem, mode, batch_size, samples.get("train"), samples.get("infer")
                )
            )
        return out


class DimensionSearch:
    """Probe one dimension at a time, halving its remaining values on each probe.

    With ``order="slope"`` every dimension is searched around the fixed midpoint:
    the search probes each dimension's extreme, then always follows the dimension
    with the largest time-to-power slope ratio. The curves measured on the way
    feed a :class:`SlopeModel`, and the last trials go to the fastest predicted
    combinations. With ``order="round_robin"`` it skips the extremes, cycles
    through dimensions and moves the anchor to each dimension's best value as the
    dimension runs out.

    Args:
        spare: Trials left untouched for the caller
        combine: Trials held back from halving for predicted combinations
    """

    def __init__(
        self,
        probe: ProblemProbe,
        grid: PowerModeGrid,
        batch_size: int,
        trace: Optional[SearchTrace] = None,
        power_epsilon: float = 0.5,
        order: str = SLOPE,
        spare: int = 0,
        combine: int = 2,
    ) -> None:
        if order not in (SLOPE, ROUND_ROBIN):
            raise ValueError(f"Unknown search order {order!r}")
        if spare < 0 or combine < 0:
            raise ValueError("Reserved trials must not be negative")
        self.probe = probe
        self.grid = grid
        self.batch_size = batch_size
        self.trace = trace if trace is not None else SearchTrace()
        self.order = order
        self.spare = spare
        self.combine = combine if order == SLOPE else 0
        self.slopes = SlopeState(power_epsilon)
        self.anchor: List[int] = list(grid.midpoint_indices())
        self.intervals: List[Tuple[int, int]] = []
        self.along: List[List[Tuple[int, Observation]]] = [[] for _ in DIMENSIONS]
        self.model: Optional[SlopeModel] = None
        self._turn = -1

    def _values(self, dim: int) -> List[int]:
        return self.grid.dimension_values()[dim]

    @property
    def _left(self) -> int:
        return self.probe.session.remaining - self.spare

    def _observe_at(self, dim: Optional[int], index: Optional[int]) -> Observation:
        indices = list(self.anchor)
        if dim is not None and index is not None:
            indices[dim] = index
        return self._observe(indices)

    def _observe(self, indices: Sequence[int]) -> Observation:
        mode = self.grid.mode_at(indices)
        if (mode, self.batch_size) not in self.probe.observations and self._left <= 0:
            raise BudgetExhaustedError("Remaining trials are reserved")
        return self.probe.observe(mode, self.batch_size)

    def _prune(
        self, dim: int, index: int, observation: Observation
    ) -> Tuple[str, int, int]:
        lo, hi = self.intervals[dim]
        values = self._values(dim)
        if observation.assessment.power_ok:
            removed = (values[min(lo, index)], values[index])
            self.intervals[dim] = (index + 1, hi)
        else:
            removed = (values[index], values[max(hi, index)])
            self.intervals[dim] = (lo, index - 1)
        self.along[dim].append((index, observation))
        if self.model is not None and self.order == SLOPE:
            self.model.add(dim, index, observation)
        return DIMENSIONS[dim], removed[0], removed[1]

    def _refresh(self, dim: int) -> None:
        points = self.along[dim]
        if len(points) >= 2:
            (i1, o1), (i2, o2) = points[-2], points[-1]
            values = self._values(dim)
            self.slopes.update(dim, (values[i1], o1), (values[i2], o2))
        lo, hi = self.intervals[dim]
        if lo > hi:
            self.slopes.exhaust(dim)
            if self.order == ROUND_ROBIN:
                self._settle(dim)

    def _settle(self, dim: int) -> None:
        """Fix ``dim`` at its best budget-fitting value, or its lowest tried value."""
        fitting = [i for i, o in self.along[dim] if o.assessment.power_ok]
        tried = [i for i, _ in self.along[dim]]
        self.anchor[dim] = max(fitting) if fitting else min(tried)

    def _select(self) -> Optional[int]:
        if self.order == SLOPE:
            return self.slopes.best_dimension()
        for step in range(1, len(DIMENSIONS) + 1):
            dim = (self._turn + step) % len(DIMENSIONS)
            if not self.slopes.exhausted[dim]:
                self._turn = dim
                return dim
        return None

    def run(self) -> List[Observation]:
        """Search until nothing is left to try or the budget runs out."""
        try:
            self._search()
        except BudgetExhaustedError:
            logger.debug("Budget exhausted after %d steps", len(self.trace))
        return list(self.probe.observations.values())

    def _search(self) -> None:
        start = self._observe_at(None, None)
        over = not start.assessment.power_ok
        self.trace.record(start, "start")
        self.model = SlopeModel(self.grid, self.anchor, start)
        mid = self.grid.midpoint_indices()
        for dim, n in enumerate(self.grid.shape):
            self.intervals.append((0, mid[dim] - 1) if over else (mid[dim] + 1, n - 1))
            self.along[dim].append((mid[dim], start))
            if self.intervals[dim][0] > self.intervals[dim][1]:
                self.slopes.exhaust(dim)

        if self.order == SLOPE:
            for dim in range(len(DIMENSIONS)):
                lo, hi = self.intervals[dim]
                if lo > hi:
                    continue
                index = lo if over else hi
                observation = self._observe_at(dim, index)
                pruned = self._prune(dim, index, observation)
                self._refresh(dim)
                self.trace.record(observation, "extreme", self.slopes.as_dict(), pruned)

        while self._left > self.combine:
            dim = self._select()
            if dim is None:
                break
            lo, hi = self.intervals[dim]
            index = (lo + hi) // 2
            observation = self._observe_at(dim, index)
            pruned = self._prune(dim, index, observation)
            self._refresh(dim)
            self.trace.record(observation, "probe", self.slopes.as_dict(), pruned)

        if self.order == SLOPE:
            self._combine()
        else:
            # Every dimension settled; the combined point may not have been seen yet.
            observation = self._observe_at(None, None)
            self.trace.record(observation, "settle", self.slopes.as_dict())

    def _combine(self) -> None:
        """Profile the fastest predicted unseen modes.

        The first ``combine`` picks are always taken; later ones only while the
        prediction beats the best feasible observation.
        """
        assert self.model is not None
        problem = self.probe.problem
        taken = 0
        while True:
            seen = {
                key[0] for key in self.probe.observations if key[1] == self.batch_size
            }
            candidates = [
                a
                for a in self.model.assessments(problem, self.batch_size)
                if a.mode not in seen
            ]
            pick = best_of(problem, candidates)
            if pick is None:
                return
            if taken >= self.combine:
                incumbent = best_of(
                    problem,
                    [
                        o.assessment
                        for o in self.probe.observations.values()
                        if o.batch_size == self.batch_size
                    ],
                )
                if incumbent is not None and rank_key(problem, pick) >= rank_key(
                    problem, incumbent
                ):
                    return
            observation = self._observe(self.grid.indices_of(pick.mode))
            taken += 1
            logger.debug(
                "Predicted %.4fs at %s, observed %.4fs",
                pick.time, pick.mode, observation.assessment.time,
            )
            self.trace.record(observation, "combine", self.slopes.as_dict())
