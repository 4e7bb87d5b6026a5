"""Pareto fronts over (power, objective) points and budget lookups."""
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Tuple, Union

import pandas as pd

from .power_mode import DIMENSIONS, PowerMode

SENSES = ("minimize", "maximize")
CSV_COLUMNS = ["power_w", "objective", *DIMENSIONS, "batch_size"]


@dataclass(frozen=True)
class ParetoPoint:
    """A (power, objective) trade-off point tagged with its configuration."""

    mode: PowerMode
    batch_size: int
    power: float
    objective: float
    aux: Optional[int] = None
    """Training minibatches per cycle, for concurrent fronts."""


@dataclass(frozen=True)
class ParetoFront:
    """Non-dominated points sorted by ascending power.

    Along the sorted points the objective strictly improves: it decreases on a
    minimizing front and increases on a maximizing one.
    """

    points: Tuple[ParetoPoint, ...]
    sense: str = "minimize"
    _powers: List[float] = field(
        init=False, repr=False, compare=False, default_factory=list
    )

    def __post_init__(self) -> None:
        if self.sense not in SENSES:
            raise ValueError(f"Front sense must be one of {SENSES}")
        object.__setattr__(self, "_powers", [p.power for p in self.points])

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[ParetoPoint]:
        return iter(self.points)

    def best_within(self, power_budget: float) -> Optional[ParetoPoint]:
        idx = bisect_right(self._powers, power_budget)
        return self.points[idx - 1] if idx else None

    def to_frame(self) -> pd.DataFrame:
        rows = [
            [p.power, p.objective, *p.mode.as_tuple(), p.batch_size]
            for p in self.points
        ]
        return pd.DataFrame(rows, columns=CSV_COLUMNS)

    def to_csv(self, path: Union[str, Path]) -> None:
        self.to_frame().to_csv(path, index=False)

    @classmethod
    def from_csv(cls, path: Union[str, Path], sense: str = "minimize") -> "ParetoFront":
        frame = pd.read_csv(path)
        points = [
            ParetoPoint(
                PowerMode(*(int(row[d]) for d in DIMENSIONS)),
                int(row["batch_size"]),
                float(row["power_w"]),
                float(row["objective"]),
            )
            for _, row in frame.iterrows()
        ]
        return build_front(points, sense) if points else cls((), sense)


def _better(a: float, b: float, sense: str) -> bool:
    return a < b if sense == "minimize" else a > b


def build_front(points: Iterable[ParetoPoint], sense: str = "minimize") -> ParetoFront:
    """Keep the maximal non-dominated subset of ``points``.

    Ties resolve towards lower power, then lower batch size, then the
    lexicographically smaller mode.

    Raises:
        ValueError: If ``points`` is empty or ``sense`` is unknown
    """
    if sense not in SENSES:
        raise ValueError(f"Front sense must be one of {SENSES}")
    items = list(points)
    if not items:
        raise ValueError("Cannot build a front from no points")
    sign = 1.0 if sense == "minimize" else -1.0
    items.sort(
        key=lambda p: (p.power, sign * p.objective, p.batch_size, p.mode.as_tuple())
    )
    front: List[ParetoPoint] = []
    for point in items:
        if not front or _better(point.objective, front[-1].objective, sense):
            front.append(point)
    return ParetoFront(tuple(front), sense)


def lookup(front: ParetoFront, power_budget: float) -> Optional[ParetoPoint]:
    """Best point drawing at most ``power_budget`` watts, or ``None``."""
    return front.best_within(power_budget)


def dominates(a: ParetoPoint, b: ParetoPoint, sense: str = "minimize") -> bool:
    """Whether ``a`` is at least as good as ``b`` in both axes and better in one."""
    no_worse = a.power <= b.power and not _better(b.objective, a.objective, sense)
    strictly = a.power < b.power or _better(a.objective, b.objective, sense)
    return no_worse and strictly


def hypervolume(front: ParetoFront, reference: Tuple[float, float]) -> float:
    """Area dominated by ``front`` inside the box bounded by ``reference``.

    ``reference`` is ``(max_power, worst_objective)``; points outside the box add
    nothing.
    """
    ref_power, ref_obj = reference
    sign = 1.0 if front.sense == "minimize" else -1.0
    area = 0.0
    points = [p for p in front.points if p.power <= ref_power]
    for i, point in enumerate(points):
        gain = sign * (ref_obj - point.objective)
        if gain <= 0:
            continue
        next_power = points[i + 1].power if i + 1 < len(points) else ref_power
        # Each point dominates the strip up to the next, better point.
        area += (next_power - point.power) * gain
    return area
