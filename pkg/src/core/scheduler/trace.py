"""Piecewise-constant arrival-rate traces."""
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..errors import TraceError

DETERMINISTIC = "deterministic"
POISSON = "poisson"
ARRIVALS = (DETERMINISTIC, POISSON)

DEFAULT_SEGMENT_S = 300.0
DEFAULT_HORIZON_S = 7200.0
CSV_COLUMNS = ["t_start_s", "rate_rps"]


@dataclass(frozen=True)
class Segment:
    """A stretch of time with a constant mean arrival rate."""

    duration: float
    rate: float

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise TraceError("Segment duration must be greater than 0")
        if self.rate <= 0:
            raise TraceError("Segment rate must be greater than 0")


@dataclass(frozen=True)
class ArrivalTrace:
    """Consecutive rate segments starting at time 0.

    ``arrivals`` selects how requests arrive inside a segment: evenly spaced at
    ``1 / rate`` from the segment start, or as a Poisson process.
    """

    segments: Tuple[Segment, ...]
    arrivals: str = DETERMINISTIC

    def __post_init__(self) -> None:
        if not self.segments:
            raise TraceError("A trace needs at least one segment")
        if self.arrivals not in ARRIVALS:
            raise TraceError(f"Arrival process must be one of {ARRIVALS}")
        object.__setattr__(self, "segments", tuple(self.segments))

    def __len__(self) -> int:
        return len(self.segments)

    @property
    def starts(self) -> List[float]:
        starts, t = [], 0.0
        for segment in self.segments:
            starts.append(t)
            t += segment.duration
        return starts

    @property
    def horizon(self) -> float:
        return float(sum(s.duration for s in self.segments))

    @property
    def rates(self) -> List[float]:
        return [s.rate for s in self.segments]

    def segment_index(self, t: float) -> int:
        """Index of the segment containing ``t`` (the last one past the horizon)."""
        return min(max(bisect_right(self.starts, t) - 1, 0), len(self.segments) - 1)

    def rate_at(self, t: float) -> float:
        return self.segments[self.segment_index(t)].rate

    def next_boundary(self, t: float) -> Optional[float]:
        """Start of the segment after the one containing ``t``."""
        index = self.segment_index(t)
        if index + 1 >= len(self.segments):
            return None
        return self.starts[index + 1]

    def with_arrivals(self, arrivals: str) -> "ArrivalTrace":
        return ArrivalTrace(self.segments, arrivals)

    def rescaled(self, low: float, high: float) -> "ArrivalTrace":
        """Affinely map the rates onto ``[low, high]``; flat traces go to the middle."""
        if low <= 0 or high < low:
            raise TraceError("Rescale range must satisfy 0 < low <= high")
        rates = np.array(self.rates)
        span = rates.max() - rates.min()
        if span == 0:
            scaled = np.full_like(rates, (low + high) / 2.0)
        else:
            scaled = low + (rates - rates.min()) * (high - low) / span
        return ArrivalTrace(
            tuple(Segment(s.duration, float(r)) for s, r in zip(self.segments, scaled)),
            self.arrivals,
        )

    def arrival_times(self, seed: int = 0) -> np.ndarray:
        """Every request arrival time within the horizon, ascending."""
        rng = np.random.default_rng(seed)
        chunks = []
        for start, segment in zip(self.starts, self.segments):
            end = start + segment.duration
            if self.arrivals == DETERMINISTIC:
                count = int(np.ceil(segment.duration * segment.rate - 1e-9))
                times = start + np.arange(count) / segment.rate
            else:
                size = int(segment.duration * segment.rate * 1.5) + 16
                times = start + np.cumsum(rng.exponential(1.0 / segment.rate, size))
                while times[-1] < end:
                    more = np.cumsum(rng.exponential(1.0 / segment.rate, size))
                    times = np.concatenate([times, times[-1] + more])
            chunks.append(times[times < end])
        return np.concatenate(chunks) if chunks else np.array([])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t_start_s": self.starts, "rate_rps": self.rates})

    def to_csv(self, path: Union[str, Path]) -> None:
        self.to_frame().to_csv(path, index=False)

    @classmethod
    def constant(
        cls, rate: float, duration: float, arrivals: str = DETERMINISTIC
    ) -> "ArrivalTrace":
        return cls((Segment(duration, rate),), arrivals)

    @classmethod
    def from_rates(
        cls,
        rates: Sequence[float],
        segment: float = DEFAULT_SEGMENT_S,
        arrivals: str = DETERMINISTIC,
    ) -> "ArrivalTrace":
        return cls(tuple(Segment(segment, float(r)) for r in rates), arrivals)

    @classmethod
    def poisson(
        cls,
        mean: float = 60.0,
        horizon: float = DEFAULT_HORIZON_S,
        segment: float = DEFAULT_SEGMENT_S,
        seed: int = 0,
        arrivals: str = DETERMINISTIC,
    ) -> "ArrivalTrace":
        """Segment rates drawn from a Poisson distribution around ``mean``."""
        if mean <= 0 or horizon <= 0 or segment <= 0:
            raise TraceError("Mean, horizon and segment length must be positive")
        count = max(1, int(round(horizon / segment)))
        rng = np.random.default_rng(seed)
        rates = np.maximum(rng.poisson(mean, size=count), 1)
        return cls.from_rates(rates.tolist(), segment, arrivals)

    @classmethod
    def from_csv(
        cls,
        path: Union[str, Path],
        target_range: Optional[Tuple[float, float]] = None,
        segment: float = DEFAULT_SEGMENT_S,
        arrivals: str = DETERMINISTIC,
    ) -> "ArrivalTrace":
        """Load ``t_start_s,rate_rps`` rows; the last row lasts ``segment`` seconds.

        Raises:
            TraceError: If the file is empty, lacks the columns or is unordered
        """
        try:
            frame = pd.read_csv(path)
        except pd.errors.EmptyDataError as exc:
            raise TraceError(f"Trace file {path} is empty") from exc
        missing = [c for c in CSV_COLUMNS if c not in frame.columns]
        if missing:
            raise TraceError(f"Trace file {path} lacks columns {missing}")
        if frame.empty:
            raise TraceError(f"Trace file {path} has no rows")
        starts = frame["t_start_s"].to_numpy(dtype=float)
        if starts[0] != 0 or np.any(np.diff(starts) <= 0):
            raise TraceError("Segment starts must begin at 0 and strictly increase")
        durations = np.append(np.diff(starts), segment)
        trace = cls(
            tuple(
                Segment(float(d), float(r))
                for d, r in zip(durations, frame["rate_rps"].to_numpy(dtype=float))
            ),
            arrivals,
        )
        return trace.rescaled(*target_range) if target_range else trace


def gen_trace(
    kind: str,
    mean: float = 60.0,
    horizon: float = DEFAULT_HORIZON_S,
    segment: float = DEFAULT_SEGMENT_S,
    seed: int = 0,
    path: Optional[Union[str, Path]] = None,
    target_range: Optional[Tuple[float, float]] = (30.0, 90.0),
) -> ArrivalTrace:
    """Build a dynamic-rate trace: seeded Poisson segments or a rescaled CSV file."""
    if kind == "poisson":
        return ArrivalTrace.poisson(mean, horizon, segment, seed)
    if kind == "file":
        if path is None:
            raise TraceError("A file trace needs a path")
        return ArrivalTrace.from_csv(path, target_range, segment)
    raise TraceError(f"Unknown trace kind {kind!r}")
