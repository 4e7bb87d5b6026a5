"""Active-learning sampler that builds reusable observed Pareto fronts.

Surrogates only decide *which* configurations to profile next. Every front
returned to a caller is built from profiled samples alone.
"""
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set, TextIO, Tuple, Union

import numpy as np

from ..device import DeviceModel
from ..pareto import ParetoFront, ParetoPoint, build_front, hypervolume
from ..power_mode import PowerMode
from ..problem import ProblemConfig, Variant
from ..profiler import ProfileHistory, ProfilingSession
from ..scheduler.interleave import plan_interleave
from ..surrogate import CostSurrogate, TrainConfig
from .samples import CONCURRENT, INFER, TRAIN, SampleSet

logger = logging.getLogger(__name__)

STRATEGY = "als"

Range = Tuple[float, float]


@dataclass(frozen=True)
class Quadrant:
    """One (latency half, arrival-rate half) cell of the configured ranges."""

    name: str
    latency: Range
    rate: Range

    @property
    def mid_rate(self) -> float:
        return (self.rate[0] + self.rate[1]) / 2.0

    def admits(self, t_in: float, batch_size: int) -> bool:
        """Conservative check: some rate in the cell is sustainable within peak latency.

        Latency falls as the rate rises, so the best rate is the highest one the
        configuration still keeps up with.
        """
        service_rate = batch_size / t_in
        rate = min(self.rate[1], service_rate)
        if rate < self.rate[0]:
            return False
        return (batch_size - 1) / rate + t_in <= self.latency[1]


@dataclass(frozen=True)
class QuadrantSpec:
    """Latency and arrival-rate ranges, each split into equal low and high halves."""

    latency_range: Range
    rate_range: Range

    def __post_init__(self) -> None:
        ranges = (("latency", self.latency_range), ("rate", self.rate_range))
        for label, (lo, hi) in ranges:
            if lo <= 0 or hi <= lo:
                raise ValueError(f"The {label} range must satisfy 0 < low < high")

    def quadrants(self) -> List[Quadrant]:
        """Cells in the fixed visiting order: low latency first, low rate first."""
        lat_lo, lat_hi = self.latency_range
        rate_lo, rate_hi = self.rate_range
        lat_mid = (lat_lo + lat_hi) / 2.0
        rate_mid = (rate_lo + rate_hi) / 2.0
        return [
            Quadrant("low-latency/low-rate", (lat_lo, lat_mid), (rate_lo, rate_mid)),
            Quadrant("low-latency/high-rate", (lat_lo, lat_mid), (rate_mid, rate_hi)),
            Quadrant("high-latency/low-rate", (lat_mid, lat_hi), (rate_lo, rate_mid)),
            Quadrant("high-latency/high-rate", (lat_mid, lat_hi), (rate_mid, rate_hi)),
        ]


@dataclass(frozen=True)
class AlsConfig:
    """Sampling schedule for one workload kind.

    For inference and concurrent runs ``initial`` is split evenly across batch
    sizes and every round visits all four quadrants.
    """

    initial: int = 10
    per_round: int = 5
    rounds: int = 8
    latency_range: Range = (0.05, 1.0)
    rate_range: Range = (30.0, 90.0)
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self) -> None:
        if self.initial < 1 or self.per_round < 1 or self.rounds < 0:
            raise ValueError("ALS needs initial >= 1, per_round >= 1 and rounds >= 0")
        QuadrantSpec(self.latency_range, self.rate_range)

    @property
    def quadrants(self) -> QuadrantSpec:
        return QuadrantSpec(self.latency_range, self.rate_range)

    def max_profiles(self, kind: str) -> int:
        steps = self.rounds if kind == TRAIN else self.rounds * 4
        return self.initial + steps * self.per_round

    @classmethod
    def for_train(cls, train: Optional[TrainConfig] = None) -> "AlsConfig":
        return cls(10, 5, 8, train=train or TrainConfig())

    @classmethod
    def for_infer(
        cls,
        latency_range: Range = (0.05, 1.0),
        rate_range: Range = (30.0, 90.0),
        train: Optional[TrainConfig] = None,
    ) -> "AlsConfig":
        return cls(25, 5, 6, latency_range, rate_range, train or TrainConfig())

    @classmethod
    def for_concurrent(
        cls,
        latency_range: Range = (0.5, 2.0),
        rate_range: Range = (30.0, 120.0),
        train: Optional[TrainConfig] = None,
    ) -> "AlsConfig":
        return cls(25, 10, 3, latency_range, rate_range, train or TrainConfig())


@dataclass
class RoundReport:
    """What one sampling step picked and how the observed front moved."""

    round: int
    quadrant: Optional[str]
    picked: List[Tuple[PowerMode, int]]
    predicted: List[Tuple[float, float]]
    """Surrogate (objective, power) per pick; ``observed`` is profiled (time, power)."""
    observed: List[Tuple[float, float]]
    front_size: int
    hypervolume: float

    def to_dict(self) -> Dict[str, object]:
        return {
            "round": self.round,
            "quadrant": self.quadrant,
            "picked": [{"mode": m.to_dict(), "batch_size": b} for m, b in self.picked],
            "predicted": [list(p) for p in self.predicted],
            "observed": [list(o) for o in self.observed],
            "front_size": self.front_size,
            "hypervolume": self.hypervolume,
        }


def pick_diverse(
    points: Sequence[ParetoPoint], observed_powers: Sequence[float], k: int
) -> List[ParetoPoint]:
    """The ``k`` points whose predicted power lies farthest from any observed power.

    Distances are measured once against the observed set; ties go to lower power.
    """
    if not observed_powers:
        return list(points[:k])
    observed = np.asarray(observed_powers, dtype=float)
    distances = [float(np.min(np.abs(observed - p.power))) for p in points]
    order = sorted(
        range(len(points)),
        key=lambda i: (-distances[i], points[i].power, points[i].mode.as_tuple()),
    )
    return [points[i] for i in order[:k]]


@dataclass
class AlsResult(SampleSet):
    """Profiled samples and the rounds that chose them."""

    config: AlsConfig = field(default_factory=AlsConfig)
    seed: int = 0
    rounds: List[RoundReport] = field(default_factory=list)
    reference: Tuple[float, float] = (0.0, 0.0)
    """Fixed hypervolume reference point of this run."""
    strategy: str = STRATEGY

    def extend(
        self,
        device: DeviceModel,
        rate_range: Range,
        latency_range: Optional[Range] = None,
        rounds: int = 1,
    ) -> "AlsResult":
        """Run extra quadrant rounds over a new arrival-rate range.

        Existing samples are reused for free; only new picks are profiled.
        """
        if self.kind == TRAIN:
            raise ValueError("Training samples have no arrival-rate range to extend")
        config = replace(
            self.config,
            rate_range=rate_range,
            latency_range=latency_range or self.config.latency_range,
            rounds=rounds,
        )
        history = ProfileHistory()
        for sample in self.samples:
            history.add(sample)
        budget = rounds * 4 * config.per_round
        session = ProfilingSession(device, budget, history)
        seed = self.seed + len(self.rounds)
        sampler = _Sampler(self.kind, session, config, seed, self)
        sampler.run_rounds(start=max((r.round for r in self.rounds), default=0) + 1)
        extended = sampler.result
        extended.trials_used = self.trials_used + session.trials_used
        extended.profiling_time = self.profiling_time + session.profiling_time
        logger.info(
            "Extended ALS %s over rates %s with %d new profiles",
            self.infer_workload, rate_range, session.trials_used,
        )
        return extended

    def write_reports(self, target: Union[str, Path, TextIO]) -> None:
        text = "".join(json.dumps(r.to_dict()) + "\n" for r in self.rounds)
        if isinstance(target, (str, Path)):
            Path(target).write_text(text, encoding="utf-8")
        else:
            target.write(text)


class _Sampler:
    """Drives profiling for one ALS run, accumulating into an :class:`AlsResult`."""

    def __init__(
        self,
        kind: str,
        session: ProfilingSession,
        config: AlsConfig,
        seed: int,
        result: AlsResult,
    ) -> None:
        self.kind = kind
        self.session = session
        self.config = config
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.result = replace(
            result,
            samples=list(result.samples),
            rounds=list(result.rounds),
            config=config,
        )
        self.grid = session.device.grid
        self.modes = self.grid.modes
        self.batch_sizes: Tuple[int, ...] = (1,)
        if kind != TRAIN:
            assert result.infer_workload is not None
            spec = session.device.workload(result.infer_workload)
            self.batch_sizes = spec.eval_batch_sizes
        self._fits = 0

    # profiling

    def _known(self) -> Set[Tuple[PowerMode, int, Optional[str]]]:
        return {(s.mode, s.batch_size, s.workload) for s in self.result.samples}

    def _profile(self, mode: PowerMode, batch_size: int) -> Tuple[float, float]:
        result = self.result
        if self.kind == TRAIN:
            assert result.train_workload is not None
            samples = [self.session.profile(mode, 1, result.train_workload)]
        elif self.kind == INFER:
            assert result.infer_workload is not None
            samples = [self.session.profile(mode, batch_size, result.infer_workload)]
        else:
            assert result.train_workload and result.infer_workload
            pair = self.session.profile_pair(
                mode,
                batch_size,
                result.train_workload,
                result.infer_workload,
                result.throughput_batch_size,
            )
            samples = list(pair)
        for sample in samples:
            result.add(sample)
        return samples[-1].time, max(s.power for s in samples)

    def _untried(self, batch_size: int) -> List[PowerMode]:
        workload = self.result.sampled_workload
        known = self._known()
        return [m for m in self.modes if (m, batch_size, workload) not in known]

    def initial(self) -> None:
        if self.kind == TRAIN:
            count = self.config.initial
            for i in self.rng.choice(len(self.modes), size=count, replace=False):
                self._profile(self.modes[int(i)], 1)
        else:
            per_batch = max(1, self.config.initial // len(self.batch_sizes))
            for batch_size in self.batch_sizes:
                picks = self.rng.choice(len(self.modes), size=per_batch, replace=False)
                for i in picks:
                    self._profile(self.modes[int(i)], batch_size)
        self.result.reference = self._reference()
        logger.debug("ALS %s: %d initial profiles", self.kind, len(self.result.samples))

    # observed progress

    def _progress_front(self) -> Optional[ParetoFront]:
        result = self.result
        if self.kind == CONCURRENT:
            rate = sum(self.config.rate_range) / 2.0
            points = []
            for train, infer in result.pairs():
                plan = plan_interleave(
                    infer.mode, infer.batch_size, rate,
                    train.time, infer.time, train.power, infer.power,
                )
                point = ParetoPoint(
                    infer.mode, infer.batch_size, plan.power, plan.throughput
                )
                points.append(point)
            return build_front(points, "maximize") if points else None
        points = [
            ParetoPoint(s.mode, s.batch_size, s.power, s.time)
            for s in result.of_workload(result.sampled_workload)
        ]
        return build_front(points) if points else None

    def _reference(self) -> Tuple[float, float]:
        powers = [s.power for s in self.result.samples]
        times = [s.time for s in self.result.samples]
        worst = 0.0 if self.kind == CONCURRENT else 2.0 * max(times)
        return (2.0 * max(powers), worst)

    def _observed_powers(self) -> List[float]:
        if self.kind != CONCURRENT:
            return [s.power for s in self.result.samples]
        return [max(train.power, infer.power) for train, infer in self.result.pairs()]

    # surrogates

    def _fit(self, workload: Optional[str], with_batch: bool) -> CostSurrogate:
        self._fits += 1
        return CostSurrogate.fit_samples(
            self.result.of_workload(workload),
            with_batch,
            self.config.train,
            seed=self.seed * 1000 + 2 * self._fits,
        )

    def _candidates_train(self) -> List[ParetoPoint]:
        model = self._fit(self.result.train_workload, with_batch=False)
        modes = self._untried(1)
        if not modes:
            return []
        times, powers = model.predict(modes)
        points = [
            ParetoPoint(m, 1, float(p), float(t))
            for m, t, p in zip(modes, times, powers)
        ]
        return list(build_front(points))

    def _candidates_infer(self, quadrant: Quadrant) -> List[ParetoPoint]:
        model = self._fit(self.result.infer_workload, with_batch=True)
        union: List[ParetoPoint] = []
        for batch_size in self.batch_sizes:
            modes = self._untried(batch_size)
            if not modes:
                continue
            times, powers = model.predict(modes, batch_size)
            points = [
                ParetoPoint(m, batch_size, float(p), float(t))
                for m, t, p in zip(modes, times, powers)
                if quadrant.admits(float(t), batch_size)
            ]
            if points:
                union.extend(build_front(points))
        return union

    def _candidates_concurrent(self, quadrant: Quadrant) -> List[ParetoPoint]:
        train_model = self._fit(self.result.train_workload, with_batch=False)
        infer_model = self._fit(self.result.infer_workload, with_batch=True)
        t_tr, p_tr = train_model.predict(self.modes)
        by_mode = {m: (float(t), float(p)) for m, t, p in zip(self.modes, t_tr, p_tr)}
        points: List[ParetoPoint] = []
        for batch_size in self.batch_sizes:
            modes = self._untried(batch_size)
            if not modes:
                continue
            times, powers = infer_model.predict(modes, batch_size)
            for mode, t_in, p_in in zip(modes, times, powers):
                if not quadrant.admits(float(t_in), batch_size):
                    continue
                train_time, train_power = by_mode[mode]
                plan = plan_interleave(
                    mode, batch_size, quadrant.mid_rate,
                    train_time, float(t_in), train_power, float(p_in),
                )
                points.append(
                    ParetoPoint(mode, batch_size, plan.power, plan.throughput, plan.tau)
                )
        return list(build_front(points, "maximize")) if points else []

    # rounds

    def _step(self, round_no: int, quadrant: Optional[Quadrant]) -> None:
        if quadrant is None:
            candidates = self._candidates_train()
        elif self.kind == INFER:
            candidates = self._candidates_infer(quadrant)
        else:
            candidates = self._candidates_concurrent(quadrant)
        if not candidates:
            logger.warning(
                "ALS round %d: no predicted candidates in %s; skipping",
                round_no, quadrant.name if quadrant else "grid",
            )
            return
        picks = pick_diverse(candidates, self._observed_powers(), self.config.per_round)
        observed = [self._profile(p.mode, p.batch_size) for p in picks]
        front = self._progress_front()
        report = RoundReport(
            round=round_no,
            quadrant=quadrant.name if quadrant else None,
            picked=[(p.mode, p.batch_size) for p in picks],
            predicted=[(p.objective, p.power) for p in picks],
            observed=observed,
            front_size=len(front) if front else 0,
            hypervolume=hypervolume(front, self.result.reference) if front else 0.0,
        )
        self.result.rounds.append(report)
        logger.debug(
            "ALS round %d %s: picked %d, front %d",
            round_no, report.quadrant or "", len(picks), report.front_size,
        )

    def run_rounds(self, start: int = 1) -> None:
        for round_no in range(start, start + self.config.rounds):
            if self.kind == TRAIN:
                self._step(round_no, None)
                continue
            for quadrant in self.config.quadrants.quadrants():
                self._step(round_no, quadrant)


def _run(
    kind: str,
    device: DeviceModel,
    result: AlsResult,
    history: Optional[ProfileHistory],
) -> AlsResult:
    config = result.config
    session = ProfilingSession(device, config.max_profiles(kind), history)
    sampler = _Sampler(kind, session, config, result.seed, result)
    sampler.initial()
    sampler.run_rounds()
    final = sampler.result
    final.trials_used = session.trials_used
    final.profiling_time = session.profiling_time
    logger.info("ALS %s finished with %d profiles", kind, session.trials_used)
    return final


def als_train(
    workload: str,
    device: DeviceModel,
    config: Optional[AlsConfig] = None,
    seed: int = 0,
    history: Optional[ProfileHistory] = None,
) -> AlsResult:
    """Sample a training workload: random seeds, then surrogate-guided rounds."""
    config = config or AlsConfig.for_train()
    result = AlsResult(TRAIN, train_workload=workload, config=config, seed=seed)
    return _run(TRAIN, device, result, history)


def als_infer(
    workload: str,
    device: DeviceModel,
    config: Optional[AlsConfig] = None,
    seed: int = 0,
    history: Optional[ProfileHistory] = None,
) -> AlsResult:
    """Sample an inference workload over every batch size and quadrant."""
    config = config or AlsConfig.for_infer()
    result = AlsResult(INFER, infer_workload=workload, config=config, seed=seed)
    return _run(INFER, device, result, history)


def als_concurrent(
    train_workload: str,
    infer_workload: str,
    device: DeviceModel,
    config: Optional[AlsConfig] = None,
    seed: int = 0,
    throughput_batch_size: int = 1,
    history: Optional[ProfileHistory] = None,
) -> AlsResult:
    """Sample a (throughput, latency) workload pair profiled together per mode.

    ``throughput_batch_size`` is 1 for training and the non-urgent batch size when
    the throughput side is itself an inference workload.
    """
    config = config or AlsConfig.for_concurrent()
    result = AlsResult(
        CONCURRENT,
        train_workload=train_workload,
        infer_workload=infer_workload,
        throughput_batch_size=throughput_batch_size,
        config=config,
        seed=seed,
    )
    return _run(CONCURRENT, device, result, history)


def als_for_problem(
    problem: ProblemConfig,
    device: DeviceModel,
    config: Optional[AlsConfig] = None,
    seed: int = 0,
    history: Optional[ProfileHistory] = None,
) -> AlsResult:
    """Run the ALS variant whose samples can answer ``problem``."""
    if problem.variant is Variant.TRAIN:
        assert problem.train_workload is not None
        return als_train(problem.train_workload, device, config, seed, history)
    assert problem.infer_workload is not None
    if problem.variant is Variant.INFER:
        return als_infer(problem.infer_workload, device, config, seed, history)
    assert problem.train_workload is not None
    return als_concurrent(
        problem.train_workload,
        problem.infer_workload,
        device,
        config,
        seed,
        problem.throughput_batch_size,
        history,
    )
