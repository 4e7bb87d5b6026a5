"""Sweeps of problem configurations across strategies, seeds and workloads."""
import itertools
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from ..device import DeviceModel
from ..errors import ConfigError
from ..problem import DEFAULT_BACKGROUND_BATCH_SIZE, ProblemConfig, Variant
from ..search import GmdConfig
from ..surrogate import TrainConfig
from .metrics import MetricRow, compute, summarize, to_frame
from .strategies import StrategyRunner, parse_strategy

logger = logging.getLogger(__name__)

Range = Tuple[float, float]

TRAIN_WORKLOADS = (
    "mobilenet-train",
    "resnet-train",
    "yolo-train",
    "lstm-train",
)
WIDE_POWER_WORKLOAD = "bert-train"


def values(bounds: Range, step: float, stride: int = 1) -> List[float]:
    """Inclusive ``low, low + step, ..., high``, keeping every ``stride``-th value."""
    low, high = bounds
    count = int(math.floor((high - low) / step + 1e-9)) + 1
    every = [round(low + i * step, 6) for i in range(count)]
    return every[::stride]


@dataclass
class SweepSpec:
    """Which problems to generate and which strategies to run on them.

    ``workloads`` names one workload per entry; concurrent variants use
    ``"throughput+latency"`` pairs. ``power_overrides`` widens or narrows the power
    range per workload. Unless ``full`` is set, every ``stride``-th power and
    latency value is kept.
    """

    variant: str = Variant.TRAIN.value
    workloads: List[str] = field(default_factory=lambda: list(TRAIN_WORKLOADS))
    power_range: Range = (10.0, 50.0)
    power_step: float = 1.0
    latency_range: Range = (0.05, 1.0)
    latency_step: float = 0.05
    rate_range: Range = (30.0, 90.0)
    rate_step: float = 10.0
    strategies: List[str] = field(default_factory=lambda: ["optimal", "gmd"])
    seeds: List[int] = field(default_factory=lambda: [0])
    workers: int = 1
    stride: int = 5
    full: bool = False
    power_overrides: Dict[str, Range] = field(default_factory=dict)
    background_batch_size: int = DEFAULT_BACKGROUND_BATCH_SIZE
    nn_epochs: Optional[int] = None
    """Overrides the surrogate training epochs for ALS and NN strategies."""

    def __post_init__(self) -> None:
        """Validate ranges and names that do not need a device."""
        try:
            self.variant = Variant(self.variant).value
        except ValueError as exc:
            raise ConfigError(f"Unknown variant {self.variant!r}") from exc
        if not self.workloads:
            raise ConfigError("A sweep needs at least one workload")
        if not self.strategies or not self.seeds:
            raise ConfigError("A sweep needs at least one strategy and one seed")
        ranges = [(self.power_range, self.power_step)]
        ranges.extend((r, self.power_step) for r in self.power_overrides.values())
        if Variant(self.variant).has_latency:
            ranges.append((self.latency_range, self.latency_step))
            ranges.append((self.rate_range, self.rate_step))
        for (low, high), step in ranges:
            if step <= 0 or high < low:
                raise ConfigError(f"Invalid range {low}..{high} step {step}")
        if self.workers < 1 or self.stride < 1:
            raise ConfigError("Workers and stride must be at least 1")
        for name in self.strategies:
            parse_strategy(name)

    @property
    def effective_stride(self) -> int:
        return 1 if self.full else self.stride

    def _pair(self, workload: str) -> Tuple[Optional[str], Optional[str]]:
        variant = Variant(self.variant)
        if variant is Variant.TRAIN:
            return workload, None
        if variant is Variant.INFER:
            return None, workload
        if "+" not in workload:
            raise ConfigError(
                f"Concurrent workload {workload!r} must be 'throughput+latency'"
            )
        train, infer = workload.split("+", 1)
        return train, infer

    def validate(self, device: DeviceModel) -> None:
        """Check every workload is registered on ``device``.

        Raises:
            ConfigError: Naming the first unknown workload
        """
        for entry in self.workloads:
            for name in self._pair(entry):
                if name is not None and name not in device.workloads:
                    raise ConfigError(f"Unknown workload {name!r}")

    def problems(self, workload: str) -> List[ProblemConfig]:
        """Every problem configuration for one workload entry."""
        train, infer = self._pair(workload)
        variant = Variant(self.variant)
        stride = self.effective_stride
        bounds = self.power_overrides.get(workload, self.power_range)
        power = values(bounds, self.power_step, stride)
        if not variant.has_latency:
            return [ProblemConfig(variant, p, train_workload=train) for p in power]
        latencies = values(self.latency_range, self.latency_step, stride)
        rates = values(self.rate_range, self.rate_step)
        return [
            ProblemConfig(
                variant,
                p,
                train_workload=train,
                infer_workload=infer,
                latency_budget=lat,
                arrival_rate=rate,
                background_batch_size=self.background_batch_size,
            )
            for p, lat, rate in itertools.product(power, latencies, rates)
        ]

    def all_problems(self) -> List[ProblemConfig]:
        return [p for w in self.workloads for p in self.problems(w)]

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "SweepSpec":
        """Build from a mapping whose keys are field names.

        Raises:
            ConfigError: On unknown keys
        """
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown sweep keys {unknown}")
        kwargs = dict(data)
        for key in ("power_range", "latency_range", "rate_range"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])  # type: ignore[arg-type]
        if "power_overrides" in kwargs:
            overrides = kwargs["power_overrides"]
            assert isinstance(overrides, dict)
            kwargs["power_overrides"] = {k: tuple(v) for k, v in overrides.items()}
        return cls(**kwargs)  # type: ignore[arg-type]

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "SweepSpec":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def default_training_sweep(
    strategies: Sequence[str] = ("optimal", "gmd"), seeds: Sequence[int] = (0,)
) -> SweepSpec:
    """10-50 W in 1 W steps on four training workloads plus 10-60 W on a fifth."""
    return SweepSpec(
        variant=Variant.TRAIN.value,
        workloads=[*TRAIN_WORKLOADS, WIDE_POWER_WORKLOAD],
        power_range=(10.0, 50.0),
        power_overrides={WIDE_POWER_WORKLOAD: (10.0, 60.0)},
        strategies=list(strategies),
        seeds=list(seeds),
        full=True,
    )


@dataclass
class SweepReport:
    rows: List[MetricRow]
    summary: List[Dict[str, object]]

    def write(self, out_dir: Union[str, Path]) -> Dict[str, Path]:
        """Write ``rows.csv``, ``summary.json`` and ``violin.csv``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "rows": out / "rows.csv",
            "summary": out / "summary.json",
            "violin": out / "violin.csv",
        }
        to_frame(self.rows).to_csv(paths["rows"], index=False)
        paths["summary"].write_text(
            json.dumps(self.summary, indent=2), encoding="utf-8"
        )
        to_frame(self.rows, full=True).to_csv(paths["violin"], index=False)
        return paths


def _run_group(
    spec: SweepSpec, device: DeviceModel, workload: str, seed: int
) -> List[MetricRow]:
    """All problems and strategies for one workload and seed, in a fixed order."""
    train = TrainConfig(epochs=spec.nn_epochs) if spec.nn_epochs else None
    runner = StrategyRunner(device, seed, GmdConfig(), train_config=train)
    rows: List[MetricRow] = []
    for problem in spec.problems(workload):
        optimum = runner.optimum(problem)
        for name in spec.strategies:
            run = runner.run(name, problem)
            rows.append(
                compute(
                    name, problem, run.solution, optimum, runner.truth,
                    run.trials, run.violated,
                )
            )
    logger.info("Finished %s seed %d: %d rows", workload, seed, len(rows))
    return rows


def run_sweep(
    spec: SweepSpec,
    device: Optional[DeviceModel] = None,
    out_dir: Optional[Union[str, Path]] = None,
) -> SweepReport:
    """Solve every configuration with every strategy and compare with the optimum.

    Work is split per (workload, seed) so pre-profiled strategies sample once per
    group. Rows come back in spec order whatever the worker count.

    Raises:
        ConfigError: If a workload or strategy is unknown, before anything runs
    """
    device = device or DeviceModel()
    spec.validate(device)
    groups = list(itertools.product(spec.workloads, spec.seeds))
    logger.info(
        "Sweeping %d configurations x %d strategies x %d seeds",
        len(spec.all_problems()), len(spec.strategies), len(spec.seeds),
    )
    if spec.workers == 1:
        results = [_run_group(spec, device, w, s) for w, s in groups]
    else:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            futures = [pool.submit(_run_group, spec, device, w, s) for w, s in groups]
            results = [f.result() for f in futures]
    rows = [row for group in results for row in group]
    report = SweepReport(rows, summarize(rows))
    if out_dir is not None:
        report.write(out_dir)
    return report
