"""Budgeted access to the device model with a reusable profiling history."""
import json
import logging
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

from .device import DeviceModel, ProfileSample
from .errors import BudgetExhaustedError
from .power_mode import PowerMode
from .workload import WorkloadSpec

logger = logging.getLogger(__name__)

HistoryKey = Tuple[PowerMode, int, str]
WorkloadRef = Union[str, WorkloadSpec]

DEFAULT_MINIBATCHES_PER_PROFILE = 40


class ProfileHistory:
    """Append-only store of every sample observed for a set of workloads.

    A history may be shared by many sessions so that later searches reuse earlier
    measurements for free.
    """

    def __init__(self) -> None:
        self._samples: Dict[HistoryKey, ProfileSample] = {}

    def __len__(self) -> int:
        return len(self._samples)

    def __contains__(self, key: object) -> bool:
        return key in self._samples

    def __iter__(self) -> Iterator[ProfileSample]:
        return iter(self._samples.values())

    def get(self, key: HistoryKey) -> Optional[ProfileSample]:
        return self._samples.get(key)

    def add(self, sample: ProfileSample) -> None:
        """Store a sample; existing entries are never overwritten."""
        key = (sample.mode, sample.batch_size, sample.workload)
        self._samples.setdefault(key, sample)

    def for_workload(self, workload: str) -> List[ProfileSample]:
        return [s for s in self._samples.values() if s.workload == workload]

    def to_rows(self) -> List[Dict[str, object]]:
        rows: List[Dict[str, object]] = []
        for sample in self._samples.values():
            row: Dict[str, object] = dict(sample.mode.to_dict())
            row.update(
                batch_size=sample.batch_size,
                workload=sample.workload,
                time_s=sample.time,
                power_w=sample.power,
            )
            rows.append(row)
        return rows

    @classmethod
    def from_rows(cls, rows: List[Dict[str, object]]) -> "ProfileHistory":
        history = cls()
        for row in rows:
            mode = PowerMode(
                int(row["cores"]),  # type: ignore[call-overload]
                int(row["cpu_freq"]),  # type: ignore[call-overload]
                int(row["gpu_freq"]),  # type: ignore[call-overload]
                int(row["mem_freq"]),  # type: ignore[call-overload]
            )
            history.add(
                ProfileSample(
                    mode,
                    int(row["batch_size"]),  # type: ignore[call-overload]
                    float(row["time_s"]),  # type: ignore[arg-type]
                    float(row["power_w"]),  # type: ignore[arg-type]
                    str(row["workload"]),
                )
            )
        return history

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_rows(), indent=1), encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ProfileHistory":
        return cls.from_rows(json.loads(Path(path).read_text(encoding="utf-8")))


def dominant_workload(train: ProfileSample, infer: ProfileSample) -> str:
    """Name the workload drawing more power; training wins ties."""
    return "infer" if infer.power > train.power else "train"


class ProfilingSession:
    """The only gateway through which a search observes the device.

    A cache miss consumes one trial; a hit is free. Once the budget is spent, any
    further miss raises :class:`BudgetExhaustedError`.
    """

    def __init__(
        self,
        device: DeviceModel,
        budget: int,
        history: Optional[ProfileHistory] = None,
        minibatches_per_profile: int = DEFAULT_MINIBATCHES_PER_PROFILE,
    ) -> None:
        if budget < 0:
            raise ValueError("Profiling budget must be non-negative")
        self.device = device
        self.budget = budget
        self.history = history if history is not None else ProfileHistory()
        self.minibatches_per_profile = minibatches_per_profile
        self.trials_used = 0
        # Simulated device seconds spent measuring.
        self.profiling_time = 0.0
        self.trial_log: List[Tuple[PowerMode, int]] = []

    @property
    def remaining(self) -> int:
        return self.budget - self.trials_used

    def _resolve(self, workload: WorkloadRef) -> WorkloadSpec:
        if isinstance(workload, WorkloadSpec):
            return workload
        return self.device.workload(workload)

    def _charge(self, mode: PowerMode, batch_size: int) -> None:
        if self.trials_used >= self.budget:
            raise BudgetExhaustedError(
                f"Profiling budget of {self.budget} trials exhausted"
            )
        self.trials_used += 1
        self.trial_log.append((mode, batch_size))

    def _measure(
        self, mode: PowerMode, batch_size: int, spec: WorkloadSpec
    ) -> ProfileSample:
        sample = self.device.sample(mode, batch_size, spec)
        self.history.add(sample)
        self.profiling_time += self.minibatches_per_profile * sample.time
        return sample

    def cached(
        self, mode: PowerMode, batch_size: int, workload: WorkloadRef
    ) -> Optional[ProfileSample]:
        return self.history.get((mode, batch_size, self._resolve(workload).name))

    def profile(
        self, mode: PowerMode, batch_size: int, workload: WorkloadRef
    ) -> ProfileSample:
        """Observe one workload at ``(mode, batch_size)``.

        Raises:
            BudgetExhaustedError: On a cache miss with no trials left
            InvalidModeError: If the mode is not on the device grid
        """
        spec = self._resolve(workload)
        self.device.grid.validate(mode)
        hit = self.history.get((mode, batch_size, spec.name))
        if hit is not None:
            return hit
        self._charge(mode, batch_size)
        sample = self._measure(mode, batch_size, spec)
        logger.debug(
            "Trial %d/%d: %s %s bs=%d -> %.4fs %.2fW",
            self.trials_used, self.budget, spec.name, mode, batch_size,
            sample.time, sample.power,
        )
        return sample

    def profile_pair(
        self,
        mode: PowerMode,
        batch_size: int,
        train_workload: WorkloadRef,
        infer_workload: WorkloadRef,
        train_batch_size: int = 1,
    ) -> Tuple[ProfileSample, ProfileSample]:
        """Observe both workloads of a concurrent pair at one mode as one trial.

        The training-side workload runs at ``train_batch_size`` and the
        latency-bound workload at ``batch_size``.

        Raises:
            BudgetExhaustedError: If either sample is missing and no trials are left
        """
        train_spec = self._resolve(train_workload)
        infer_spec = self._resolve(infer_workload)
        self.device.grid.validate(mode)
        train = self.history.get((mode, train_batch_size, train_spec.name))
        infer = self.history.get((mode, batch_size, infer_spec.name))
        if train is not None and infer is not None:
            return train, infer
        self._charge(mode, batch_size)
        if train is None:
            train = self._measure(mode, train_batch_size, train_spec)
        if infer is None:
            infer = self._measure(mode, batch_size, infer_spec)
        logger.debug(
            "Trial %d/%d: %s+%s %s bs=%d -> train %.2fW infer %.2fW",
            self.trials_used, self.budget, train_spec.name, infer_spec.name, mode,
            batch_size, train.power, infer.power,
        )
        return train, infer
