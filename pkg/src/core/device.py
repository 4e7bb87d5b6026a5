"""Synthetic ground-truth device model."""
import zlib
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from .power_mode import PowerMode, PowerModeGrid
from .workload import PRESETS, WorkloadSpec

MAX_NOISE_AMPLITUDE = 0.05


@dataclass
class DeviceConfig:
    """Configuration for the device model."""

    noise_amplitude: float = 0.0
    """Half-width of multiplicative uniform noise; 0 disables noise."""

    noise_seed: int = 0
    """Seed mixed into every noise draw."""

    def __post_init__(self) -> None:
        """Validate configuration values."""
        if not 0.0 <= self.noise_amplitude <= MAX_NOISE_AMPLITUDE:
            raise ValueError(
                f"Noise amplitude must lie in [0, {MAX_NOISE_AMPLITUDE}]"
            )


@dataclass(frozen=True)
class ProfileSample:
    """Observed minibatch time and power for one (mode, batch, workload) triple."""

    mode: PowerMode
    batch_size: int
    time: float
    """Seconds per minibatch."""
    power: float
    """Watts."""
    workload: str = ""

    def __post_init__(self) -> None:
        if self.time <= 0 or self.power <= 0:
            raise ValueError("Profile samples need positive time and power")


@dataclass
class DeviceModel:
    """Maps (power mode, batch size, workload) to (time, power).

    Instances are never mutated after construction and may be shared freely.
    """

    grid: PowerModeGrid = field(default_factory=PowerModeGrid)
    workloads: Dict[str, WorkloadSpec] = field(default_factory=lambda: dict(PRESETS))
    config: DeviceConfig = field(default_factory=DeviceConfig)

    def __post_init__(self) -> None:
        """Reject workloads whose surfaces are not monotone on this grid."""
        for spec in self.workloads.values():
            check_monotone(self.grid, spec)
        self._max_values = self.grid.max_values()

    def workload(self, name: str) -> WorkloadSpec:
        """Get a registered workload.

        Raises:
            KeyError: If the workload is not registered
        """
        if name not in self.workloads:
            raise KeyError(f"Unknown workload {name!r}")
        return self.workloads[name]

    def with_workloads(self, specs: Iterable[WorkloadSpec]) -> "DeviceModel":
        """Return a model with ``specs`` registered alongside existing workloads."""
        workloads = dict(self.workloads)
        workloads.update({spec.name: spec for spec in specs})
        return DeviceModel(self.grid, workloads, self.config)

    def eval(
        self, mode: PowerMode, batch_size: int, workload: WorkloadSpec
    ) -> Tuple[float, float]:
        """Evaluate minibatch time (s) and power (W).

        Raises:
            InvalidModeError: If ``mode`` is not on the grid
            ValueError: If ``batch_size`` is below 1
        """
        self.grid.validate(mode)
        if batch_size < 1:
            raise ValueError("Batch size must be at least 1")
        values = np.array(mode.as_tuple(), dtype=float)
        time, power = _surfaces(workload, values, self._max_values, batch_size)
        time, power = float(time), float(power)
        if self.config.noise_amplitude > 0:
            t_noise, p_noise = self._noise(mode, batch_size, workload)
            time *= t_noise
            power *= p_noise
        return time, power

    def sample(
        self, mode: PowerMode, batch_size: int, workload: WorkloadSpec
    ) -> ProfileSample:
        time, power = self.eval(mode, batch_size, workload)
        return ProfileSample(mode, batch_size, time, power, workload.name)

    def eval_grid(
        self, workload: WorkloadSpec, batch_size: int
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Noise-free time and power of every grid mode, in grid iteration order."""
        return _surfaces(workload, self.grid.as_array(), self._max_values, batch_size)

    def _noise(
        self, mode: PowerMode, batch_size: int, workload: WorkloadSpec
    ) -> Tuple[float, float]:
        key = [
            self.config.noise_seed,
            zlib.crc32(workload.name.encode("utf-8")),
            *mode.as_tuple(),
            batch_size,
        ]
        amp = self.config.noise_amplitude
        draws = np.random.default_rng(key).uniform(-amp, amp, size=2)
        return 1.0 + float(draws[0]), 1.0 + float(draws[1])


def _surfaces(
    workload: WorkloadSpec,
    values: np.ndarray,
    max_values: np.ndarray,
    batch_size: int,
) -> Tuple[np.ndarray, np.ndarray]:
    serial = np.asarray(workload.serial_fractions)
    factors = (1.0 - serial) + serial * (max_values / values)
    time = workload.batch_factor(batch_size) * workload.base_time * np.prod(
        factors, axis=-1
    )
    dynamic = values @ np.asarray(workload.power_coeffs)
    power = workload.power_static + workload.batch_load(batch_size) * dynamic
    return time, power


def check_monotone(
    grid: PowerModeGrid,
    spec: WorkloadSpec,
    batch_sizes: Optional[Iterable[int]] = None,
) -> None:
    """Scan the grid and require monotone surfaces along every dimension.

    Raises:
        ValueError: If time increases or power decreases along a dimension
    """
    values = grid.as_array().reshape(*grid.shape, 4)
    max_values = grid.max_values()
    for bs in batch_sizes or spec.eval_batch_sizes:
        time, power = _surfaces(spec, values, max_values, bs)
        for axis in range(4):
            if np.any(np.diff(time, axis=axis) > 1e-12) or np.any(
                np.diff(power, axis=axis) < -1e-12
            ):
                raise ValueError(
                    f"Workload {spec.name!r} is not monotone along dimension {axis}"
                )
