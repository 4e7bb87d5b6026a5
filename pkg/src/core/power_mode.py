"""Power modes and the grid of configurable device settings."""
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, Iterator, List, Sequence, Tuple

import numpy as np

from .errors import InvalidModeError

DIMENSIONS: Tuple[str, ...] = ("cores", "cpu_freq", "gpu_freq", "mem_freq")


@dataclass(frozen=True, order=True)
class PowerMode:
    """One point of the (cores, cpu, gpu, memory) configuration space."""

    cores: int
    cpu_freq: int
    """CPU frequency in MHz."""
    gpu_freq: int
    """GPU frequency in MHz."""
    mem_freq: int
    """Memory frequency in MHz."""

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return (self.cores, self.cpu_freq, self.gpu_freq, self.mem_freq)

    def value(self, dim: int) -> int:
        """Get the value of dimension ``dim`` (index into ``DIMENSIONS``)."""
        return self.as_tuple()[dim]

    def replace(self, dim: int, value: int) -> "PowerMode":
        """Return a copy with one dimension changed."""
        values = list(self.as_tuple())
        values[dim] = value
        return PowerMode(*values)

    def to_dict(self) -> Dict[str, int]:
        return dict(zip(DIMENSIONS, self.as_tuple()))

    def __str__(self) -> str:
        return f"{self.cores}c/{self.cpu_freq}/{self.gpu_freq}/{self.mem_freq}"


@dataclass
class PowerModeGrid:
    """The discrete set of power modes a device exposes."""

    cores: List[int] = field(default_factory=lambda: [4, 8, 12])
    cpu_freqs: List[int] = field(
        default_factory=lambda: [422, 729, 1036, 1344, 1651, 1958, 2200]
    )
    gpu_freqs: List[int] = field(
        default_factory=lambda: [115, 319, 522, 727, 930, 1134, 1300]
    )
    mem_freqs: List[int] = field(default_factory=lambda: [665, 2133, 3200])

    def __post_init__(self) -> None:
        """Validate that every dimension is a non-empty, strictly increasing list."""
        for name, values in zip(DIMENSIONS, self.dimension_values()):
            if not values:
                raise ValueError(f"Grid dimension {name} must not be empty")
            if any(b <= a for a, b in zip(values, values[1:])):
                raise ValueError(f"Grid dimension {name} must be strictly increasing")
            if values[0] <= 0:
                raise ValueError(f"Grid dimension {name} must be positive")
        self._modes: List[PowerMode] = [
            PowerMode(*values) for values in product(*self.dimension_values())
        ]
        self._index: Dict[PowerMode, int] = {m: i for i, m in enumerate(self._modes)}

    def dimension_values(self) -> Tuple[List[int], ...]:
        return (self.cores, self.cpu_freqs, self.gpu_freqs, self.mem_freqs)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(len(v) for v in self.dimension_values())

    def __len__(self) -> int:
        return len(self._modes)

    def __iter__(self) -> Iterator[PowerMode]:
        return iter(self._modes)

    def __contains__(self, mode: object) -> bool:
        return mode in self._index

    @property
    def modes(self) -> List[PowerMode]:
        return list(self._modes)

    @property
    def maxn(self) -> PowerMode:
        """The mode with every dimension at its maximum."""
        return PowerMode(*(values[-1] for values in self.dimension_values()))

    @property
    def minimum(self) -> PowerMode:
        return PowerMode(*(values[0] for values in self.dimension_values()))

    @property
    def midpoint(self) -> PowerMode:
        """Every dimension at its middle index (lower middle for even counts)."""
        return self.mode_at(self.midpoint_indices())

    def midpoint_indices(self) -> Tuple[int, ...]:
        return tuple((n - 1) // 2 for n in self.shape)

    def mode_at(self, indices: Sequence[int]) -> PowerMode:
        """Get the mode at per-dimension ``indices``.

        Raises:
            InvalidModeError: If an index is out of range
        """
        values = []
        for name, dim_values, idx in zip(DIMENSIONS, self.dimension_values(), indices):
            if not 0 <= idx < len(dim_values):
                raise InvalidModeError(f"Index {idx} out of range for {name}")
            values.append(dim_values[idx])
        return PowerMode(*values)

    def indices_of(self, mode: PowerMode) -> Tuple[int, ...]:
        """Get per-dimension indices of ``mode``.

        Raises:
            InvalidModeError: If the mode is not on the grid
        """
        self.validate(mode)
        return tuple(
            values.index(v)
            for values, v in zip(self.dimension_values(), mode.as_tuple())
        )

    def position(self, mode: PowerMode) -> int:
        """Flat position of ``mode`` in iteration order."""
        self.validate(mode)
        return self._index[mode]

    def validate(self, mode: PowerMode) -> None:
        if mode not in self._index:
            raise InvalidModeError(f"Power mode {mode} is not on the grid")

    def as_array(self) -> np.ndarray:
        """All modes as an ``(n_modes, 4)`` float array in iteration order."""
        return np.array([m.as_tuple() for m in self._modes], dtype=float)

    def max_values(self) -> np.ndarray:
        return np.array([values[-1] for values in self.dimension_values()], dtype=float)

    def to_dict(self) -> Dict[str, List[int]]:
        return {
            "cores": list(self.cores),
            "cpu_freqs": list(self.cpu_freqs),
            "gpu_freqs": list(self.gpu_freqs),
            "mem_freqs": list(self.mem_freqs),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, List[int]]) -> "PowerModeGrid":
        return cls(
            cores=[int(v) for v in data["cores"]],
            cpu_freqs=[int(v) for v in data["cpu_freqs"]],
            gpu_freqs=[int(v) for v in data["gpu_freqs"]],
            mem_freqs=[int(v) for v in data["mem_freqs"]],
        )
