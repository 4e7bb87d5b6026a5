"""Synthetic cost-surface parameters for DNN training and inference workloads."""
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

DEFAULT_BATCH_SIZES: Tuple[int, ...] = (1, 4, 16, 32, 64)
KINDS = ("train", "infer")


@dataclass(frozen=True)
class WorkloadSpec:
    """Parameters of the synthetic time and power surfaces of one DNN task.

    Time at ``(mode, bs)``::

        (a + b*bs) / (a + b) * base_time * prod_d[(1 - s_d) + s_d * v_max_d / v_d]

    Power at ``(mode, bs)``::

        power_static + load(bs) * sum_d c_d * v_d
        load(bs) = (1 - h) + h * b*bs / (a + b*bs)

    with ``h = batch_power_share``. Training presets use ``h = 0`` and are always
    evaluated at batch size 1 (one fixed-size training minibatch).
    """

    name: str
    kind: str
    base_time: float
    """Seconds per minibatch at MAXN with batch coefficient 1."""
    serial_fractions: Tuple[float, float, float, float]
    """Sensitivity of time to (cores, cpu, gpu, mem), each in [0, 1]."""
    power_static: float
    """Watts drawn regardless of mode."""
    power_coeffs: Tuple[float, float, float, float]
    """Watts per unit of (cores, cpu MHz, gpu MHz, mem MHz)."""
    batch_affine: Tuple[float, float]
    """``(a, b)``: fixed seconds and seconds per item of one minibatch."""
    batch_power_share: float = 0.0
    train_batch_size: int = 16
    """Items per training minibatch. Informational: the surfaces already describe
    one such minibatch at batch size 1, so this never scales time or power."""
    batch_sizes: Tuple[int, ...] = field(default=DEFAULT_BATCH_SIZES)
    """Batch sizes this workload may be run with (inference only)."""

    def __post_init__(self) -> None:
        """Validate parameters; together they guarantee monotone surfaces."""
        if self.kind not in KINDS:
            raise ValueError(f"Workload kind must be one of {KINDS}, got {self.kind!r}")
        if self.base_time <= 0:
            raise ValueError("Base time must be greater than 0")
        if len(self.serial_fractions) != 4 or len(self.power_coeffs) != 4:
            raise ValueError("Serial fractions and power coefficients need 4 values")
        if any(not 0.0 <= s <= 1.0 for s in self.serial_fractions):
            raise ValueError("Serial fractions must lie in [0, 1]")
        if sum(self.serial_fractions) > 1.0 + 1e-9:
            raise ValueError("Serial fractions must sum to at most 1")
        if self.power_static < 0 or any(c < 0 for c in self.power_coeffs):
            raise ValueError("Power terms must be non-negative")
        a, b = self.batch_affine
        if a < 0 or b <= 0:
            raise ValueError("Batch affine needs a >= 0 and b > 0")
        if not 0.0 <= self.batch_power_share <= 1.0:
            raise ValueError("Batch power share must lie in [0, 1]")
        if self.train_batch_size <= 0:
            raise ValueError("Training batch size must be greater than 0")
        if not self.batch_sizes or min(self.batch_sizes) < 1:
            raise ValueError("Batch sizes must be positive")

    @property
    def is_training(self) -> bool:
        return self.kind == "train"

    @property
    def eval_batch_sizes(self) -> Tuple[int, ...]:
        """Batch sizes searched for this workload."""
        return (1,) if self.is_training else tuple(sorted(self.batch_sizes))

    def batch_factor(self, batch_size: int) -> float:
        a, b = self.batch_affine
        return (a + b * batch_size) / (a + b)

    def batch_load(self, batch_size: int) -> float:
        a, b = self.batch_affine
        busy = b * batch_size / (a + b * batch_size)
        return (1.0 - self.batch_power_share) + self.batch_power_share * busy

    def to_dict(self) -> Dict[str, object]:
        data = asdict(self)
        data["serial_fractions"] = list(self.serial_fractions)
        data["power_coeffs"] = list(self.power_coeffs)
        data["batch_affine"] = list(self.batch_affine)
        data["batch_sizes"] = list(self.batch_sizes)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "WorkloadSpec":
        def floats(key: str) -> Tuple[float, ...]:
            return tuple(float(v) for v in data[key])

        return cls(
            name=str(data["name"]),
            kind=str(data["kind"]),
            base_time=float(data["base_time"]),
            serial_fractions=floats("serial_fractions"),
            power_static=float(data["power_static"]),
            power_coeffs=floats("power_coeffs"),
            batch_affine=floats("batch_affine"),
            batch_power_share=float(data.get("batch_power_share", 0.0)),
            train_batch_size=int(data.get("train_batch_size", 16)),
            batch_sizes=tuple(
                int(v) for v in data.get("batch_sizes", DEFAULT_BATCH_SIZES)
            ),
        )


def save_workloads(specs: List[WorkloadSpec], path: Union[str, Path]) -> None:
    """Write workload specs to a JSON document."""
    payload = {"workloads": [spec.to_dict() for spec in specs]}
    Path(path).write_text(json.dumps(payload, indent=2), encoding="utf-8")


def load_workloads(path: Union[str, Path]) -> List[WorkloadSpec]:
    """Read workload specs written by :func:`save_workloads`."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return [WorkloadSpec.from_dict(item) for item in payload["workloads"]]


# Maximum grid values, used to express presets as shares of dynamic power at MAXN.
_MAX_VALUES = (12, 2200, 1300, 3200)


def _preset(
    name: str,
    kind: str,
    serial: Tuple[float, float, float, float],
    static: float,
    dynamic: float,
    shares: Tuple[float, float, float, float],
    affine: Tuple[float, float],
    batch_power_share: float = 0.0,
    batch_sizes: Tuple[int, ...] = DEFAULT_BATCH_SIZES,
) -> WorkloadSpec:
    a, b = affine
    coeffs = tuple(dynamic * share / vmax for share, vmax in zip(shares, _MAX_VALUES))
    return WorkloadSpec(
        name=name,
        kind=kind,
        base_time=a + b,
        serial_fractions=serial,
        power_static=static,
        power_coeffs=coeffs,  # type: ignore[arg-type]
        batch_affine=affine,
        batch_power_share=batch_power_share,
        batch_sizes=batch_sizes,
    )


def _presets() -> Dict[str, WorkloadSpec]:
    # fmt: off
    specs = [
        # Training: one fixed 16-item minibatch per step.
        _preset("mobilenet-train", "train", (0.03, 0.10, 0.45, 0.20), 7.5, 38.5,
                (0.08, 0.20, 0.52, 0.20), (0.005, 0.040)),
        _preset("resnet-train", "train", (0.0, 0.05, 0.15, 0.45), 8.0, 43.1,
                (0.08, 0.17, 0.50, 0.25), (0.006, 0.054)),
        _preset("yolo-train", "train", (0.05, 0.15, 0.40, 0.20), 8.0, 40.0,
                (0.10, 0.20, 0.50, 0.20), (0.020, 0.230)),
        _preset("bert-train", "train", (0.0, 0.03, 0.60, 0.25), 9.0, 50.0,
                (0.05, 0.12, 0.58, 0.25), (0.050, 0.850)),
        _preset("lstm-train", "train", (0.05, 0.25, 0.30, 0.15), 7.0, 30.0,
                (0.12, 0.28, 0.40, 0.20), (0.008, 0.072)),
        # Inference: batch size is a tuned knob.
        _preset("mobilenet-infer", "infer", (0.0, 0.03, 0.55, 0.10), 9.0, 34.69,
                (0.10, 0.20, 0.50, 0.20), (0.0166, 0.00126), 0.7067),
        _preset("resnet-infer", "infer", (0.0, 0.05, 0.55, 0.20), 8.5, 40.0,
                (0.08, 0.18, 0.52, 0.22), (0.018, 0.0060), 0.6),
        _preset("yolo-infer", "infer", (0.03, 0.12, 0.50, 0.15), 8.0, 38.0,
                (0.10, 0.22, 0.48, 0.20), (0.020, 0.0045), 0.6),
        _preset("bert-infer", "infer", (0.0, 0.02, 0.65, 0.25), 9.0, 52.94,
                (0.05, 0.12, 0.58, 0.25), (0.00555, 0.06045), 0.9,
                batch_sizes=(1, 4, 16, 32)),
        _preset("lstm-infer", "infer", (0.05, 0.30, 0.25, 0.15), 7.0, 28.0,
                (0.12, 0.30, 0.38, 0.20), (0.008, 0.0009), 0.5),
    ]
    # fmt: on
    return {spec.name: spec for spec in specs}


PRESETS: Dict[str, WorkloadSpec] = _presets()
TRAIN_PRESETS = tuple(n for n, s in PRESETS.items() if s.is_training)
INFER_PRESETS = tuple(n for n, s in PRESETS.items() if not s.is_training)


def get_preset(name: str) -> WorkloadSpec:
    """Get a preset workload by name.

    Raises:
        KeyError: If no preset has that name
    """
    if name not in PRESETS:
        raise KeyError(f"Unknown workload {name!r}; presets: {', '.join(PRESETS)}")
    return PRESETS[name]
