"""Fit workload cost surfaces to a handful of measured anchor points."""
import logging
from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

from .device import DeviceModel, check_monotone
from .errors import CalibrationError
from .power_mode import PowerMode, PowerModeGrid
from .workload import WorkloadSpec

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 0.15


@dataclass(frozen=True)
class Anchor:
    """A measured (time, power) at one mode and batch size."""

    mode: PowerMode
    batch_size: int
    time: float
    power: float


def _generic_template(name: str, kind: str, grid: PowerModeGrid) -> WorkloadSpec:
    shares = (0.10, 0.20, 0.50, 0.20)
    coeffs = tuple(s / v for s, v in zip(shares, grid.max_values()))
    return WorkloadSpec(
        name=name,
        kind=kind,
        base_time=1.0,
        serial_fractions=(0.02, 0.08, 0.50, 0.20),
        power_static=8.0,
        power_coeffs=coeffs,  # type: ignore[arg-type]
        batch_affine=(0.5, 0.5) if kind == "infer" else (0.1, 0.9),
        batch_power_share=0.5 if kind == "infer" else 0.0,
    )


def _dominates(low: PowerMode, high: PowerMode) -> bool:
    return all(a <= b for a, b in zip(low.as_tuple(), high.as_tuple()))


def check_anchor_order(anchors: Sequence[Anchor]) -> None:
    """Reject anchor pairs that no monotone surface can reproduce.

    Raises:
        CalibrationError: Naming the first offending pair
    """
    for first, second in combinations(anchors, 2):
        for low, high in ((first, second), (second, first)):
            if low.batch_size == high.batch_size and low.mode != high.mode:
                if _dominates(low.mode, high.mode) and (
                    low.time < high.time or low.power > high.power
                ):
                    raise CalibrationError(
                        f"Anchors at {low.mode} and {high.mode} (bs={low.batch_size}) "
                        "violate monotonicity: the higher mode must be faster "
                        "and draw at least as much power"
                    )
            if low.mode == high.mode and low.batch_size < high.batch_size:
                if low.time >= high.time or low.power > high.power:
                    raise CalibrationError(
                        f"Anchors at {low.mode} with bs={low.batch_size} and "
                        f"bs={high.batch_size} violate batch monotonicity"
                    )


def _fit_batch_affine(anchors: Sequence[Anchor]) -> Optional[Tuple[float, float]]:
    """Relative least-squares fit of ``a + b*bs`` at the best-covered mode."""
    by_mode: Dict[PowerMode, List[Anchor]] = defaultdict(list)
    for anchor in anchors:
        by_mode[anchor.mode].append(anchor)
    candidates = [
        group for group in by_mode.values() if len({a.batch_size for a in group}) >= 2
    ]
    if not candidates:
        return None
    group = max(candidates, key=lambda g: (len({a.batch_size for a in g}), g[0].mode))
    rows = np.array([[1.0 / a.time, a.batch_size / a.time] for a in group])
    (a, b), *_ = np.linalg.lstsq(rows, np.ones(len(group)), rcond=None)
    if b <= 0:
        raise CalibrationError("Batch anchors imply time that does not grow with batch")
    return max(float(a), 1e-9), float(b)


def calibrate(
    anchors: Sequence[Anchor],
    name: str,
    kind: str = "infer",
    template: Optional[WorkloadSpec] = None,
    grid: Optional[PowerModeGrid] = None,
    tolerance: float = DEFAULT_TOLERANCE,
) -> WorkloadSpec:
    """Fit a workload spec reproducing every anchor within ``tolerance``.

    The template supplies the shape of the surfaces (relative per-dimension
    sensitivities and power shares); the fit scales them. Sensitivities stay at the
    template's when every anchor shares one mode.

    Raises:
        CalibrationError: If anchors are underdetermined, non-monotone or cannot be
            reproduced within tolerance
    """
    grid = grid or PowerModeGrid()
    if len(anchors) < 2 or len({(a.mode, a.batch_size) for a in anchors}) < 2:
        raise CalibrationError("Calibration needs at least two distinct anchors")
    for anchor in anchors:
        grid.validate(anchor.mode)
    check_anchor_order(anchors)
    template = template or _generic_template(name, kind, grid)

    affine = _fit_batch_affine(anchors) or template.batch_affine
    a, b = affine

    def batch_factor(bs: np.ndarray) -> np.ndarray:
        return (a + b * bs) / (a + b)

    batch = np.array([x.batch_size for x in anchors], dtype=float)
    values = np.array([x.mode.as_tuple() for x in anchors], dtype=float)
    times = np.array([x.time for x in anchors])
    powers = np.array([x.power for x in anchors])
    ratios = grid.max_values() / values
    serial = np.asarray(template.serial_fractions)
    k_max = 1.0 / max(serial.sum(), 1e-9)

    def time_model(x: np.ndarray) -> np.ndarray:
        s = np.clip(x[1] * serial, 0.0, 1.0)
        factor = np.prod((1.0 - s) + s * ratios, axis=1)
        return batch_factor(batch) * np.exp(x[0]) * factor

    fit_t = least_squares(
        lambda x: np.log(time_model(x)) - np.log(times),
        x0=np.array([np.log(times.min()), min(1.0, k_max)]),
        bounds=([-np.inf, 0.0], [np.inf, k_max]),
    )
    base_time = float(np.exp(fit_t.x[0]))
    fractions = tuple(float(v) for v in np.clip(fit_t.x[1] * serial, 0.0, 1.0))

    shape = values @ np.asarray(template.power_coeffs)
    busy = b * batch / (a + b * batch)
    train = kind == "train"

    def power_model(x: np.ndarray) -> np.ndarray:
        h = 0.0 if train else x[2]
        return x[0] + ((1.0 - h) + h * busy) * x[1] * shape

    scale0 = max(float(np.max(powers - template.power_static) / np.max(shape)), 1e-6)
    fit_p = least_squares(
        lambda x: (power_model(x) - powers) / powers,
        x0=np.array(
            [min(template.power_static, float(powers.min()) * 0.5), scale0,
             template.batch_power_share if not train else 0.0]
        ),
        bounds=([0.0, 1e-9, 0.0], [np.inf, np.inf, 1.0]),
    )
    static, scale, share = (float(v) for v in fit_p.x)
    spec = WorkloadSpec(
        name=name,
        kind=kind,
        base_time=base_time,
        serial_fractions=fractions,  # type: ignore[arg-type]
        power_static=static,
        power_coeffs=tuple(  # type: ignore[arg-type]
            scale * c for c in template.power_coeffs
        ),
        batch_affine=(float(a), float(b)),
        batch_power_share=0.0 if train else share,
        train_batch_size=template.train_batch_size,
        batch_sizes=template.batch_sizes,
    )

    try:
        check_monotone(grid, spec)
    except ValueError as exc:
        raise CalibrationError(str(exc)) from exc
    _check_reproduction(spec, anchors, grid, tolerance)
    logger.info(
        "Calibrated %s: base_time=%.4fs affine=(%.4f, %.5f) static=%.2fW",
        name, base_time, a, b, static,
    )
    return spec


def _check_reproduction(
    spec: WorkloadSpec,
    anchors: Sequence[Anchor],
    grid: PowerModeGrid,
    tolerance: float,
) -> None:
    device = DeviceModel(grid=grid, workloads={spec.name: spec})
    for anchor in anchors:
        time, power = device.eval(anchor.mode, anchor.batch_size, spec)
        t_err = abs(time - anchor.time) / anchor.time
        p_err = abs(power - anchor.power) / anchor.power
        if t_err > tolerance or p_err > tolerance:
            raise CalibrationError(
                f"Fit misses anchor {anchor.mode} bs={anchor.batch_size}: "
                f"time error {t_err:.1%}, power error {p_err:.1%}"
            )
