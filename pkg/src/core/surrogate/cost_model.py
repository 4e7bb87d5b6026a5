"""Paired time and power surrogates over power-mode features."""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..device import ProfileSample
from ..power_mode import PowerMode
from .regressor import Regressor, TrainConfig, fit

# Predictions are floored here so predicted samples stay physically valid.
_MIN_PREDICTION = 1e-6


def mode_features(
    modes: Sequence[PowerMode], batch_sizes: Optional[Sequence[int]] = None
) -> np.ndarray:
    """Feature rows: the four mode values, plus batch size when given."""
    rows = np.array([m.as_tuple() for m in modes], dtype=float)
    if batch_sizes is None:
        return rows
    return np.column_stack([rows, np.asarray(batch_sizes, dtype=float)])


@dataclass
class CostSurrogate:
    """Separate regressors for minibatch time and power of one workload."""

    time: Regressor
    power: Regressor
    with_batch: bool

    @classmethod
    def fit_samples(
        cls,
        samples: Sequence[ProfileSample],
        with_batch: bool,
        config: Optional[TrainConfig] = None,
        seed: int = 0,
    ) -> "CostSurrogate":
        modes = [s.mode for s in samples]
        batches = [s.batch_size for s in samples] if with_batch else None
        features = mode_features(modes, batches)
        times = np.array([s.time for s in samples])
        powers = np.array([s.power for s in samples])
        return cls(
            time=fit(features, times, config, seed),
            power=fit(features, powers, config, seed + 1),
            with_batch=with_batch,
        )

    def predict(
        self, modes: Sequence[PowerMode], batch_size: int = 1
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Predicted (times, powers) of ``modes`` at ``batch_size``."""
        batches = [batch_size] * len(modes) if self.with_batch else None
        features = mode_features(modes, batches)
        times = np.maximum(self.time.predict(features), _MIN_PREDICTION)
        powers = np.maximum(self.power.predict(features), _MIN_PREDICTION)
        return times, powers

    def predict_samples(
        self, modes: Sequence[PowerMode], batch_size: int, workload: str
    ) -> List[ProfileSample]:
        times, powers = self.predict(modes, batch_size)
        return [
            ProfileSample(mode, batch_size, float(t), float(p), workload)
            for mode, t, p in zip(modes, times, powers)
        ]
