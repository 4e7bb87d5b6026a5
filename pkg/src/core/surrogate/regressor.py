"""Feed-forward regressor predicting minibatch time or power from a power mode."""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from sklearn.model_selection import train_test_split
from sklearn.preprocessing import StandardScaler

from ..errors import InsufficientDataError
from .loss import asymmetric_mape_grad, asymmetric_mape_loss

logger = logging.getLogger(__name__)

Params = List[np.ndarray]


@dataclass
class TrainConfig:
    """Training recipe for :func:`fit`."""

    epochs: int = 1000
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    validation_fraction: float = 0.2
    penalty: float = 4.0
    """Weight on under-predictions."""
    loss_eps: float = 1e-6
    hidden: Tuple[int, ...] = field(default=(256, 128, 64))
    min_samples: int = 10

    def __post_init__(self) -> None:
        """Validate configuration values."""
        if self.epochs <= 0:
            raise ValueError("Epochs must be greater than 0")
        if self.learning_rate <= 0:
            raise ValueError("Learning rate must be greater than 0")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("Validation fraction must lie in (0, 1)")
        if self.penalty <= 1.0:
            raise ValueError("Under-prediction penalty must be greater than 1")
        if not self.hidden or min(self.hidden) <= 0:
            raise ValueError("Hidden layer widths must be positive")


class Regressor:
    """ReLU multilayer perceptron with a linear scalar output.

    Features are standardized with a :class:`~sklearn.preprocessing.StandardScaler`
    (constant features keep unit scale); targets are divided by their training mean
    magnitude so the network works on values near 1.
    """

    def __init__(
        self, input_dim: int, hidden: Sequence[int] = (256, 128, 64), seed: int = 0
    ) -> None:
        if input_dim <= 0:
            raise ValueError("Input dimension must be greater than 0")
        self.input_dim = input_dim
        self.widths = [input_dim, *hidden, 1]
        rng = np.random.default_rng(seed)
        self.weights: Params = []
        self.biases: Params = []
        for fan_in, fan_out in zip(self.widths, self.widths[1:]):
            limit = np.sqrt(6.0 / fan_in)
            self.weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))
        self.scaler = StandardScaler()
        self.target_scale = 1.0
        # Per-epoch (training loss, validation loss).
        self.history: List[Tuple[float, float]] = []
        self.best_epoch = -1
        self.best_val_loss = float("inf")

    @property
    def parameters(self) -> Params:
        """Weights and biases interleaved layer by layer (views, not copies)."""
        params: Params = []
        for weight, bias in zip(self.weights, self.biases):
            params.extend((weight, bias))
        return params

    def snapshot(self) -> Params:
        return [p.copy() for p in self.parameters]

    def restore(self, params: Params) -> None:
        for target, source in zip(self.parameters, params):
            target[...] = source

    def forward(self, scaled: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
        """Network output for standardized inputs, plus layer activations."""
        activations = [scaled]
        h = scaled
        last = len(self.weights) - 1
        for i, (weight, bias) in enumerate(zip(self.weights, self.biases)):
            z = h @ weight + bias
            h = z if i == last else np.maximum(z, 0.0)
            activations.append(h)
        return h.ravel(), activations

    def loss_and_gradients(
        self,
        scaled: np.ndarray,
        target: np.ndarray,
        penalty: float = 4.0,
        eps: float = 1e-6,
    ) -> Tuple[float, Params]:
        """Asymmetric MAPE on scaled targets and its gradient per parameter."""
        out, activations = self.forward(scaled)
        loss = asymmetric_mape_loss(out, target, penalty, eps)
        grad = asymmetric_mape_grad(out, target, penalty, eps).reshape(-1, 1)
        grads: Params = []
        for i in range(len(self.weights) - 1, -1, -1):
            inputs = activations[i]
            grads.append(grad.sum(axis=0))
            grads.append(inputs.T @ grad)
            if i:
                grad = (grad @ self.weights[i].T) * (activations[i] > 0)
        grads.reverse()
        return loss, grads

    def _check_dim(self, features: np.ndarray) -> np.ndarray:
        features = np.atleast_2d(np.asarray(features, dtype=float))
        if features.shape[1] != self.input_dim:
            raise ValueError(
                f"Expected {self.input_dim} features, got {features.shape[1]}"
            )
        return features

    def predict(self, features: Union[Sequence[float], np.ndarray]) -> np.ndarray:
        """Predict targets for a feature matrix (or a single feature vector).

        Raises:
            ValueError: If the feature dimension does not match the model
        """
        scaled = self.scaler.transform(self._check_dim(np.asarray(features)))
        out, _ = self.forward(scaled)
        return out * self.target_scale

    def predict_one(self, features: Sequence[float]) -> float:
        return float(self.predict(np.asarray(features, dtype=float))[0])

    def to_dict(self) -> Dict[str, object]:
        flat = np.concatenate([p.ravel() for p in self.parameters])
        return {
            "layers": [[a, b] for a, b in zip(self.widths, self.widths[1:])],
            "weights": flat.tolist(),
            "scaler_mean": self.scaler.mean_.tolist(),
            "scaler_scale": self.scaler.scale_.tolist(),
            "target_scale": self.target_scale,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "Regressor":
        layers = [tuple(pair) for pair in data["layers"]]  # type: ignore[attr-defined]
        model = cls(int(layers[0][0]), [int(b) for _, b in layers[:-1]])
        flat = np.asarray(data["weights"], dtype=float)
        offset = 0
        for param in model.parameters:
            size = param.size
            param[...] = flat[offset : offset + size].reshape(param.shape)
            offset += size
        if offset != flat.size:
            raise ValueError("Weight array does not match the layer header")
        mean = np.asarray(data["scaler_mean"], dtype=float)
        scale = np.asarray(data["scaler_scale"], dtype=float)
        model.scaler.mean_ = mean
        model.scaler.scale_ = scale
        model.scaler.var_ = scale**2
        model.scaler.n_features_in_ = mean.size
        model.scaler.n_samples_seen_ = 0
        model.target_scale = float(data["target_scale"])  # type: ignore[arg-type]
        return model

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Regressor":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def fit(
    features: np.ndarray,
    targets: np.ndarray,
    config: Optional[TrainConfig] = None,
    seed: int = 0,
) -> Regressor:
    """Train a regressor with full-batch Adam, keeping the best validation epoch.

    Raises:
        InsufficientDataError: If fewer than ``config.min_samples`` samples are given
    """
    config = config or TrainConfig()
    features = np.atleast_2d(np.asarray(features, dtype=float))
    targets = np.asarray(targets, dtype=float).ravel()
    if len(targets) < config.min_samples:
        raise InsufficientDataError(
            f"Need at least {config.min_samples} samples, got {len(targets)}"
        )
    if features.shape[0] != len(targets):
        raise ValueError("Features and targets must have the same length")

    train_idx, val_idx = train_test_split(
        np.arange(len(targets)),
        test_size=config.validation_fraction,
        random_state=seed,
    )
    model = Regressor(features.shape[1], config.hidden, seed)
    x_train = model.scaler.fit_transform(features[train_idx])
    x_val = model.scaler.transform(features[val_idx])
    scale = float(np.mean(np.abs(targets[train_idx])))
    model.target_scale = scale if scale > 0 else 1.0
    y_train = targets[train_idx] / model.target_scale
    y_val = targets[val_idx] / model.target_scale

    params = model.parameters
    first = [np.zeros_like(p) for p in params]
    second = [np.zeros_like(p) for p in params]
    best = model.snapshot()
    for epoch in range(1, config.epochs + 1):
        train_loss, grads = model.loss_and_gradients(
            x_train, y_train, config.penalty, config.loss_eps
        )
        for p, g, m, v in zip(params, grads, first, second):
            m *= config.beta1
            m += (1.0 - config.beta1) * g
            v *= config.beta2
            v += (1.0 - config.beta2) * g * g
            m_hat = m / (1.0 - config.beta1**epoch)
            v_hat = v / (1.0 - config.beta2**epoch)
            p -= config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_eps)
        val_out, _ = model.forward(x_val)
        val_loss = asymmetric_mape_loss(val_out, y_val, config.penalty, config.loss_eps)
        model.history.append((train_loss, val_loss))
        if val_loss < model.best_val_loss:
            model.best_val_loss = val_loss
            model.best_epoch = epoch
            best = model.snapshot()
    model.restore(best)
    logger.debug(
        "Fit %d samples: best validation loss %.4f at epoch %d",
        len(targets), model.best_val_loss, model.best_epoch,
    )
    return model


def check_gradients(
    model: Regressor,
    scaled: np.ndarray,
    target: np.ndarray,
    n_points: int = 100,
    step: float = 1e-5,
    seed: int = 0,
) -> float:
    """Worst relative gap between analytic and central-difference gradients.

    Compares ``n_points`` randomly chosen parameter entries.
    """
    rng = np.random.default_rng(seed)
    _, grads = model.loss_and_gradients(scaled, target)
    params = model.parameters
    worst = 0.0
    for _ in range(n_points):
        k = int(rng.integers(len(params)))
        idx = tuple(int(rng.integers(n)) for n in params[k].shape)
        original = params[k][idx]
        params[k][idx] = original + step
        up, _ = model.loss_and_gradients(scaled, target)
        params[k][idx] = original - step
        down, _ = model.loss_and_gradients(scaled, target)
        params[k][idx] = original
        numeric = (up - down) / (2 * step)
        analytic = grads[k][idx]
        denom = max(abs(numeric), abs(analytic), 1e-5)
        worst = max(worst, abs(numeric - analytic) / denom)
    return worst
