"""Asymmetric mean absolute percentage error."""
import numpy as np

DEFAULT_PENALTY = 4.0
DEFAULT_EPS = 1e-6


def _weights(pred: np.ndarray, true: np.ndarray, penalty: float) -> np.ndarray:
    return np.where(pred < true, penalty, 1.0)


def asymmetric_mape_loss(
    pred: np.ndarray,
    true: np.ndarray,
    penalty: float = DEFAULT_PENALTY,
    eps: float = DEFAULT_EPS,
) -> float:
    """Mean of ``|pred - true| / |true|``, under-predictions weighted by ``penalty``."""
    pred = np.asarray(pred, dtype=float)
    true = np.asarray(true, dtype=float)
    errors = np.abs(pred - true) / (np.abs(true) + eps)
    return float(np.mean(_weights(pred, true, penalty) * errors))


def asymmetric_mape_grad(
    pred: np.ndarray,
    true: np.ndarray,
    penalty: float = DEFAULT_PENALTY,
    eps: float = DEFAULT_EPS,
) -> np.ndarray:
    """Gradient of :func:`asymmetric_mape_loss` with respect to ``pred``."""
    pred = np.asarray(pred, dtype=float)
    true = np.asarray(true, dtype=float)
    scale = _weights(pred, true, penalty) / (np.abs(true) + eps) / pred.size
    return scale * np.sign(pred - true)
