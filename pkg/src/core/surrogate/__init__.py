"""Neural surrogates of the device cost surfaces."""

from .cost_model import CostSurrogate, mode_features
from .loss import asymmetric_mape_grad, asymmetric_mape_loss
from .regressor import Regressor, TrainConfig, check_gradients, fit

__all__ = [
    "CostSurrogate",
    "Regressor",
    "TrainConfig",
    "asymmetric_mape_grad",
    "asymmetric_mape_loss",
    "check_gradients",
    "fit",
    "mode_features",
]
