"""Pytest configuration and fixtures."""
import pytest

from src.core.device import DeviceModel
from src.core.oracle import GroundTruth
from src.core.power_mode import PowerModeGrid
from src.core.surrogate import TrainConfig


@pytest.fixture(scope="session")
def device() -> DeviceModel:
    """Noise-free device model on the full 441-mode grid."""
    return DeviceModel()


@pytest.fixture(scope="session")
def truth(device: DeviceModel) -> GroundTruth:
    """Memoized ground truth shared across tests."""
    return GroundTruth(device)


@pytest.fixture
def small_grid() -> PowerModeGrid:
    """A 3x3x3x2 grid for exhaustive cross-checks."""
    return PowerModeGrid(
        cores=[4, 8, 12],
        cpu_freqs=[422, 1344, 2200],
        gpu_freqs=[115, 727, 1300],
        mem_freqs=[665, 3200],
    )


@pytest.fixture
def small_device(small_grid: PowerModeGrid) -> DeviceModel:
    """Device model on the reduced grid."""
    return DeviceModel(grid=small_grid)


@pytest.fixture
def fast_train() -> TrainConfig:
    """Small surrogate recipe so fits finish quickly."""
    return TrainConfig(epochs=60, hidden=(32, 16), learning_rate=1e-2)
