"""Tests for power modes and the mode grid."""
import pytest

from src.core.errors import InvalidModeError
from src.core.power_mode import PowerMode, PowerModeGrid


def test_default_grid_size() -> None:
    """Test the default grid has 441 modes."""
    grid = PowerModeGrid()
    assert grid.shape == (3, 7, 7, 3)
    assert len(grid) == 441
    assert len(set(grid.modes)) == 441


def test_grid_extremes() -> None:
    """Test MAXN, minimum and midpoint modes."""
    grid = PowerModeGrid()
    assert grid.maxn == PowerMode(12, 2200, 1300, 3200)
    assert grid.minimum == PowerMode(4, 422, 115, 665)
    assert grid.midpoint_indices() == (1, 3, 3, 1)
    assert grid.midpoint == PowerMode(8, 1344, 727, 2133)


def test_mode_at_and_indices_of() -> None:
    """Test index lookups in both directions."""
    grid = PowerModeGrid()
    mode = grid.mode_at((2, 0, 6, 1))
    assert mode == PowerMode(12, 422, 1300, 2133)
    assert grid.indices_of(mode) == (2, 0, 6, 1)

    with pytest.raises(InvalidModeError):
        grid.mode_at((3, 0, 0, 0))


def test_validate_off_grid_mode() -> None:
    """Test off-grid modes are rejected."""
    grid = PowerModeGrid()
    grid.validate(grid.maxn)
    assert PowerMode(12, 2200, 1300, 3200) in grid
    assert PowerMode(12, 2100, 1300, 3200) not in grid

    with pytest.raises(InvalidModeError):
        grid.validate(PowerMode(12, 2100, 1300, 3200))


def test_grid_validation() -> None:
    """Test malformed dimensions raise ValueError."""
    with pytest.raises(ValueError):
        PowerModeGrid(cores=[])
    with pytest.raises(ValueError):
        PowerModeGrid(cores=[8, 4])
    with pytest.raises(ValueError):
        PowerModeGrid(mem_freqs=[0, 665])


def test_mode_replace_and_str() -> None:
    """Test replacing a dimension and the compact string form."""
    mode = PowerMode(4, 422, 115, 665)
    assert mode.replace(2, 1300) == PowerMode(4, 422, 1300, 665)
    assert mode.value(1) == 422
    assert str(mode) == "4c/422/115/665"
    assert mode.to_dict()["gpu_freq"] == 115


def test_grid_dict_round_trip(small_grid: PowerModeGrid) -> None:
    """Test the grid serializes as four arrays."""
    data = small_grid.to_dict()
    assert sorted(data) == ["cores", "cpu_freqs", "gpu_freqs", "mem_freqs"]
    assert PowerModeGrid.from_dict(data) == small_grid


def test_as_array_matches_iteration(small_grid: PowerModeGrid) -> None:
    """Test the array form follows grid iteration order."""
    array = small_grid.as_array()
    assert array.shape == (len(small_grid), 4)
    for row, mode in zip(array, small_grid):
        assert tuple(int(v) for v in row) == mode.as_tuple()
