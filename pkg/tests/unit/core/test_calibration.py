"""Tests for fitting workload specs to anchor measurements."""
import pytest

from src.core.calibration import Anchor, calibrate, check_anchor_order
from src.core.device import DeviceModel
from src.core.errors import CalibrationError
from src.core.power_mode import PowerMode

LOW = PowerMode(4, 422, 115, 665)


def _anchors(device: DeviceModel, name: str, points: list) -> list:
    spec = device.workload(name)
    anchors = []
    for mode, bs in points:
        time, power = device.eval(mode, bs, spec)
        anchors.append(Anchor(mode, bs, time, power))
    return anchors


def test_recover_preset_from_anchors(device: DeviceModel) -> None:
    """Test anchors drawn from a preset are reproduced by the fitted spec."""
    maxn, mid = device.grid.maxn, device.grid.midpoint
    anchors = _anchors(
        device,
        "mobilenet-infer",
        [(maxn, 1), (maxn, 32), (maxn, 64), (LOW, 64), (mid, 16)],
    )
    template = device.workload("mobilenet-infer")
    spec = calibrate(anchors, "mobilenet-fit", template=template)

    a, b = spec.batch_affine
    assert a == pytest.approx(0.0166, rel=0.05)
    assert b == pytest.approx(0.00126, rel=0.05)

    fitted = device.with_workloads([spec])
    for anchor in anchors:
        time, power = fitted.eval(anchor.mode, anchor.batch_size, spec)
        assert time == pytest.approx(anchor.time, rel=0.15)
        assert power == pytest.approx(anchor.power, rel=0.15)


def test_bert_scales_near_linearly(device: DeviceModel) -> None:
    """Test a BERT-like fit has a far larger per-item share than MobileNet."""
    maxn = device.grid.maxn
    anchors = [Anchor(maxn, 1, 0.066, 57.9), Anchor(maxn, 32, 1.94, 61.8)]
    spec = calibrate(anchors, "bert-fit")
    a, b = spec.batch_affine
    m_a, m_b = device.workload("mobilenet-infer").batch_affine
    assert b / a > 10 * (m_b / m_a)


def test_too_few_anchors() -> None:
    """Test one anchor, or repeated anchors, cannot be calibrated."""
    maxn = PowerMode(12, 2200, 1300, 3200)
    with pytest.raises(CalibrationError):
        calibrate([Anchor(maxn, 1, 0.02, 20.0)], "one")
    with pytest.raises(CalibrationError):
        calibrate([Anchor(maxn, 1, 0.02, 20.0), Anchor(maxn, 1, 0.02, 20.0)], "same")


def test_non_monotone_anchors() -> None:
    """Test a lower mode that is faster than MAXN is reported."""
    maxn = PowerMode(12, 2200, 1300, 3200)
    anchors = [Anchor(maxn, 1, 0.05, 30.0), Anchor(LOW, 1, 0.01, 15.0)]
    with pytest.raises(CalibrationError, match="monotonicity"):
        check_anchor_order(anchors)
    with pytest.raises(CalibrationError):
        calibrate(anchors, "broken", kind="train")


def test_batch_anchors_must_grow() -> None:
    """Test larger batches must take longer at the same mode."""
    maxn = PowerMode(12, 2200, 1300, 3200)
    anchors = [Anchor(maxn, 1, 0.05, 30.0), Anchor(maxn, 16, 0.04, 31.0)]
    with pytest.raises(CalibrationError, match="batch"):
        check_anchor_order(anchors)
