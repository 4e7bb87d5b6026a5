"""Tests for arrival-rate traces."""
from pathlib import Path

import numpy as np
import pytest

from src.core.errors import TraceError
from src.core.scheduler import ArrivalTrace, Segment, gen_trace


def test_poisson_trace_segments() -> None:
    """Test a two-hour trace with five-minute segments has 24 segments."""
    trace = gen_trace("poisson", mean=60.0, horizon=7200.0, segment=300.0, seed=7)
    assert len(trace) == 24
    assert trace.horizon == pytest.approx(7200.0)
    assert all(rate >= 1 for rate in trace.rates)
    assert 40 < float(np.mean(trace.rates)) < 80

    again = gen_trace("poisson", mean=60.0, horizon=7200.0, segment=300.0, seed=7)
    assert again.rates == trace.rates


def test_rescale_maps_extremes() -> None:
    """Test rescaling maps the lowest and highest rates onto the range ends."""
    trace = ArrivalTrace.from_rates([10.0, 20.0, 40.0], segment=60.0)
    scaled = trace.rescaled(30.0, 90.0)
    assert scaled.rates == pytest.approx([30.0, 50.0, 90.0])
    assert scaled.horizon == trace.horizon

    flat = ArrivalTrace.from_rates([12.0, 12.0]).rescaled(30.0, 90.0)
    assert flat.rates == pytest.approx([60.0, 60.0])

    with pytest.raises(TraceError):
        trace.rescaled(90.0, 30.0)


def test_segment_lookup() -> None:
    """Test segment indices and boundaries."""
    trace = ArrivalTrace.from_rates([30.0, 60.0, 90.0], segment=10.0)
    assert trace.starts == [0.0, 10.0, 20.0]
    assert trace.segment_index(0.0) == 0
    assert trace.segment_index(10.0) == 1
    assert trace.segment_index(29.9) == 2
    assert trace.segment_index(100.0) == 2
    assert trace.rate_at(15.0) == 60.0
    assert trace.next_boundary(5.0) == 10.0
    assert trace.next_boundary(25.0) is None


def test_deterministic_arrivals() -> None:
    """Test deterministic arrivals are evenly spaced from each segment start."""
    trace = ArrivalTrace.from_rates([4.0, 2.0], segment=1.0)
    times = trace.arrival_times()
    np.testing.assert_allclose(times, [0.0, 0.25, 0.5, 0.75, 1.0, 1.5])


def test_poisson_arrivals() -> None:
    """Test Poisson arrivals are sorted, seeded and near the mean rate."""
    trace = ArrivalTrace.constant(50.0, 100.0, arrivals="poisson")
    times = trace.arrival_times(seed=1)
    assert np.all(np.diff(times) > 0)
    assert np.all(times < 100.0)
    assert 4500 < times.size < 5500
    np.testing.assert_array_equal(times, trace.arrival_times(seed=1))


def test_trace_validation() -> None:
    """Test malformed traces raise TraceError."""
    with pytest.raises(TraceError):
        Segment(0.0, 10.0)
    with pytest.raises(TraceError):
        Segment(10.0, -1.0)
    with pytest.raises(TraceError):
        ArrivalTrace(())
    with pytest.raises(TraceError):
        ArrivalTrace.constant(10.0, 10.0, arrivals="bursty")
    with pytest.raises(TraceError):
        gen_trace("sine")
    with pytest.raises(TraceError):
        gen_trace("file")


def test_trace_csv(tmp_path: Path) -> None:
    """Test a CSV trace is loaded and rescaled to 30-90 RPS."""
    path = tmp_path / "trace.csv"
    path.write_text("t_start_s,rate_rps\n0,100\n300,400\n600,250\n", encoding="utf-8")
    trace = gen_trace("file", path=path, segment=300.0)
    assert trace.rates == pytest.approx([30.0, 90.0, 60.0])
    assert trace.horizon == pytest.approx(900.0)

    out = tmp_path / "out.csv"
    trace.to_csv(out)
    loaded = ArrivalTrace.from_csv(out, segment=300.0)
    assert loaded.rates == pytest.approx(trace.rates)


def test_bad_trace_files(tmp_path: Path) -> None:
    """Test empty, column-less and unordered files are rejected."""
    empty = tmp_path / "empty.csv"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(TraceError):
        ArrivalTrace.from_csv(empty)

    columns = tmp_path / "columns.csv"
    columns.write_text("start,rate\n0,10\n", encoding="utf-8")
    with pytest.raises(TraceError):
        ArrivalTrace.from_csv(columns)

    unordered = tmp_path / "unordered.csv"
    unordered.write_text("t_start_s,rate_rps\n0,10\n300,20\n200,30\n", encoding="utf-8")
    with pytest.raises(TraceError):
        ArrivalTrace.from_csv(unordered)

    header_only = tmp_path / "header.csv"
    header_only.write_text("t_start_s,rate_rps\n", encoding="utf-8")
    with pytest.raises(TraceError):
        ArrivalTrace.from_csv(header_only)
