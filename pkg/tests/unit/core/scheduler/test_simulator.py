"""Tests for the managed-interleaving simulator."""
import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from src.core.power_mode import PowerMode
from src.core.scheduler import (
    ArrivalTrace,
    InterleavePlan,
    SimConfig,
    plan_inference,
    plan_interleave,
    simulate,
)

MODE = PowerMode(12, 2200, 1300, 3200)


def _plan(batch_size: int = 64, t_in: float = 0.2) -> InterleavePlan:
    return plan_interleave(
        MODE, batch_size, 80.0, t_tr=0.05, t_in=t_in, p_tr=30.0, p_in=25.0
    )


def test_deterministic_latency_bound() -> None:
    """Test the worst request latency equals the planned peak latency."""
    plan = _plan()
    trace = ArrivalTrace.constant(80.0, 60.0)
    result = simulate(plan, trace, latency_budget=1.0)

    assert result.max_latency == pytest.approx(63 / 80 + 0.2, abs=1e-9)
    assert result.violations(plan.latency) == 0
    assert result.dropped == 0
    assert result.queue_peak <= 64
    # Every arrival is completed, dropped or still waiting at the horizon.
    assert result.completed + result.dropped + result.unfinished == 4800
    assert result.completed % 64 == 0


def test_training_fills_the_slack() -> None:
    """Test training runs at the planned throughput at the planned peak power."""
    plan = _plan()
    result = simulate(plan, ArrivalTrace.constant(80.0, 60.0))
    assert result.train_throughput == pytest.approx(plan.throughput, rel=0.05)
    assert result.peak_power == plan.power
    expected = (
        result.inference_batches * plan.p_in * plan.t_in
        + result.train_minibatches * 30.0 * 0.05
    )
    assert result.energy_j == pytest.approx(expected)


def test_inference_only_plan() -> None:
    """Test an inference-only plan never trains and peaks at inference power."""
    plan = plan_inference(MODE, 16, 80.0, 0.1, 22.0)
    result = simulate(plan, ArrivalTrace.constant(80.0, 20.0))
    assert result.train_minibatches == 0
    assert result.peak_power == 22.0
    assert result.max_latency == pytest.approx(15 / 80 + 0.1, abs=1e-9)


def test_overload_drops_requests() -> None:
    """Test a rate above the service rate builds a backlog that gets dropped."""
    plan = _plan(batch_size=16, t_in=0.3)
    assert not plan.feasible
    result = simulate(plan, ArrivalTrace.constant(80.0, 60.0), latency_budget=0.5)
    assert result.dropped > 0
    assert result.max_latency > 0.5
    assert result.violations(0.5) > 0
    assert result.train_minibatches == 0
    # Drops happen at non-decreasing times.
    assert result.drop_times == sorted(result.drop_times)


def test_idle_segment() -> None:
    """Test a missing plan leaves requests queued for the next segment."""
    plan = plan_inference(MODE, 4, 20.0, 0.05, 20.0)
    trace = ArrivalTrace.from_rates([20.0, 20.0], segment=10.0)
    result = simulate([None, plan], trace)
    assert result.completed > 0
    assert result.max_latency > 10.0 - 0.05 - 1e-9

    idle = simulate([None, None], trace)
    assert idle.completed == 0
    assert idle.unfinished == 400


def test_plan_count_must_match() -> None:
    """Test one plan is needed per segment."""
    trace = ArrivalTrace.from_rates([20.0, 20.0], segment=10.0)
    with pytest.raises(ValueError):
        simulate([_plan()], trace)
    with pytest.raises(ValueError):
        SimConfig(drop_factor=1.0)


def test_poisson_run_reports(tmp_path: Path) -> None:
    """Test Poisson arrivals produce a summary and a request log."""
    plan = _plan()
    trace = ArrivalTrace.constant(60.0, 60.0, arrivals="poisson")
    result = simulate(plan, trace, latency_budget=1.0, config=SimConfig(seed=3))
    summary = result.to_dict(latency_budget=1.0)
    assert summary["completed"] == result.completed
    assert "violations" in summary
    assert result.percentile(99) >= result.percentile(50)

    path = tmp_path / "requests.csv"
    result.write_requests(path)
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["arrival_s", "finish_s", "latency_s"]
    assert len(frame) == result.completed


def test_random_plans_meet_their_latency_bound() -> None:
    """Test a thousand random feasible plans under deterministic arrivals.

    The slowest request waits exactly the planned peak latency, and each served
    cycle trains the planned number of minibatches.
    """
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        batch_size = int(rng.choice([1, 4, 16, 32, 64]))
        rate = float(rng.uniform(10.0, 120.0))
        cycle = batch_size / rate
        t_in = float(rng.uniform(0.05, 0.9)) * cycle
        t_tr = float(rng.uniform(0.12, 1.5)) * (cycle - t_in)
        plan = plan_interleave(
            MODE, batch_size, rate, t_tr=t_tr, t_in=t_in, p_tr=30.0, p_in=25.0
        )
        assert plan.feasible
        trace = ArrivalTrace.constant(rate, 12 * cycle)
        result = simulate(plan, trace)

        assert result.inference_batches >= 10
        assert result.max_latency == pytest.approx(
            (batch_size - 1) / rate + t_in, abs=1e-9
        )
        assert result.dropped == 0
        # Minibatches that fit before the first batch is ready.
        head = math.floor((batch_size - 1) / rate / t_tr + 1e-9)
        trained = result.train_minibatches - head
        served = result.inference_batches
        assert plan.tau * (served - 1) - 1 <= trained <= plan.tau * served + 1
