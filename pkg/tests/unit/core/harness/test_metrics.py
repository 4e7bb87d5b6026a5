"""Tests for per-configuration metrics and their aggregates."""
import pytest

from src.core.device import DeviceModel
from src.core.harness import COLUMNS, MetricRow, compute, summarize, workload_label
from src.core.oracle import GroundTruth, optimal_oracle
from src.core.power_mode import PowerMode
from src.core.problem import ProblemConfig, Solution, Variant


def _train(power: float) -> ProblemConfig:
    return ProblemConfig(Variant.TRAIN, power, train_workload="resnet-train")


def _row(strategy: str, solved: bool, oracle_solved: bool = True) -> MetricRow:
    return MetricRow(
        strategy=strategy,
        variant="train",
        p_budget_w=30.0,
        lat_budget_s=None,
        arrival_rps=None,
        workload="resnet-train",
        solved=solved,
        excess_time_pct=5.0 if solved else None,
        tput_loss_pct=None,
        power_delta_w=-1.0,
        trials=4,
        oracle_solved=oracle_solved,
    )


def test_workload_labels() -> None:
    """Test labels name one workload, or a throughput+latency pair."""
    assert workload_label(_train(30.0)) == "resnet-train"
    concurrent = ProblemConfig(
        Variant.CONCURRENT,
        40.0,
        train_workload="resnet-train",
        infer_workload="mobilenet-infer",
        latency_budget=1.0,
        arrival_rate=60.0,
    )
    assert workload_label(concurrent) == "resnet-train+mobilenet-infer"


def test_optimum_against_itself(truth: GroundTruth) -> None:
    """Test the optimum scores zero excess and a non-positive power delta."""
    problem = _train(30.0)
    optimum = optimal_oracle(truth, problem)
    assert optimum is not None
    row = compute("optimal", problem, optimum, optimum, truth, 0)
    assert row.solved
    assert row.excess_time_pct == pytest.approx(0.0)
    assert row.tput_loss_pct is None
    assert row.power_delta_w is not None and row.power_delta_w <= 0
    assert list(row.to_dict()) == COLUMNS


def test_slower_mode_has_positive_excess(
    device: DeviceModel, truth: GroundTruth
) -> None:
    """Test a feasible but slower mode reports its excess time."""
    problem = _train(30.0)
    optimum = optimal_oracle(truth, problem)
    assert optimum is not None
    slow = truth.sample("resnet-train", device.grid.minimum, 1)
    solution = Solution(
        mode=device.grid.minimum,
        batch_size=1,
        time=slow.time,
        power=slow.power,
        objective=slow.time,
        strategy="manual",
    )
    row = compute("manual", problem, solution, optimum, truth, 1)
    assert row.solved
    assert row.excess_time_pct is not None and row.excess_time_pct > 0


def test_unsolved_and_violations(device: DeviceModel, truth: GroundTruth) -> None:
    """Test missing answers and over-budget choices count as unsolved."""
    problem = _train(15.0)
    optimum = optimal_oracle(truth, problem)
    missing = compute("gmd", problem, None, optimum, truth, 3)
    assert not missing.solved
    assert missing.excess_time_pct is None and missing.power_delta_w is None

    maxn: PowerMode = device.grid.maxn
    hot = truth.sample("resnet-train", maxn, 1)
    solution = Solution(maxn, 1, hot.time, hot.power, hot.time, strategy="nn10")
    row = compute("nn10", problem, solution, optimum, truth, 10, violated=True)
    assert not row.solved
    assert row.power_delta_w is not None and row.power_delta_w > 0


def test_summarize_counts_only_solvable() -> None:
    """Test the solved percentage ignores configurations the oracle misses."""
    rows = [
        _row("gmd", True),
        _row("gmd", False),
        _row("gmd", False, oracle_solved=False),
        _row("optimal", True),
    ]
    summary = {s["strategy"]: s for s in summarize(rows)}
    assert summary["gmd"]["configs"] == 3
    assert summary["gmd"]["solvable"] == 2
    assert summary["gmd"]["pct_solved"] == pytest.approx(50.0)
    assert summary["optimal"]["pct_solved"] == pytest.approx(100.0)
    assert summary["gmd"]["excess_time_pct"]["median"] == pytest.approx(5.0)
    assert summarize([]) == []
