"""Tests for strategy dispatch and configuration sweeps."""
import json
from pathlib import Path

import pandas as pd
import pytest

from src.core.device import DeviceModel
from src.core.errors import ConfigError
from src.core.harness import (
    COLUMNS,
    SweepSpec,
    default_training_sweep,
    parse_strategy,
    run_sweep,
    solve_one,
)
from src.core.harness.sweep import values
from src.core.problem import ProblemConfig, Variant


def test_values_inclusive_with_stride() -> None:
    """Test value ranges include both ends and thin by stride."""
    assert values((10.0, 50.0), 1.0) == [float(v) for v in range(10, 51)]
    assert values((10.0, 50.0), 1.0, 5) == [float(v) for v in range(10, 51, 5)]
    assert values((0.05, 1.0), 0.05, 5) == [0.05, 0.3, 0.55, 0.8]


def test_default_training_sweep_size() -> None:
    """Test the training sweep covers 215 power budgets."""
    spec = default_training_sweep()
    assert len(spec.all_problems()) == 215
    # The wide-power workload runs up to 60 W.
    assert len(spec.problems("bert-train")) == 51
    assert all(p.variant is Variant.TRAIN for p in spec.all_problems())


def test_infer_sweep_product() -> None:
    """Test inference sweeps span power, latency and rate."""
    spec = SweepSpec(
        variant="infer",
        workloads=["mobilenet-infer"],
        power_range=(20.0, 40.0),
        power_step=10.0,
        latency_range=(0.1, 0.2),
        latency_step=0.1,
        rate_range=(30.0, 50.0),
        rate_step=10.0,
        full=True,
    )
    problems = spec.problems("mobilenet-infer")
    assert len(problems) == 3 * 2 * 3
    assert {p.arrival_rate for p in problems} == {30.0, 40.0, 50.0}


def test_spec_validation() -> None:
    """Test malformed sweeps fail before running."""
    with pytest.raises(ConfigError):
        SweepSpec(variant="fly")
    with pytest.raises(ConfigError):
        SweepSpec(workloads=[])
    with pytest.raises(ConfigError):
        SweepSpec(power_range=(50.0, 10.0))
    with pytest.raises(ConfigError):
        SweepSpec(strategies=["greedy"])
    with pytest.raises(ConfigError):
        SweepSpec.from_dict({"variant": "train", "power_rnage": [10, 20]})
    concurrent = SweepSpec(variant="concurrent", workloads=["resnet-train"])
    with pytest.raises(ConfigError):
        concurrent.problems("resnet-train")


def test_unknown_workload_rejected(device: DeviceModel) -> None:
    """Test sweeps name the first unregistered workload."""
    spec = SweepSpec(workloads=["resnet-train", "vgg-train"])
    with pytest.raises(ConfigError, match="vgg-train"):
        run_sweep(spec, device)


def test_from_json(tmp_path: Path) -> None:
    """Test sweeps load from JSON with list ranges."""
    path = tmp_path / "sweep.json"
    path.write_text(
        json.dumps(
            {
                "workloads": ["resnet-train"],
                "power_range": [20, 30],
                "power_overrides": {"resnet-train": [25, 30]},
                "strategies": ["optimal", "rnd10"],
            }
        )
    )
    spec = SweepSpec.from_json(path)
    assert spec.power_range == (20, 30)
    assert spec.power_overrides == {"resnet-train": (25, 30)}


def test_parse_strategy() -> None:
    """Test strategy names split into a kind and a count."""
    assert parse_strategy("gmd") == ("gmd", None)
    assert parse_strategy("rnd250") == ("rnd", 250)
    assert parse_strategy("nn50") == ("nn", 50)
    for bad in ("nn", "rnd0", "greedy", "GMD"):
        with pytest.raises(ConfigError):
            parse_strategy(bad)


def test_solve_one(small_device: DeviceModel) -> None:
    """Test single solves report their trials and respect the budget."""
    problem = ProblemConfig(Variant.TRAIN, 30.0, train_workload="resnet-train")
    optimal = solve_one(problem, "optimal", small_device)
    assert optimal.trials == 0
    assert optimal.solution is not None

    gmd = solve_one(problem, "gmd", small_device)
    assert 1 <= gmd.trials <= 15
    assert gmd.solution is not None and gmd.solution.power <= 30.0
    assert gmd.trace is not None


def test_run_sweep_writes_reports(small_device: DeviceModel, tmp_path: Path) -> None:
    """Test a tiny sweep writes rows, a summary and the violin table."""
    spec = SweepSpec(
        workloads=["resnet-train", "mobilenet-train"],
        power_range=(20.0, 30.0),
        power_step=5.0,
        strategies=["optimal", "gmd", "rnd10"],
        seeds=[0],
        full=True,
    )
    report = run_sweep(spec, small_device, tmp_path)
    assert len(report.rows) == 2 * 3 * 3
    # Row order follows workloads, then budgets, then strategies.
    assert [r.strategy for r in report.rows[:3]] == ["optimal", "gmd", "rnd10"]
    assert all(r.workload == "resnet-train" for r in report.rows[:9])

    rows = pd.read_csv(tmp_path / "rows.csv")
    assert list(rows.columns) == COLUMNS
    assert len(rows) == 18
    violin = pd.read_csv(tmp_path / "violin.csv")
    assert "oracle_solved" in violin.columns

    summary = json.loads((tmp_path / "summary.json").read_text())
    optimal = [s for s in summary if s["strategy"] == "optimal"]
    assert len(optimal) == 2
    for entry in optimal:
        assert entry["pct_solved"] in (None, 100.0)
        assert entry["power_violations"] == 0
    # GMD and RND only return profiled points under budget.
    assert all(s["power_violations"] == 0 for s in summary)


def test_sweep_output_is_byte_identical(
    small_device: DeviceModel, tmp_path: Path
) -> None:
    """Test two runs with the same seeds write identical files."""
    spec = SweepSpec(
        workloads=["yolo-train"],
        power_range=(20.0, 40.0),
        power_step=10.0,
        strategies=["optimal", "gmd", "binary", "rnd10"],
        seeds=[0, 3],
        full=True,
    )
    run_sweep(spec, small_device, tmp_path / "first")
    run_sweep(spec, small_device, tmp_path / "second")
    for name in ("rows.csv", "summary.json", "violin.csv"):
        first = (tmp_path / "first" / name).read_bytes()
        assert first
        assert first == (tmp_path / "second" / name).read_bytes()
