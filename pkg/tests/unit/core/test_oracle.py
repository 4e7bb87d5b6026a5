"""Tests for the exhaustive ground-truth optimum."""
import itertools
import math
from typing import Optional

import numpy as np
import pytest

from src.core.device import DeviceModel
from src.core.oracle import GroundTruth, optimal_oracle, recheck
from src.core.pareto import ParetoPoint, build_front, lookup
from src.core.power_mode import PowerMode
from src.core.problem import ProblemConfig, Variant
from src.core.workload import INFER_PRESETS, TRAIN_PRESETS


def test_train_oracle_matches_front_lookup(
    device: DeviceModel, truth: GroundTruth
) -> None:
    """Test the training optimum is the front point within the budget."""
    spec = device.workload("resnet-train")
    points = []
    for mode in device.grid:
        time, power = device.eval(mode, 1, spec)
        points.append(ParetoPoint(mode, 1, power, time))
    front = build_front(points)

    for budget in (15.0, 25.0, 30.0, 45.0):
        problem = ProblemConfig(Variant.TRAIN, budget, train_workload="resnet-train")
        solution = optimal_oracle(truth, problem)
        point = lookup(front, budget)
        assert solution is not None and point is not None
        assert solution.objective == pytest.approx(point.objective)
        assert solution.power <= budget
        assert solution.strategy == "optimal"


def test_infer_oracle_matches_nested_loops(small_device: DeviceModel) -> None:
    """Test the inference optimum on a reduced grid against plain loops."""
    truth = GroundTruth(small_device)
    problem = ProblemConfig(
        Variant.INFER,
        30.0,
        infer_workload="resnet-infer",
        latency_budget=0.5,
        arrival_rate=60.0,
    )
    spec = small_device.workload("resnet-infer")
    grid = small_device.grid
    best = None
    for cores, cpu, gpu, mem in itertools.product(*grid.dimension_values()):
        mode = PowerMode(cores, cpu, gpu, mem)
        for bs in spec.eval_batch_sizes:
            time, power = small_device.eval(mode, bs, spec)
            latency = (bs - 1) / 60.0 + time
            if power <= 30.0 and latency <= 0.5 and time <= bs / 60.0:
                if best is None or latency < best:
                    best = latency

    solution = optimal_oracle(truth, problem)
    assert best is not None and solution is not None
    assert solution.objective == pytest.approx(best)
    assert solution.latency == pytest.approx(best)


def test_oracle_zero_budget(truth: GroundTruth) -> None:
    """Test no mode fits a zero power budget."""
    problem = ProblemConfig(Variant.TRAIN, 0.0, train_workload="resnet-train")
    assert optimal_oracle(truth, problem) is None


def test_concurrent_oracle_and_recheck(small_device: DeviceModel) -> None:
    """Test the concurrent optimum is feasible when re-checked."""
    truth = GroundTruth(small_device)
    problem = ProblemConfig(
        Variant.CONCURRENT,
        40.0,
        train_workload="resnet-train",
        infer_workload="mobilenet-infer",
        latency_budget=0.5,
        arrival_rate=60.0,
    )
    solution = optimal_oracle(truth, problem)
    assert solution is not None
    assert solution.tau is not None and solution.tau >= 0
    again = recheck(truth, problem, solution)
    assert again.feasible
    assert again.throughput == pytest.approx(solution.objective)
    # Every candidate is scored, but none beats the answer.
    for candidate in truth.candidates(problem):
        if candidate.feasible:
            assert candidate.throughput <= solution.objective + 1e-12


def _random_problem(index: int) -> ProblemConfig:
    rng = np.random.default_rng(index)
    variant = (Variant.TRAIN, Variant.INFER, Variant.CONCURRENT)[index % 3]
    train = str(rng.choice(TRAIN_PRESETS))
    infer = str(rng.choice(INFER_PRESETS))
    power = float(rng.uniform(12.0, 60.0))
    if variant is Variant.TRAIN:
        return ProblemConfig(variant, power, train_workload=train)
    return ProblemConfig(
        variant,
        power,
        train_workload=train if variant is Variant.CONCURRENT else None,
        infer_workload=infer,
        latency_budget=float(rng.uniform(0.05, 2.0)),
        arrival_rate=float(rng.uniform(20.0, 100.0)),
    )


def _loop_optimum(device: DeviceModel, problem: ProblemConfig) -> Optional[float]:
    """Best objective by scanning every mode and batch size directly."""
    best: Optional[float] = None
    train_spec = (
        device.workload(problem.train_workload) if problem.train_workload else None
    )
    infer_spec = (
        device.workload(problem.infer_workload) if problem.infer_workload else None
    )
    sizes = infer_spec.eval_batch_sizes if infer_spec else (1,)
    for cores, cpu, gpu, mem in itertools.product(*device.grid.dimension_values()):
        mode = PowerMode(cores, cpu, gpu, mem)
        for bs in sizes:
            if problem.variant is Variant.TRAIN:
                assert train_spec is not None
                time, power = device.eval(mode, 1, train_spec)
                if power <= problem.power_budget and (best is None or time < best):
                    best = time
                continue
            assert infer_spec is not None
            assert problem.arrival_rate and problem.latency_budget
            rate = problem.arrival_rate
            t_in, p_in = device.eval(mode, bs, infer_spec)
            latency = (bs - 1) / rate + t_in
            if latency > problem.latency_budget or t_in > bs / rate + 1e-12:
                continue
            if problem.variant is Variant.INFER:
                if p_in <= problem.power_budget and (best is None or latency < best):
                    best = latency
                continue
            assert train_spec is not None
            t_tr, p_tr = device.eval(mode, 1, train_spec)
            if max(p_tr, p_in) > problem.power_budget:
                continue
            cycle = bs / rate
            throughput = math.floor((cycle - t_in) / t_tr + 1e-9) / cycle
            if best is None or throughput > best:
                best = throughput
    return best


@pytest.mark.parametrize("index", range(60))
def test_oracle_matches_nested_loops_on_random_problems(
    small_device: DeviceModel, index: int
) -> None:
    """Test the optimum of random problems of every variant against plain loops."""
    problem = _random_problem(index)
    expected = _loop_optimum(small_device, problem)
    solution = optimal_oracle(GroundTruth(small_device), problem)
    if expected is None:
        assert solution is None
        return
    assert solution is not None
    assert solution.objective == pytest.approx(expected, rel=1e-9, abs=1e-12)
    assert solution.power <= problem.power_budget
