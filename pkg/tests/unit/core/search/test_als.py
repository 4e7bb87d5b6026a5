"""Tests for the active-learning sampler."""
import io

import pytest

from src.core.device import DeviceModel
from src.core.oracle import GroundTruth
from src.core.pareto import ParetoPoint
from src.core.power_mode import PowerMode
from src.core.problem import ProblemConfig, Variant
from src.core.search import (
    AlsConfig,
    Quadrant,
    QuadrantSpec,
    als_concurrent,
    als_for_problem,
    als_infer,
    als_train,
    pick_diverse,
)
from src.core.surrogate import TrainConfig

MODE = PowerMode(12, 2200, 1300, 3200)


def test_default_schedules() -> None:
    """Test the per-kind profile caps of the default schedules."""
    assert AlsConfig.for_train().max_profiles("train") == 50
    assert AlsConfig.for_infer().max_profiles("infer") == 145
    assert AlsConfig.for_concurrent().max_profiles("concurrent") == 145
    with pytest.raises(ValueError):
        AlsConfig(initial=0)


def test_quadrant_halves() -> None:
    """Test latency 50-1000 ms splits at 525 ms."""
    quadrants = QuadrantSpec((0.05, 1.0), (30.0, 90.0)).quadrants()
    assert [q.name for q in quadrants] == [
        "low-latency/low-rate",
        "low-latency/high-rate",
        "high-latency/low-rate",
        "high-latency/high-rate",
    ]
    assert quadrants[0].latency == pytest.approx((0.05, 0.525))
    assert quadrants[3].latency == pytest.approx((0.525, 1.0))
    assert quadrants[1].rate == pytest.approx((60.0, 90.0))
    with pytest.raises(ValueError):
        QuadrantSpec((1.0, 0.05), (30.0, 90.0))


def test_quadrant_admits_lowest_rate() -> None:
    """Test a configuration sustainable only at the lowest rate is kept."""
    quadrant = Quadrant("q", (0.05, 1.0), (32.0, 64.0))
    assert quadrant.admits(0.125, 4)
    assert not quadrant.admits(0.13, 4)
    # Fast enough but too slow for the latency half.
    assert not Quadrant("q", (0.05, 0.1), (30.0, 60.0)).admits(0.2, 16)


def test_pick_diverse() -> None:
    """Test picks land farthest from the powers already observed."""
    observed = [14.7, 15.8, 16.6, 19.7, 21.6, 22.8, 28.0, 28.1, 38.0, 49.3]
    candidates = [ParetoPoint(MODE, 1, p, 1.0) for p in (15.0, 25.0, 31.5, 46.4, 19.8)]
    picks = pick_diverse(candidates, observed, 3)
    assert [p.power for p in picks] == [31.5, 46.4, 25.0]
    # Fewer candidates than requested are all taken.
    assert len(pick_diverse(candidates[:2], observed, 5)) == 2


def test_als_train(small_device: DeviceModel, fast_train: TrainConfig) -> None:
    """Test training ALS stays within its cap and its front never violates."""
    config = AlsConfig(initial=10, per_round=3, rounds=3, train=fast_train)
    result = als_train("resnet-train", small_device, config)
    assert 10 <= result.trials_used <= 19
    assert len(result.samples) == result.trials_used
    assert len(result.rounds) <= 3

    truth = GroundTruth(small_device)
    for budget in (15.0, 25.0, 35.0, 60.0):
        problem = ProblemConfig(Variant.TRAIN, budget, train_workload="resnet-train")
        solution = result.solve(problem)
        if solution is not None:
            assert solution.power <= budget
            assert truth.assess(problem, solution.mode, 1).feasible
            assert solution.trials_used == result.trials_used

    buffer = io.StringIO()
    result.write_reports(buffer)
    assert len(buffer.getvalue().splitlines()) == len(result.rounds)


def test_als_is_deterministic(small_device: DeviceModel, fast_train: TrainConfig) -> None:
    """Test equal seeds profile the same configurations."""
    config = AlsConfig(initial=10, per_round=2, rounds=1, train=fast_train)
    first = als_train("yolo-train", small_device, config, seed=4)
    second = als_train("yolo-train", small_device, config, seed=4)
    assert [s.mode for s in first.samples] == [s.mode for s in second.samples]


def test_als_infer_reuses_samples(
    small_device: DeviceModel, fast_train: TrainConfig
) -> None:
    """Test new problem configurations are answered without new profiles."""
    config = AlsConfig(initial=10, per_round=2, rounds=1, train=fast_train)
    result = als_infer("resnet-infer", small_device, config)
    # Two modes per batch size, then four quadrants of two picks each.
    assert result.trials_used <= 18
    assert {s.batch_size for s in result.samples} == {1, 4, 16, 32, 64}

    before = result.trials_used
    truth = GroundTruth(small_device)
    for rate in (30.0, 50.0, 90.0):
        problem = ProblemConfig(
            Variant.INFER,
            40.0,
            infer_workload="resnet-infer",
            latency_budget=0.5,
            arrival_rate=rate,
        )
        solution = result.solve(problem)
        if solution is not None:
            assert truth.assess(problem, solution.mode, solution.batch_size).feasible
    assert result.trials_used == before


def test_als_extend(small_device: DeviceModel, fast_train: TrainConfig) -> None:
    """Test extending to a new rate range only profiles new picks."""
    config = AlsConfig(initial=10, per_round=2, rounds=1, train=fast_train)
    result = als_infer("resnet-infer", small_device, config)
    extended = result.extend(small_device, (90.0, 99.0))
    assert extended.trials_used - result.trials_used <= 8
    known = {(s.mode, s.batch_size) for s in extended.samples}
    assert all((s.mode, s.batch_size) in known for s in result.samples)
    assert extended.config.rate_range == (90.0, 99.0)

    train = als_train(
        "resnet-train",
        small_device,
        AlsConfig(initial=10, per_round=2, rounds=1, train=fast_train),
    )
    with pytest.raises(ValueError):
        train.extend(small_device, (90.0, 99.0))


def test_als_concurrent(small_device: DeviceModel, fast_train: TrainConfig) -> None:
    """Test concurrent ALS answers throughput problems from observed pairs."""
    config = AlsConfig(
        initial=25,
        per_round=2,
        rounds=1,
        latency_range=(0.5, 2.0),
        rate_range=(30.0, 120.0),
        train=fast_train,
    )
    result = als_concurrent("resnet-train", "mobilenet-infer", small_device, config)
    assert result.trials_used <= 33
    assert result.pairs()

    problem = ProblemConfig(
        Variant.CONCURRENT,
        45.0,
        train_workload="resnet-train",
        infer_workload="mobilenet-infer",
        latency_budget=1.0,
        arrival_rate=60.0,
    )
    front = result.front_for(problem)
    assert front is not None and front.sense == "maximize"
    solution = result.solve(problem)
    if solution is not None:
        check = GroundTruth(small_device).assess(
            problem, solution.mode, solution.batch_size
        )
        assert check.feasible


def test_als_for_problem_dispatch(
    small_device: DeviceModel, fast_train: TrainConfig
) -> None:
    """Test the sample kind follows the problem variant."""
    problem = ProblemConfig(Variant.TRAIN, 30.0, train_workload="lstm-train")
    config = AlsConfig(initial=10, per_round=2, rounds=1, train=fast_train)
    result = als_for_problem(problem, small_device, config)
    assert result.kind == "train"
    with pytest.raises(ValueError):
        result.check(
            ProblemConfig(Variant.TRAIN, 30.0, train_workload="resnet-train")
        )


def test_hypervolume_never_shrinks(
    small_device: DeviceModel, fast_train: TrainConfig
) -> None:
    """Test the observed front only gains area from round to round."""
    train = als_train(
        "bert-train",
        small_device,
        AlsConfig(initial=10, per_round=3, rounds=4, train=fast_train),
        seed=2,
    )
    infer = als_infer(
        "resnet-infer",
        small_device,
        AlsConfig(initial=10, per_round=2, rounds=2, train=fast_train),
        seed=2,
    )
    for result in (train, infer):
        volumes = [report.hypervolume for report in result.rounds]
        assert volumes
        assert all(v > 0 for v in volumes)
        assert all(b >= a - 1e-12 for a, b in zip(volumes, volumes[1:]))
