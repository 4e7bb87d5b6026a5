"""Tests for problem configurations, assessment and interleave planning."""
import pytest

from src.core.device import ProfileSample
from src.core.power_mode import PowerMode
from src.core.problem import (
    ProblemConfig,
    Solution,
    Variant,
    assess,
    best_of,
    objective,
)
from src.core.scheduler import (
    is_sustainable,
    peak_latency,
    plan_concurrent_infer,
    plan_inference,
    plan_interleave,
)

MODE = PowerMode(12, 2200, 1300, 3200)


def test_interleave_plan() -> None:
    """Test twelve training minibatches fit the slack of a 64-item batch."""
    plan = plan_interleave(MODE, 64, 80.0, t_tr=0.05, t_in=0.2, p_tr=30.0, p_in=25.0)
    assert plan.feasible
    assert plan.tau == 12
    assert plan.cycle_time == pytest.approx(0.8)
    assert plan.throughput == pytest.approx(15.0)
    assert plan.latency == pytest.approx(63 / 80 + 0.2)
    assert plan.power == 30.0


def test_interleave_without_slack() -> None:
    """Test an inference time equal to the cycle leaves no room for training."""
    plan = plan_interleave(MODE, 16, 80.0, t_tr=0.05, t_in=0.2, p_tr=30.0, p_in=25.0)
    assert plan.feasible
    assert plan.tau == 0
    assert plan.throughput == 0.0


def test_interleave_unsustainable() -> None:
    """Test a too-slow inference yields an infeasible plan."""
    plan = plan_interleave(MODE, 8, 80.0, t_tr=0.05, t_in=0.2, p_tr=30.0, p_in=25.0)
    assert not plan.feasible
    assert plan.tau == 0
    assert not is_sustainable(8, 80.0, 0.2)

    with pytest.raises(ValueError):
        plan_interleave(MODE, 8, 80.0, t_tr=0.0, t_in=0.2, p_tr=30.0, p_in=25.0)


def test_single_request_batch_latency() -> None:
    """Test a batch of one waits for nothing but inference."""
    assert peak_latency(1, 50.0, 0.03) == pytest.approx(0.03)
    plan = plan_inference(MODE, 1, 50.0, 0.03, 20.0)
    assert plan.latency == pytest.approx(0.03)
    assert plan.power == 20.0
    assert plan.tau == 0


def test_concurrent_infer_plan() -> None:
    """Test non-urgent batches take the training slots."""
    urgent = ProfileSample(MODE, 64, 0.2, 25.0, "resnet-infer")
    background = ProfileSample(MODE, 16, 0.05, 28.0, "mobilenet-infer")
    plan = plan_concurrent_infer(urgent, background, 80.0)
    assert plan.tau == 12
    assert plan.items_per_second == pytest.approx(15.0 * 16)

    other = ProfileSample(PowerMode(4, 422, 115, 665), 16, 0.05, 10.0, "x")
    with pytest.raises(ValueError):
        plan_concurrent_infer(urgent, other, 80.0)


def test_problem_validation() -> None:
    """Test each variant requires its workloads and budgets."""
    with pytest.raises(ValueError):
        ProblemConfig(Variant.TRAIN, 30.0)
    with pytest.raises(ValueError):
        ProblemConfig(Variant.TRAIN, -1.0, train_workload="resnet-train")
    with pytest.raises(ValueError):
        ProblemConfig(Variant.INFER, 30.0, infer_workload="resnet-infer")
    with pytest.raises(ValueError):
        ProblemConfig(
            Variant.CONCURRENT,
            30.0,
            infer_workload="resnet-infer",
            latency_budget=0.1,
            arrival_rate=60.0,
        )
    problem = ProblemConfig("infer", 30.0, infer_workload="resnet-infer",
                            latency_budget=0.1, arrival_rate=60.0)
    assert problem.variant is Variant.INFER
    assert problem.with_arrival_rate(40.0).arrival_rate == 40.0


def test_throughput_batch_size() -> None:
    """Test only concurrent inference uses a background batch size."""
    concurrent = ProblemConfig(
        Variant.CONCURRENT_INFER,
        40.0,
        train_workload="mobilenet-infer",
        infer_workload="resnet-infer",
        latency_budget=0.5,
        arrival_rate=60.0,
        background_batch_size=32,
    )
    assert concurrent.throughput_batch_size == 32
    assert concurrent.variant.sense == "maximize"
    train = ProblemConfig(Variant.TRAIN, 40.0, train_workload="resnet-train")
    assert train.throughput_batch_size == 1
    assert train.variant.sense == "minimize"


def test_assess_infer() -> None:
    """Test inference assessment checks power, latency and sustainability."""
    problem = ProblemConfig(
        Variant.INFER, 30.0, infer_workload="w", latency_budget=0.5, arrival_rate=80.0
    )
    fits = assess(problem, MODE, 16, None, ProfileSample(MODE, 16, 0.1, 25.0, "w"))
    assert fits.feasible
    assert objective(problem, fits) == pytest.approx(15 / 80 + 0.1)

    too_hot = assess(problem, MODE, 16, None, ProfileSample(MODE, 16, 0.1, 35.0, "w"))
    assert not too_hot.feasible and not too_hot.power_ok

    too_slow = assess(problem, MODE, 16, None, ProfileSample(MODE, 16, 0.3, 20.0, "w"))
    assert not too_slow.sustainable


def test_latency_guard() -> None:
    """Test the guard tightens the latency budget by one training minibatch."""
    kwargs = dict(
        variant=Variant.CONCURRENT,
        power_budget=50.0,
        train_workload="t",
        infer_workload="i",
        latency_budget=1.0,
        arrival_rate=80.0,
    )
    train = ProfileSample(MODE, 1, 0.05, 30.0, "t")
    infer = ProfileSample(MODE, 64, 0.2, 25.0, "i")
    plain = assess(ProblemConfig(**kwargs), MODE, 64, train, infer)
    guarded = assess(ProblemConfig(latency_guard=True, **kwargs), MODE, 64, train, infer)
    # Peak latency 0.9875 s sits inside 1.0 s but not inside 0.95 s.
    assert plain.feasible
    assert not guarded.feasible


def test_best_of_tie_breaks() -> None:
    """Test equal objectives resolve to lower power."""
    problem = ProblemConfig(Variant.TRAIN, 40.0, train_workload="t")
    low = PowerMode(4, 422, 115, 665)
    a = assess(problem, MODE, 1, ProfileSample(MODE, 1, 0.1, 30.0, "t"), None)
    b = assess(problem, low, 1, ProfileSample(low, 1, 0.1, 20.0, "t"), None)
    c = assess(problem, MODE, 1, ProfileSample(MODE, 1, 0.05, 45.0, "t"), None)
    best = best_of(problem, [a, b, c])
    assert best is b
    assert best_of(problem, [c]) is None

    solution = Solution.from_assessment(problem, b, trials_used=3, strategy="gmd")
    assert solution.objective == 0.1
    assert solution.to_dict()["trials_used"] == 3
