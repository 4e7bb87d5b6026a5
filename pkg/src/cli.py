"""Command-line entry point: ``edgetune <command> [options]``."""
import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import pandas as pd

from .core.calibration import DEFAULT_TOLERANCE, Anchor, calibrate
from .core.device import DeviceModel
from .core.errors import ConfigError, EdgeTuneError
from .core.harness import SweepSpec, run_sweep, solve_one
from .core.oracle import GroundTruth, recheck
from .core.power_mode import DIMENSIONS, PowerMode
from .core.problem import ProblemConfig, Variant
from .core.scheduler import SimConfig
from .core.scheduler.replay import check_strategy, replay_dynamic
from .core.scheduler.trace import (
    ARRIVALS,
    DEFAULT_HORIZON_S,
    DEFAULT_SEGMENT_S,
    DETERMINISTIC,
    gen_trace,
)
from .core.surrogate import TrainConfig
from .core.workload import load_workloads, save_workloads

logger = logging.getLogger(__name__)

SEED_ENV = "EDGETUNE_SEED"
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_SOLUTION = 2

ANCHOR_COLUMNS = [*DIMENSIONS, "batch_size", "time_s", "power_w"]


def default_seed() -> int:
    """Seed from ``EDGETUNE_SEED``, or 0.

    Raises:
        ConfigError: If the variable is set but not an integer
    """
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from exc


def _emit(payload: Dict[str, object], out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2, default=str)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    print(text)


def _device(args: argparse.Namespace) -> DeviceModel:
    device = DeviceModel()
    if getattr(args, "workloads_file", None):
        device = device.with_workloads(load_workloads(args.workloads_file))
    return device


def _problem(args: argparse.Namespace) -> ProblemConfig:
    variant = Variant(args.variant)
    train = infer = None
    if variant is Variant.TRAIN:
        train = args.workload
    elif variant is Variant.INFER:
        infer = args.workload
    else:
        train, infer = args.workload, args.infer_workload
    try:
        return ProblemConfig(
            variant,
            args.power,
            train_workload=train,
            infer_workload=infer,
            latency_budget=args.latency,
            arrival_rate=args.rate,
            background_batch_size=args.background_batch_size,
            latency_guard=args.latency_guard,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _check_workloads(device: DeviceModel, problem: ProblemConfig) -> None:
    for name in (problem.train_workload, problem.infer_workload):
        if name is not None and name not in device.workloads:
            raise ConfigError(f"Unknown workload {name!r}")


def _solve(args: argparse.Namespace, strategy: str) -> int:
    device = _device(args)
    problem = _problem(args)
    _check_workloads(device, problem)
    train = TrainConfig(epochs=args.nn_epochs) if args.nn_epochs else None
    run = solve_one(problem, strategy, device, args.seed, train_config=train)
    if run.trace is not None and args.trace_out:
        run.trace.write(args.trace_out)
    payload: Dict[str, object] = {
        "problem": problem.to_dict(),
        "strategy": strategy,
        "trials_used": run.trials,
        "solution": run.solution.to_dict() if run.solution else None,
    }
    if run.solution is None:
        payload["status"] = "no solution"
        _emit(payload, args.out)
        return EXIT_NO_SOLUTION
    actual = recheck(GroundTruth(device), problem, run.solution)
    solved = actual.feasible and not run.violated
    payload["status"] = "solved" if solved else "violated"
    payload["check"] = {
        "feasible": actual.feasible,
        "power_w": actual.power,
        "time_s": actual.time,
        "latency_s": actual.latency,
    }
    _emit(payload, args.out)
    return EXIT_OK if solved else EXIT_NO_SOLUTION


def cmd_solve(args: argparse.Namespace) -> int:
    return _solve(args, args.strategy)


def cmd_oracle(args: argparse.Namespace) -> int:
    return _solve(args, "optimal")


def cmd_sweep(args: argparse.Namespace) -> int:
    data: Dict[str, object] = {}
    if args.config:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if args.strategies:
        data["strategies"] = args.strategies.split(",")
    if args.workers:
        data["workers"] = args.workers
    if args.full:
        data["full"] = True
    if args.seeds:
        data["seeds"] = [int(s) for s in args.seeds.split(",")]
    elif "seeds" not in data:
        data["seeds"] = [args.seed]
    spec = SweepSpec.from_dict(data)
    report = run_sweep(spec, _device(args), args.out_dir)
    print(json.dumps(report.summary, indent=2, default=str))
    return EXIT_OK


def cmd_trace_replay(args: argparse.Namespace) -> int:
    check_strategy(args.strategy)
    device = _device(args)
    variant = Variant.CONCURRENT if args.background_workload else Variant.INFER
    problem = ProblemConfig(
        variant,
        args.power,
        train_workload=args.background_workload,
        infer_workload=args.workload,
        latency_budget=args.latency,
        arrival_rate=1.0,
        background_batch_size=args.background_batch_size,
    )
    _check_workloads(device, problem)
    train = TrainConfig(epochs=args.nn_epochs) if args.nn_epochs else None
    kind = "file" if args.trace_file else "poisson"
    target = (args.low, args.high) if kind == "file" else None
    trace = gen_trace(
        kind,
        mean=args.mean,
        horizon=args.horizon,
        segment=args.segment,
        seed=args.seed,
        path=args.trace_file,
        target_range=target,
    ).with_arrivals(args.arrivals)
    result = replay_dynamic(
        args.strategy,
        trace,
        problem,
        device,
        sim_config=SimConfig(seed=args.seed),
        seed=args.seed,
        train_config=train,
    )
    if args.requests_csv:
        result.sim.write_requests(args.requests_csv)
    _emit(result.to_dict(), args.out)
    if result.solved_segments < len(result.segments):
        return EXIT_NO_SOLUTION
    return EXIT_OK


def _read_anchors(path: str) -> List[Anchor]:
    frame = pd.read_csv(path)
    missing = [c for c in ANCHOR_COLUMNS if c not in frame.columns]
    if missing:
        raise ConfigError(f"Anchor file {path} lacks columns {missing}")
    return [
        Anchor(
            PowerMode(*(int(row[d]) for d in DIMENSIONS)),
            int(row["batch_size"]),
            float(row["time_s"]),
            float(row["power_w"]),
        )
        for _, row in frame.iterrows()
    ]


def cmd_calibrate(args: argparse.Namespace) -> int:
    spec = calibrate(
        _read_anchors(args.anchors), args.name, args.kind, tolerance=args.tolerance
    )
    specs = [spec]
    if args.out and Path(args.out).exists():
        specs = [s for s in load_workloads(args.out) if s.name != spec.name] + specs
    if args.out:
        save_workloads(specs, args.out)
    print(json.dumps(spec.to_dict(), indent=2))
    return EXIT_OK


def cmd_gen_trace(args: argparse.Namespace) -> int:
    trace = gen_trace(
        args.kind,
        mean=args.mean,
        horizon=args.horizon,
        segment=args.segment,
        seed=args.seed,
        path=args.path,
        target_range=(args.low, args.high),
    )
    if args.out:
        trace.to_csv(args.out)
    else:
        trace.to_frame().to_csv(sys.stdout, index=False)
    return EXIT_OK


def _add_problem_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--variant", choices=[v.value for v in Variant], default=Variant.TRAIN.value
    )
    parser.add_argument("--power", type=float, required=True, help="Power budget (W)")
    parser.add_argument(
        "--workload",
        required=True,
        help="Training workload, or the inference workload for --variant infer",
    )
    parser.add_argument(
        "--infer-workload", help="Latency-bound workload of a concurrent pair"
    )
    parser.add_argument("--latency", type=float, help="Latency budget (s)")
    parser.add_argument("--rate", type=float, help="Arrival rate (requests/s)")
    parser.add_argument("--background-batch-size", type=int, default=16)
    parser.add_argument("--latency-guard", action="store_true")
    parser.add_argument("--nn-epochs", type=int)
    parser.add_argument("--trace-out", help="Write the search trace as JSON lines")
    parser.add_argument("--out", help="Also write the JSON result here")


def build_parser(seed: int = 0) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgetune",
        description="Power-mode and batch-size selection for edge DNN workloads",
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
    )
    parser.add_argument("--seed", type=int, default=seed)
    parser.add_argument("--workloads-file", help="Extra workload specs (JSON)")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="Solve one problem with a strategy")
    _add_problem_args(solve)
    solve.add_argument("--strategy", default="gmd")
    solve.set_defaults(func=cmd_solve)

    oracle = sub.add_parser("oracle", help="Exhaustive optimum for one problem")
    _add_problem_args(oracle)
    oracle.set_defaults(func=cmd_oracle)

    sweep = sub.add_parser("sweep", help="Run a sweep and write reports")
    sweep.add_argument("--config", help="JSON file with sweep fields")
    sweep.add_argument("--strategies", help="Comma-separated strategy names")
    sweep.add_argument("--seeds", help="Comma-separated seeds")
    sweep.add_argument("--workers", type=int)
    sweep.add_argument("--full", action="store_true", help="Disable subsampling")
    sweep.add_argument("--out-dir", default="results")
    sweep.set_defaults(func=cmd_sweep)

    replay = sub.add_parser("trace-replay", help="Replay a dynamic-rate trace")
    replay.add_argument(
        "--strategy", default="gmd", help="gmd, als, optimal, rnd<k> or nn<k>"
    )
    replay.add_argument("--workload", default="resnet-infer")
    replay.add_argument(
        "--background-workload", help="Training workload to interleave, if any"
    )
    replay.add_argument("--background-batch-size", type=int, default=16)
    replay.add_argument("--nn-epochs", type=int)
    replay.add_argument("--power", type=float, default=40.0)
    replay.add_argument("--latency", type=float, default=0.1)
    replay.add_argument("--trace-file", help="CSV with t_start_s,rate_rps")
    replay.add_argument("--mean", type=float, default=60.0)
    replay.add_argument("--horizon", type=float, default=DEFAULT_HORIZON_S)
    replay.add_argument("--segment", type=float, default=DEFAULT_SEGMENT_S)
    replay.add_argument("--low", type=float, default=30.0)
    replay.add_argument("--high", type=float, default=90.0)
    replay.add_argument("--arrivals", choices=ARRIVALS, default=DETERMINISTIC)
    replay.add_argument("--requests-csv", help="Write per-request latencies")
    replay.add_argument("--out", help="Also write the JSON result here")
    replay.set_defaults(func=cmd_trace_replay)

    cal = sub.add_parser("calibrate", help="Fit a workload to measured anchors")
    cal.add_argument("--anchors", required=True, help="CSV of measured anchors")
    cal.add_argument("--name", required=True)
    cal.add_argument("--kind", choices=["train", "infer"], default="infer")
    cal.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    cal.add_argument("--out", help="Workload JSON file to add the fit to")
    cal.set_defaults(func=cmd_calibrate)

    trace = sub.add_parser("gen-trace", help="Generate an arrival-rate trace")
    trace.add_argument("--kind", choices=["poisson", "file"], default="poisson")
    trace.add_argument("--mean", type=float, default=60.0)
    trace.add_argument("--horizon", type=float, default=DEFAULT_HORIZON_S)
    trace.add_argument("--segment", type=float, default=DEFAULT_SEGMENT_S)
    trace.add_argument("--path", help="Source CSV for --kind file")
    trace.add_argument("--low", type=float, default=30.0)
    trace.add_argument("--high", type=float, default=90.0)
    trace.add_argument("--out", help="Output CSV (stdout when omitted)")
    trace.set_defaults(func=cmd_gen_trace)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit status."""
    try:
        parser = build_parser(default_seed())
    except ConfigError as exc:
        print(f"edgetune: {exc}", file=sys.stderr)
        return EXIT_ERROR
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        return int(args.func(args))
    except (EdgeTuneError, OSError, ValueError) as exc:
        print(f"edgetune: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
