"""Per-configuration metrics against the optimum, and their aggregates."""
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..oracle import GroundTruth, recheck
from ..problem import ProblemConfig, Solution, Variant, objective

COLUMNS = [
    "strategy",
    "variant",
    "p_budget_w",
    "lat_budget_s",
    "arrival_rps",
    "workload",
    "solved",
    "excess_time_pct",
    "tput_loss_pct",
    "power_delta_w",
    "trials",
]


def workload_label(problem: ProblemConfig) -> str:
    """``train``, ``infer`` or ``throughput+latency`` workload names."""
    if problem.variant is Variant.TRAIN:
        return str(problem.train_workload)
    if problem.variant is Variant.INFER:
        return str(problem.infer_workload)
    return f"{problem.train_workload}+{problem.infer_workload}"


@dataclass(frozen=True)
class MetricRow:
    """One strategy's outcome on one problem configuration."""

    strategy: str
    variant: str
    p_budget_w: float
    lat_budget_s: Optional[float]
    arrival_rps: Optional[float]
    workload: str
    solved: bool
    excess_time_pct: Optional[float]
    """Training time or peak latency above the optimum; only set when both solved."""
    tput_loss_pct: Optional[float]
    """Background throughput below the optimum; only set when both solved."""
    power_delta_w: Optional[float]
    """Re-checked power minus the budget; positive values are violations."""
    trials: int
    oracle_solved: bool = True

    def to_dict(self) -> Dict[str, object]:
        """The stable ``rows.csv`` columns."""
        row = asdict(self)
        return {column: row[column] for column in COLUMNS}


def _pct(value: float, reference: float) -> float:
    if reference == 0:
        return 0.0 if value == reference else 100.0
    return 100.0 * value / reference


def compute(
    strategy: str,
    problem: ProblemConfig,
    solution: Optional[Solution],
    optimum: Optional[Solution],
    truth: GroundTruth,
    trials: int,
    violated: bool = False,
) -> MetricRow:
    """Re-check ``solution`` on the device and compare it with ``optimum``.

    ``violated`` marks a choice the strategy made from predictions that broke a
    budget on the device; it counts as unsolved.
    """
    excess = loss = delta = None
    solved = False
    if solution is not None:
        actual = recheck(truth, problem, solution)
        delta = actual.power - problem.power_budget
        solved = actual.feasible and not violated
        if solved and optimum is not None:
            value = objective(problem, actual)
            if problem.variant.is_concurrent:
                loss = _pct(optimum.objective - value, optimum.objective)
            else:
                excess = _pct(value - optimum.objective, optimum.objective)
    return MetricRow(
        strategy=strategy,
        variant=problem.variant.value,
        p_budget_w=problem.power_budget,
        lat_budget_s=problem.latency_budget,
        arrival_rps=problem.arrival_rate,
        workload=workload_label(problem),
        solved=solved,
        excess_time_pct=excess,
        tput_loss_pct=loss,
        power_delta_w=delta,
        trials=trials,
        oracle_solved=optimum is not None,
    )


def to_frame(rows: Sequence[MetricRow], full: bool = False) -> pd.DataFrame:
    """Rows as a frame; ``full`` keeps the oracle flag used for aggregation."""
    columns = COLUMNS + ["oracle_solved"] if full else COLUMNS
    return pd.DataFrame([asdict(r) for r in rows], columns=columns)


def _stats(values: pd.Series) -> Dict[str, Optional[float]]:
    values = values.dropna()
    if values.empty:
        return {"median": None, "q1": None, "q3": None, "iqr": None}
    q1, median, q3 = np.percentile(values.to_numpy(dtype=float), [25, 50, 75])
    return {
        "median": float(median),
        "q1": float(q1),
        "q3": float(q3),
        "iqr": float(q3 - q1),
    }


def summarize(rows: Sequence[MetricRow]) -> List[Dict[str, object]]:
    """Median, IQR and percentage solved per strategy and workload.

    The percentage solved counts only configurations the oracle could solve.
    """
    frame = to_frame(rows, full=True)
    summary: List[Dict[str, object]] = []
    if frame.empty:
        return summary
    for (strategy, workload), group in frame.groupby(
        ["strategy", "workload"], sort=True
    ):
        solvable = group[group["oracle_solved"]]
        solved = int(solvable["solved"].sum())
        summary.append(
            {
                "strategy": strategy,
                "workload": workload,
                "configs": int(len(group)),
                "solvable": int(len(solvable)),
                "pct_solved": 100.0 * solved / len(solvable) if len(solvable) else None,
                "power_violations": int((group["power_delta_w"] > 1e-9).sum()),
                "mean_trials": float(group["trials"].mean()),
                "excess_time_pct": _stats(group["excess_time_pct"]),
                "tput_loss_pct": _stats(group["tput_loss_pct"]),
            }
        )
    return summary
