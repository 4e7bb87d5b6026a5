"""Search strategies that pick a power mode and batch size for a problem."""

from .als import (
    AlsConfig,
    AlsResult,
    Quadrant,
    QuadrantSpec,
    RoundReport,
    als_concurrent,
    als_for_problem,
    als_infer,
    als_train,
    pick_diverse,
)
from .baselines import (
    BaselineConfig,
    NnOutcome,
    binary_budget,
    binary_search,
    nn_k,
    random_samples,
    rnd_k,
)
from .dimension_search import DimensionSearch, SlopeModel, SlopeState
from .gmd import GmdConfig, gmd_concurrent, gmd_infer, gmd_solve, gmd_train
from .probe import Observation, ProblemProbe, SearchTrace, TraceEvent
from .samples import SampleSet, kind_for

__all__ = [
    "AlsConfig",
    "AlsResult",
    "BaselineConfig",
    "DimensionSearch",
    "GmdConfig",
    "NnOutcome",
    "Observation",
    "ProblemProbe",
    "Quadrant",
    "QuadrantSpec",
    "RoundReport",
    "SampleSet",
    "SearchTrace",
    "SlopeModel",
    "SlopeState",
    "TraceEvent",
    "als_concurrent",
    "als_for_problem",
    "als_infer",
    "als_train",
    "binary_budget",
    "binary_search",
    "gmd_concurrent",
    "gmd_infer",
    "gmd_solve",
    "gmd_train",
    "kind_for",
    "nn_k",
    "pick_diverse",
    "random_samples",
    "rnd_k",
]
