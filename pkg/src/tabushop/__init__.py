"""Job shop tabu search with a logistic guidance layer and comparison tools."""

from .instances import (
    Instance,
    InfeasibleReferenceError,
    Operation,
    ParseError,
    ReferenceSolution,
    load_instance,
    parse_reference,
    parse_standard,
    parse_taillard,
    reference_to_text,
    to_standard_text,
    to_taillard_text,
)
from .schedule import (
    INFEASIBLE,
    CriticalBlock,
    Move,
    ScheduleTimes,
    Solution,
    apply_move,
    critical_blocks,
    evaluate,
    makespan_of,
    n4_moves,
    random_solution,
)
from .encoding import PairIndexSet, build_index_set, changed_components, encode
from .learning import (
    FitResult,
    LogisticModel,
    ObjectiveBounds,
    TrainingTable,
    accuracy,
    backbone_upper_bound,
    build_training_table,
    fit_theta,
    observe,
    predict,
)
from .tabu import (
    NeighborEval,
    RunParams,
    StepOutcome,
    TabuState,
    TenureRange,
    neighbor_expiration,
    run_tabu,
    select_next,
    tabu_step,
)
from .gta import GtaParams, ThetaSchedule, run_gta, tenure_for, theta_at
from .dominance import (
    BootstrapCI,
    DominanceCurve,
    PerformanceSample,
    aggregate,
    bootstrap_ci,
    dominance_curve,
    win_prob,
)
from .rng import SplitMix64

__version__ = "0.1.0"

__all__ = [
    "INFEASIBLE",
    "BootstrapCI",
    "CriticalBlock",
    "DominanceCurve",
    "FitResult",
    "GtaParams",
    "InfeasibleReferenceError",
    "Instance",
    "LogisticModel",
    "Move",
    "NeighborEval",
    "ObjectiveBounds",
    "Operation",
    "PairIndexSet",
    "ParseError",
    "PerformanceSample",
    "ReferenceSolution",
    "RunParams",
    "ScheduleTimes",
    "Solution",
    "SplitMix64",
    "StepOutcome",
    "TabuState",
    "TenureRange",
    "ThetaSchedule",
    "TrainingTable",
    "accuracy",
    "aggregate",
    "apply_move",
    "backbone_upper_bound",
    "bootstrap_ci",
    "build_index_set",
    "build_training_table",
    "changed_components",
    "critical_blocks",
    "dominance_curve",
    "encode",
    "evaluate",
    "fit_theta",
    "load_instance",
    "makespan_of",
    "n4_moves",
    "neighbor_expiration",
    "observe",
    "parse_reference",
    "parse_standard",
    "parse_taillard",
    "predict",
    "random_solution",
    "reference_to_text",
    "run_gta",
    "run_tabu",
    "select_next",
    "tabu_step",
    "tenure_for",
    "theta_at",
    "to_standard_text",
    "to_taillard_text",
    "win_prob",
]
