"""Offline recommender evaluation with feedback-loop bias correction.

The library scores recommenders on timestamped interaction data by the
leave-one-out procedure, simulates the marginal drift that recommendation
campaigns cause, and corrects the induced evaluation bias by fitting
positive per-item weights so that a later weighted item marginal matches a
frozen reference marginal.
"""

from .core import (
    InteractionEvent,
    InteractionLog,
    ItemDistribution,
    ProbabilityModel,
    Snapshot,
    WeightVector,
    build_snapshot,
    item_marginal,
    pairwise_joint,
    weighted_conditional,
)
from .debias import (
    ActiveSet,
    DebiasTarget,
    OptimizerConfig,
    OptimizerReport,
    kl_divergence,
    kl_gradient,
    kl_lower_bound,
    optimize_weights,
    select_active_set,
)
from .errors import (
    DataFileError,
    EmptySnapshotError,
    InfeasibleConfigError,
    ItemNotInProfileError,
    NoProgressError,
    RewevalError,
    SupportMismatchError,
    UnknownItemError,
    UnknownUserError,
)
from .evaluation import (
    QUALITY_FUNCTIONS,
    ConstantRecommender,
    EvalConfig,
    EvalResult,
    Recommender,
    constant_score,
    evaluate,
    hit_in_top_k,
    inverse_rank,
    remove_item,
    timeline_evaluate,
)
from .simworld import (
    S1_CAMPAIGN_ITEMS,
    CampaignConfig,
    PopulationConfig,
    ScenarioConfig,
    build_scenario,
    generate_population,
    run_campaign,
    scenario_s1,
)
from . import charts, io

__version__ = "0.1.0"

__all__ = [
    "ActiveSet",
    "CampaignConfig",
    "ConstantRecommender",
    "DataFileError",
    "DebiasTarget",
    "EmptySnapshotError",
    "EvalConfig",
    "EvalResult",
    "InfeasibleConfigError",
    "InteractionEvent",
    "InteractionLog",
    "ItemDistribution",
    "ItemNotInProfileError",
    "NoProgressError",
    "OptimizerConfig",
    "OptimizerReport",
    "PopulationConfig",
    "ProbabilityModel",
    "QUALITY_FUNCTIONS",
    "Recommender",
    "RewevalError",
    "S1_CAMPAIGN_ITEMS",
    "ScenarioConfig",
    "Snapshot",
    "SupportMismatchError",
    "UnknownItemError",
    "UnknownUserError",
    "WeightVector",
    "build_scenario",
    "build_snapshot",
    "constant_score",
    "evaluate",
    "generate_population",
    "hit_in_top_k",
    "inverse_rank",
    "item_marginal",
    "kl_divergence",
    "kl_gradient",
    "kl_lower_bound",
    "optimize_weights",
    "pairwise_joint",
    "remove_item",
    "run_campaign",
    "scenario_s1",
    "select_active_set",
    "timeline_evaluate",
    "weighted_conditional",
]
