"""Influence measures for black-box classifiers over finite and continuous feature spaces."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ConflictingLabel,
    EnumerationCapExceeded,
    Feature,
    FeatureSpace,
    InfluenceError,
    InvalidProfile,
    InvalidSpace,
    LabeledDataset,
    MixedValueKinds,
    NotABijection,
    UnknownState,
    build_dataset,
    build_space,
    full_dataset,
    is_dummy,
    neighbor_groups,
    permute_feature_states,
    permute_features,
    singleton_dataset,
)
from .distances import cosine_distance, get_distance  # noqa: E402
from .estimators import Estimate, EstimatorConfig, sample_chi, sample_chi_distance  # noqa: E402
from .games import TUGame, banzhaf, dataset_to_game, game_to_dataset, shapley, swing_count  # noqa: E402
from .linear import (  # noqa: E402
    LinearClassifier,
    check_weight_monotonicity,
    chi_linear_1d_closed,
    chi_linear_2d_closed,
    chi_linear_grid,
    chi_linear_mc,
)
from .measures import (  # noqa: E402
    WeightFunction,
    chi,
    chi_distance,
    chi_normalized,
    chi_state,
    chi_weighted,
    chi_weighted_conditional,
    chi_weighted_product_form,
    chi_win_loss_form,
    influence_report,
    stats_report,
    zeta_state,
)

__all__ = [
    "ConflictingLabel",
    "EnumerationCapExceeded",
    "Estimate",
    "EstimatorConfig",
    "Feature",
    "FeatureSpace",
    "InfluenceError",
    "InvalidProfile",
    "InvalidSpace",
    "LabeledDataset",
    "LinearClassifier",
    "MixedValueKinds",
    "NotABijection",
    "TUGame",
    "UnknownState",
    "WeightFunction",
    "banzhaf",
    "build_dataset",
    "build_space",
    "check_weight_monotonicity",
    "chi",
    "chi_distance",
    "chi_linear_1d_closed",
    "chi_linear_2d_closed",
    "chi_linear_grid",
    "chi_linear_mc",
    "chi_normalized",
    "chi_state",
    "chi_weighted",
    "chi_weighted_conditional",
    "chi_weighted_product_form",
    "chi_win_loss_form",
    "cosine_distance",
    "dataset_to_game",
    "full_dataset",
    "game_to_dataset",
    "get_distance",
    "influence_report",
    "is_dummy",
    "neighbor_groups",
    "permute_feature_states",
    "permute_features",
    "sample_chi",
    "sample_chi_distance",
    "shapley",
    "singleton_dataset",
    "stats_report",
    "swing_count",
    "zeta_state",
]
