"""Inference over the growth histories of trees observed as a single snapshot.

The package computes, for a static tree, exact per-node arrival-time
posteriors, uniform samples of feasible growth histories (optionally bridging
between two snapshots), attachment-kernel fits, and growth-model comparisons.
"""

from .counts import SeedDistribution, edge_log_counts, seed_probabilities, total_log_histories
from .inference import (
    BayesFactor,
    KernelPosterior,
    ReweightedTimes,
    TrajectoryStat,
    default_gamma_grid,
    degree_baseline_times,
    interpolate_statistic,
    kernel_posterior,
    kernel_posterior_from_history,
    log_bayes_factor,
    reweighted_arrival_times,
)
from .models import (
    KernelAttachment,
    KernelFamily,
    RedirectionAttachment,
    UniformAttachment,
    generate,
    kernel_log_likelihood_grid,
    log_likelihood,
    parse_model_spec,
)
from .posterior import (
    ArrivalPosterior,
    arrival_posterior,
    credible_intervals,
    h_exclude,
    posterior_mean_times,
)
from .sampler import (
    BoundarySampler,
    BridgeSampler,
    DegenerateWeightsError,
    EmptyBoundaryError,
    HistorySampler,
    InitialNotConnectedError,
    InitialNotSubtreeError,
    sample_bridge,
    sample_histories,
    sample_history,
)
from .tree import (
    DuplicateEdgeError,
    History,
    InconsistentHistoryError,
    MalformedLineError,
    NotATreeError,
    RootedView,
    SelfLoopError,
    Tree,
    TreeHistoryError,
    build_tree,
    is_consistent,
    parse_edge_list,
    permute_nodes,
    root_at,
    serialize_edge_list,
)

__version__ = "0.1.0"
