"""Multi-view fuzzy clustering in a shared hidden space.

The package bundles one main algorithm (alternating fuzzy c-means in a
low-rank coefficient space shared by all views, with entropy-regularized
view weights), three baselines (plain fuzzy c-means, membership-coupled
per-view c-means, shared-coefficient matrix factorization), partition
quality metrics, rank-based significance tests, and a batch experiment
harness with a command line front end.
"""

from .cofkm import (
    CoFkmResult,
    CoFkmState,
    cofkm_fit,
    consensus_membership,
    heuristic_fuzzifier,
)
from .dataset import (
    MultiViewDataset,
    SyntheticSpec,
    generate_synthetic,
    load_multiview,
    normalize_minmax,
    save_multiview,
    synthetic_factorization,
)
from .errors import ConfigError, DataError, DegenerateClusterError, MvfuzzError
from .fcm import (
    Centers,
    FcmResult,
    FuzzyPartition,
    defuzzify,
    fcm_fit,
    fcm_objective,
    random_partition,
    squared_distances,
    update_centers,
    update_membership,
)
from .harness import (
    ALGORITHMS,
    CellSummary,
    ExperimentConfig,
    ExperimentReport,
    RunRecord,
    build_score_table,
    default_grid,
    load_experiment_dataset,
    run_experiment,
    write_report,
)
from .hss import (
    HssConfig,
    HssResult,
    HssState,
    HssTrace,
    ViewWeights,
    hss_fit,
    objective,
    update_hidden_step,
    update_weights,
)
from .metrics import ContingencyTable, PairCounts, contingency_table, nmi, pair_counts, rand_index
from .nmf import (
    HiddenFactorization,
    SharedNmfResult,
    max_rank,
    reconstruction_error,
    shared_nmf_fit,
    update_basis_step,
)
from .stats import (
    FriedmanResult,
    HolmComparison,
    HolmResult,
    ScoreTable,
    average_ranks,
    format_friedman,
    format_holm,
    friedman,
    holm_posthoc,
    load_bundled_scores,
    read_score_csv,
    write_friedman_csv,
    write_holm_csv,
)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "CellSummary",
    "Centers",
    "CoFkmResult",
    "CoFkmState",
    "ConfigError",
    "ContingencyTable",
    "DataError",
    "DegenerateClusterError",
    "ExperimentConfig",
    "ExperimentReport",
    "FcmResult",
    "FriedmanResult",
    "FuzzyPartition",
    "HiddenFactorization",
    "HolmComparison",
    "HolmResult",
    "HssConfig",
    "HssResult",
    "HssState",
    "HssTrace",
    "MultiViewDataset",
    "MvfuzzError",
    "PairCounts",
    "RunRecord",
    "ScoreTable",
    "SharedNmfResult",
    "SyntheticSpec",
    "ViewWeights",
    "average_ranks",
    "build_score_table",
    "cofkm_fit",
    "consensus_membership",
    "contingency_table",
    "default_grid",
    "defuzzify",
    "fcm_fit",
    "fcm_objective",
    "format_friedman",
    "format_holm",
    "friedman",
    "generate_synthetic",
    "heuristic_fuzzifier",
    "holm_posthoc",
    "hss_fit",
    "load_bundled_scores",
    "load_experiment_dataset",
    "load_multiview",
    "max_rank",
    "nmi",
    "normalize_minmax",
    "objective",
    "pair_counts",
    "rand_index",
    "random_partition",
    "read_score_csv",
    "reconstruction_error",
    "run_experiment",
    "save_multiview",
    "shared_nmf_fit",
    "squared_distances",
    "synthetic_factorization",
    "update_basis_step",
    "update_centers",
    "update_hidden_step",
    "update_membership",
    "update_weights",
    "write_friedman_csv",
    "write_holm_csv",
    "write_report",
]
