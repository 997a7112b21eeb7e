"""Interrater agreement statistics with a simulation benchmark.

Ten agreement measures on 2x2 contingency tables (percent agreement plus
nine chance-corrected statistics), their large-sample variances and
confidence intervals, a latent-variable rating simulator with a known true
agreement level K, a Monte Carlo evaluation harness, and average-linkage
clustering of method behavior. The ``raterbench`` console script exposes the
same operations on the command line.
"""

from ._backend import available_kernels, kernel_name
from .clustering import (
    BENCHMARK_LABEL,
    Dendrogram,
    MethodProfile,
    agglomerate,
    cut,
    distance_matrix,
    newick,
    profiles_from_results,
)
from .estimators import (
    CORRECT_HALF,
    NO_CORRECTION,
    AgreementEstimate,
    MethodId,
    chance_agreement,
    estimate,
    estimate_all,
    icc_anova,
)
from .gaussian import BvnSpec, bvn_upper_orthant, std_normal_cdf, std_normal_quantile
from .generator import (
    SubjectOutcome,
    replicate_tables,
    rng_stream,
    simulate_study,
    simulate_subject,
)
from .harness import (
    GridSpec,
    MethodStats,
    PercentileSummary,
    SettingSummary,
    load_results,
    parse_grid_config,
    run_grid,
    run_setting,
    summarize,
)
from .inference import IntervalEstimate, confidence_interval, variance
from .tables import ContingencyTable, parse_table
from .truth import (
    CorrectnessProbs,
    Scenario,
    TrueCellProbs,
    TruthTable,
    UncertaintyProbs,
    correctness_probs,
    k_star,
    p_a_true,
    theoretical_cell_probs,
    true_k,
    true_k_reduced,
    truth_table,
    uncertainty_probs,
)

__version__ = "0.1.0"

__all__ = [
    "AgreementEstimate",
    "BENCHMARK_LABEL",
    "BvnSpec",
    "CORRECT_HALF",
    "ContingencyTable",
    "CorrectnessProbs",
    "Dendrogram",
    "GridSpec",
    "IntervalEstimate",
    "MethodId",
    "MethodProfile",
    "MethodStats",
    "NO_CORRECTION",
    "PercentileSummary",
    "Scenario",
    "SettingSummary",
    "SubjectOutcome",
    "TrueCellProbs",
    "TruthTable",
    "UncertaintyProbs",
    "agglomerate",
    "available_kernels",
    "bvn_upper_orthant",
    "chance_agreement",
    "confidence_interval",
    "correctness_probs",
    "cut",
    "distance_matrix",
    "estimate",
    "estimate_all",
    "icc_anova",
    "k_star",
    "kernel_name",
    "load_results",
    "newick",
    "p_a_true",
    "parse_grid_config",
    "parse_table",
    "profiles_from_results",
    "replicate_tables",
    "rng_stream",
    "run_grid",
    "run_setting",
    "simulate_study",
    "simulate_subject",
    "std_normal_cdf",
    "std_normal_quantile",
    "summarize",
    "theoretical_cell_probs",
    "true_k",
    "true_k_reduced",
    "truth_table",
    "uncertainty_probs",
    "variance",
]
