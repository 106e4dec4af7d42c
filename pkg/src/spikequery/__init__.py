"""spikequery: query complexity of rank-one PCA under exact matrix-vector oracles.

Generates deformed-Wigner hard instances, runs adaptive query algorithms
against a budgeted oracle, evaluates the closed-form lower bounds and
query schedules, computes generalized f-divergences on finite measures,
and Monte-Carlo-verifies the concentration and likelihood identities the
bounds rest on.
"""

from .instances import (
    KD_ASYMPTOTIC,
    Membership,
    SpectrumSummary,
    SpikedInstance,
    as_rng,
    check_membership,
    make_spiked,
    rayleigh,
    sample_goe,
    sample_uniform_sphere,
    spectral_norm,
    spectrum,
    trial_seed,
)
from .oracle import (
    BudgetExhaustedError,
    ProjectedStep,
    QuerySession,
    Score,
    SessionFinalizedError,
    Transcript,
    TranscriptStep,
    finalize,
    open_session,
    projected_view,
    query,
    reconstruct_raw_responses,
    score,
    transcript_rows,
)
from .algorithms import (
    ALGORITHM_KINDS,
    AlgorithmConfig,
    RUNNERS,
    iterate_candidates,
    queries_to_target,
    ritz_from_pairs,
    run_lanczos,
    run_power,
    run_random_nonadaptive,
)
from .bounds import (
    BoundReport,
    C1_DETECTION_DEFAULT,
    C1_ESTIMATION_DEFAULT,
    C1_MAIN_DEFAULT,
    C_FACTOR_CAP,
    C_FACTOR_CAP_HALF,
    ChiTauSchedules,
    TauSchedule,
    c_factor,
    chi_tau_schedule,
    detection_error_bound,
    detection_tv_bound,
    estimation_success_bound,
    f_overlap,
    f_overlap_floor,
    gamma_of,
    kl_tau_schedule,
    main_theorem_bound,
    min_queries,
)
from .divergences import (
    CHI2_PLUS1_GENERATOR,
    ConvexGenerator,
    DiscreteMeasure,
    KL_GENERATOR,
    TruncationEvent,
    as_measure,
    chi2_fano_value_bound,
    chi2_plus1,
    d_f,
    g_chi,
    gaussian_kl,
    gen_fano_value_bound,
    global_fano_bound,
    kl,
    likelihood_product_bound,
    phi_f,
    scaled_generator,
    sphere_mgf_bound,
    truncated_chi2_tv,
)
from .verify import (
    CHECKS,
    DEFAULT_PARAMS,
    McReport,
    McRow,
    QUICK_PARAMS,
    reports_summary,
    reports_to_csv,
    run_check,
    verify_conditional_law,
    verify_detection_gap,
    verify_gauss_quadratic,
    verify_kd,
    verify_overlap_growth,
    verify_reduction_events,
    verify_sphere_tail,
)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHM_KINDS",
    "AlgorithmConfig",
    "BoundReport",
    "BudgetExhaustedError",
    "C1_DETECTION_DEFAULT",
    "C1_ESTIMATION_DEFAULT",
    "C1_MAIN_DEFAULT",
    "C_FACTOR_CAP",
    "C_FACTOR_CAP_HALF",
    "CHECKS",
    "CHI2_PLUS1_GENERATOR",
    "ChiTauSchedules",
    "ConvexGenerator",
    "DEFAULT_PARAMS",
    "DiscreteMeasure",
    "KD_ASYMPTOTIC",
    "KL_GENERATOR",
    "McReport",
    "McRow",
    "Membership",
    "ProjectedStep",
    "QUICK_PARAMS",
    "QuerySession",
    "RUNNERS",
    "Score",
    "SessionFinalizedError",
    "SpectrumSummary",
    "SpikedInstance",
    "TauSchedule",
    "Transcript",
    "TranscriptStep",
    "TruncationEvent",
    "as_measure",
    "as_rng",
    "c_factor",
    "check_membership",
    "chi2_fano_value_bound",
    "chi2_plus1",
    "chi_tau_schedule",
    "d_f",
    "detection_error_bound",
    "detection_tv_bound",
    "estimation_success_bound",
    "f_overlap",
    "f_overlap_floor",
    "finalize",
    "g_chi",
    "gamma_of",
    "gaussian_kl",
    "gen_fano_value_bound",
    "global_fano_bound",
    "iterate_candidates",
    "kl",
    "kl_tau_schedule",
    "likelihood_product_bound",
    "main_theorem_bound",
    "make_spiked",
    "min_queries",
    "open_session",
    "phi_f",
    "projected_view",
    "queries_to_target",
    "query",
    "rayleigh",
    "reconstruct_raw_responses",
    "reports_summary",
    "reports_to_csv",
    "ritz_from_pairs",
    "run_check",
    "run_lanczos",
    "run_power",
    "run_random_nonadaptive",
    "sample_goe",
    "sample_uniform_sphere",
    "scaled_generator",
    "score",
    "spectral_norm",
    "spectrum",
    "sphere_mgf_bound",
    "transcript_rows",
    "trial_seed",
    "truncated_chi2_tv",
    "verify_conditional_law",
    "verify_detection_gap",
    "verify_gauss_quadratic",
    "verify_kd",
    "verify_overlap_growth",
    "verify_reduction_events",
    "verify_sphere_tail",
]
