"""Tempered-posterior estimation of sparse precision matrices.

The package fits a graphical horseshoe model to multivariate data with the
likelihood raised to a power alpha in (0, 1], and ships the surrounding
toolkit: a symmetric-matrix core, reproducible distribution draws, Gaussian
divergence calculators, scenario generators, and a simulation harness with
a command line front end.
"""

from .errors import (
    DimensionMismatchError,
    FghsError,
    FormatError,
    InfeasibleSparsityError,
    NotPositiveDefiniteError,
    ParameterDomainError,
)
from .matcore import (
    DiagMode,
    PrecisionMatrix,
    as_sym,
    cholesky,
    frobenius_dist_sq,
    load_matrix,
    log_det,
    min_eigenvalue,
    nearest_psd,
    pd_inverse,
    save_matrix,
)
from .rngdist import (
    RngStream,
    derive_seed,
    draw_half_cauchy,
    draw_inverse_gamma,
    draw_mvn_from_precision,
    draw_mvt,
    substream,
)
from .sampler import (
    ChainOutput,
    SamplerConfig,
    ShrinkageState,
    gibbs_sweep,
    log_posterior_unnorm,
    run_chain,
    sufficient_stats,
)
from .diverge import (
    DivergenceReport,
    c_alpha,
    divergence_report,
    hellinger_sq_gaussian,
    kl_gaussian,
    kl_variance_gaussian,
    renyi_gaussian,
)
from .scenarios import (
    Scenario,
    dense_table_scenario,
    generate_data,
    load_data,
    load_scenario,
    make_dense_truth,
    make_sparse_truth,
    save_data,
    save_scenario,
    scenario_truth,
    sparse_table_scenario,
)
from .harness import (
    AggregateRow,
    ReplicateResult,
    TrendRow,
    aggregate,
    concentration_sweep,
    read_results_csv,
    run_grid,
    write_aggregate_csv,
    write_results_csv,
    write_trend_csv,
)

__version__ = "0.1.0"
