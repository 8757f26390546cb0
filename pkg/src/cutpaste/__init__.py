"""Simulation and analysis lab for cut-and-paste Markov chains on k-colorings."""

from .chains import (
    ChainRun,
    EhrenfestParams,
    SimplexPoint,
    run_efcp_coordinate,
    run_efcp_matrix,
    run_ehrenfest,
    run_group_chain,
    run_induced_simplex,
    standard_ehrenfest,
)
from .errors import (
    BudgetRefusal,
    InconclusiveRefusal,
    Refusal,
    TheoryRefusal,
    ValidationError,
)
from .paintbox import (
    Atomic,
    DirichletColumns,
    PaintboxLaw,
    PermutationMix,
    PointMass,
    SelfSimilar,
    StochasticMatrix,
    law_from_config,
)
from .partitions import (
    MAX_COLORS,
    Coloring,
    PartitionMatrix,
    UnlabeledPartition,
    act,
    colorings_to_matrix,
    cyclic_shift_matrix,
    identity_matrix,
    matmul,
    matrix_mapping,
    matrix_to_colorings,
    project,
)
from .products import (
    CollapseReport,
    LyapunovEstimate,
    collapse_diagnostic,
    estimate_lyapunov,
    lyapunov_trace,
)
from .projections import (
    EquivalenceReport,
    ProjectedRun,
    project_run,
    projected_mixing_equivalence,
)
from .rng import RngStream, as_stream
from .tvlab import (
    CutoffReport,
    MixingProfile,
    ProductMultinomialLaw,
    TVEstimate,
    cutoff_experiment,
    ehrenfest_bounds,
    ehrenfest_mixing_time,
    ehrenfest_tv_exact,
    ehrenfest_tv_profile,
    loglog_schedule,
    make_constant_pair,
    make_test_pair,
    mixing_time,
    tv_exact_atomic,
    tv_exact_conditional,
    tv_exact_product_multinomial,
    tv_likelihood_bound,
    tv_lower_mc,
    tv_upper_mc,
)

__version__ = "0.1.0"

__all__ = [
    "MAX_COLORS",
    "Atomic",
    "BudgetRefusal",
    "ChainRun",
    "CollapseReport",
    "Coloring",
    "CutoffReport",
    "DirichletColumns",
    "EhrenfestParams",
    "EquivalenceReport",
    "InconclusiveRefusal",
    "LyapunovEstimate",
    "MixingProfile",
    "PaintboxLaw",
    "PartitionMatrix",
    "PermutationMix",
    "PointMass",
    "ProductMultinomialLaw",
    "ProjectedRun",
    "Refusal",
    "RngStream",
    "SelfSimilar",
    "SimplexPoint",
    "StochasticMatrix",
    "TVEstimate",
    "TheoryRefusal",
    "UnlabeledPartition",
    "ValidationError",
    "act",
    "as_stream",
    "collapse_diagnostic",
    "colorings_to_matrix",
    "cutoff_experiment",
    "cyclic_shift_matrix",
    "ehrenfest_bounds",
    "ehrenfest_mixing_time",
    "ehrenfest_tv_exact",
    "ehrenfest_tv_profile",
    "estimate_lyapunov",
    "identity_matrix",
    "law_from_config",
    "loglog_schedule",
    "lyapunov_trace",
    "make_constant_pair",
    "make_test_pair",
    "matmul",
    "matrix_mapping",
    "matrix_to_colorings",
    "mixing_time",
    "project",
    "project_run",
    "projected_mixing_equivalence",
    "run_efcp_coordinate",
    "run_efcp_matrix",
    "run_ehrenfest",
    "run_group_chain",
    "run_induced_simplex",
    "standard_ehrenfest",
    "tv_exact_atomic",
    "tv_exact_conditional",
    "tv_exact_product_multinomial",
    "tv_likelihood_bound",
    "tv_lower_mc",
    "tv_upper_mc",
    "__version__",
]
