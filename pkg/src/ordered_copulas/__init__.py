"""Joint laws of ordered pairs ``X1 >= X2`` with prescribed marginals.

Modules
-------
distcore
    Marginal cdfs, quantiles and the ordered marginal pair.
copula
    Diagonal sections, copula families and the ordered joint cdf.
bounds
    Pointwise lower and upper bounds on joint cdfs and the support test.
dependence
    Sample rank correlations and the smallest attainable tau and rho.
maxent
    The entropy-maximizing joint density and entropy quadrature.
sampling
    Reproducible samplers and the order-statistics representation check.
"""

from .bounds import inf_H, lower_bound_L, rogers_P, support_contains, upper_bound
from .copula import (
    ArchimedeanGenerator,
    Copula,
    DiagonalReport,
    DiagonalSection,
    PartialDiagonal,
    archimedean_copula,
    archimedean_diagonal,
    bertino,
    comonotone_diagonal,
    compatibility_defect,
    diagonal_copula,
    diagonal_from_marginals,
    extend_diagonal,
    fh_lower,
    fh_upper,
    gumbel_diagonal,
    gumbel_generator,
    independence,
    marginals_from_diagonal,
    mix_copulas,
    ordered_joint_cdf,
    power_diagonal,
    table_diagonal,
    validate_diagonal,
)
from .dependence import (
    DependenceReport,
    dependence_report,
    kendall_tau_sample,
    min_kendall_tau,
    min_spearman_rho,
    min_tau_independent_V,
    solve_t,
    spearman_rho_sample,
)
from .distcore import (
    Cdf,
    Discrete,
    Empirical,
    Exponential,
    Image,
    JointLaw,
    Mixture,
    Normal,
    OrderedMarginalPair,
    Power,
    Transformed,
    TruncatedNormal,
    Uniform,
    UnimodalProfile,
    eval_cdf,
    independent_v_partner,
    make_ordered_pair,
    quantile,
    rectangle_mass,
    unimodal_profile,
)
from .errors import (
    EntropyUndefined,
    IncompatibleCopula,
    InvalidInput,
    NoMaxEnt,
    NotStochasticallyOrdered,
    OrderedCopulaError,
    Unsupported,
    UnsupportedForDiscrete,
    WrongBranch,
)
from .maxent import (
    EntropyReport,
    MaxEntDensity,
    c_density_general,
    cbar_density,
    differential_entropy,
    entropy_condition,
    maxent_joint_density,
)
from .sampling import (
    OrderStatisticsReport,
    RngStream,
    SamplePairs,
    exchangeable_pair,
    multivariate_minlevel_prob,
    sample_comonotone,
    sample_L_unimodal,
    sample_maxent,
    verify_order_statistics_representation,
)

__all__ = [name for name in dir() if not name.startswith("_")]
