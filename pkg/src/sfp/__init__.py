"""Self-feeding point process toolkit.

Generate bursty inter-event times whose odds ratio follows a power law,
fit that law back out of real event logs, model populations of
individuals with a bivariate Gaussian, and flag anomalous individuals.
"""

from .analysis import (
    LinearCalibration,
    MarkovChainSpec,
    MomentReport,
    calibrate_a_rho,
    calibrate_c_mu,
    discretized_llg_masses,
    markov_transition_matrix,
    run_appendix_checks,
    sfp_pdf_integral,
    stationary_distribution,
    stationary_moments,
    tail_exponent_check,
    total_variation,
)
from .distributions import (
    BivariateGaussianParams,
    ExponentialParams,
    LogLogisticParams,
    RandomSource,
    bvn_sample,
    exp_sample,
    llg_cdf,
    llg_pdf,
    llg_quantile,
)
from .errors import (
    DataError,
    DegenerateDataError,
    DomainError,
    InsufficientDataError,
    NumericError,
    ParameterError,
    ParseError,
    SfpError,
    UsageError,
)
from .fitting import (
    FitResult,
    OrCurve,
    fit_exponential,
    fit_individual,
    fit_or_powerlaw,
    fit_powerlaw_mle,
    inter_event_times,
    or_curve,
)
from .generators import (
    EventSeries,
    InterEventSeries,
    SfpConfig,
    expand_multi_recipient,
    gaps_within_window,
    intervals_to_timestamps,
    poisson_process,
    sfp_general,
    sfp_legacy,
    sfp_simple,
    sfp_star,
    with_dial_overhead,
)
from .population import (
    AnomalyReport,
    PopulationModel,
    SyntheticDatasetSpec,
    builtin_systems,
    classify_anomaly,
    fit_population,
    generate_dataset,
    get_system,
    mahalanobis_d2,
)

__version__ = "0.1.0"
