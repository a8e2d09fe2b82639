"""
opriskcap: analytical operational-risk capital models with built-in verification.

The package solves a one-factor portfolio model for operational risk in the
infinite-granularity limit: lognormal cell losses, Gaussian copula
dependence, closed-form conditional losses under homogeneous, dispersed-risk
and uncertain-correlation assumptions.  Around the closed forms it provides
the calibration inversions (expected-value/VaR ratio to implied sigma), the
correlation algebra (frequency-to-loss transfer, the law of the correlation
upper bound, copula-parameter mappings) and independent Monte-Carlo and
quadrature oracles that verify every formula.

Subpackages
-----------
numerics     normal density/CDF/inverse and Gaussian-weighted quadrature
calibration  frequency/severity fits and the sigma inversion pipeline
correlation  count and loss correlations, bounds, copula mappings
asrf         closed-form conditional losses, diversification index, thresholds
mcsim        seeded Monte-Carlo oracles for all of the above
cli          command-line front end (also exposed as the `opriskcap` script)
"""

from . import asrf, calibration, correlation, mcsim, numerics
from .asrf import (
    CapitalReport,
    CellRiskProfile,
    HeteroSigmaModel,
    HomogeneousModel,
    UncertainBetaModel,
    cell_loss,
    conditional_loss,
    conditional_loss_generic,
    conditional_loss_hetero_sigma,
    conditional_loss_homogeneous,
    conditional_loss_uncertain_beta,
    diversification_index,
    dispersion_impact_curve,
    monotonicity_threshold,
    stand_alone_expectation,
    superadditivity_threshold,
)
from .calibration import (
    AggregateSigma,
    FrequencySeverityFit,
    LossEvent,
    SigmaSummary,
    estimate_gamma,
    ev_var_ratio,
    fit_frequency_severity,
    implied_aggregate_sigma,
    load_loss_events,
    sigma_from_ratio,
    summarize_sigmas,
)
from .correlation import (
    CopulaPair,
    FrequencyPair,
    RBoundLaw,
    copula_from_loss_corr,
    freq_corr,
    freq_corr_bound,
    loss_corr_from_copula,
    loss_corr_from_freq_corr,
    r_bound_cdf,
    r_bound_mean,
    r_bound_pdf,
    rho_variance_from_w,
    w_from_rho_variance,
)
from .mcsim import (
    PopulationSpec,
    SimConfig,
    empirical_corr,
    empirical_quantile,
    generate_loss_events,
    portfolio_quantile,
    simulate_bivariate_poisson,
    simulate_compound_lda,
    simulate_portfolio,
)
from .numerics import (
    QuadratureSpec,
    factor_quantile,
    integrate_gaussian_weighted,
    norm_cdf,
    norm_inv,
    norm_pdf,
)

__version__ = "0.1.0"
