"""Confidence intervals and sequences for bounded means via testing by betting."""

from .betting import (
    CsState,
    Fixed,
    GridConfig,
    LogOptimalOracle,
    Mixture,
    PrPlLambda,
    betting_ci,
    betting_cs,
    betting_cs_step,
    log_wealth_grid,
    realized_regret,
    regret_corrected_cs,
    sup_log_wealth,
)
from .classical import bernstein_ci, hoeffding_ci, mp_eb_ci, prpl_eb_ci, psi_e
from .core import (
    Bernoulli,
    Beta,
    DiscreteDistribution,
    DiscreteUniform,
    GaussianFamily,
    Interval,
    PointMass,
    Sample,
    Seed,
    draw_sample,
    empirical_distribution,
    interval_width,
    parse_distribution,
    validate_sample,
)
from .estimators import BettingCSEstimator, MeanCIEstimator, WorMeanCIEstimator
from .exceptions import BetBoundsError
from .klinf import (
    a_n_alpha,
    betting_ci_width_upper_bound,
    ci_width_lower_bound,
    gaussian_lower_bound,
    kl_inf,
    kl_inf_inverse,
    oracle_ci_width,
)
from .wor import (
    FinitePopulation,
    bernstein_serfling_ci,
    draw_wor,
    wor_betting_ci,
    wor_prpl_eb_ci,
)

__version__ = "0.1.0"
