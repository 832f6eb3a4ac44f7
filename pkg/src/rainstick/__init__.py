"""Simulation and numerics for the first block of p-biased permutations."""

__version__ = "0.1.0"

from .analytics import (
    GBlockQuery,
    compute_b,
    dominance_rate,
    escape_prob,
    j_of_t,
    j_star,
    log_pG,
    pk_upper_bound,
    ratio_bound_check,
)
from .blocks import (
    BlockOutcome,
    first_block_from_stream,
    sample_block_clocks,
    sample_block_discrete,
    sample_forgetful,
    sample_stretched_block,
)
from .distributions import (
    GeometricLaw,
    SieveRealization,
    StretchedExpLaw,
    geo_pmf,
    sample_site,
    sieve_realize,
    stretched_pmf,
)
from .errors import ConfigError, DomainError, NumericError
from .montecarlo import (
    Experiment,
    RunConfig,
    dominance_check,
    law_equality_test,
    run_replicated,
    summarize,
)
from .paintstick import paintstick_step, sample_paintstick
from .quadrature import QuadratureSpec
