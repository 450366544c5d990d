"""Large, moderate and small deviations of extremal Ginibre eigenvalues."""

from .deviation import Beta, centering, gumbel_cdf_limit, mdp_envelope, rate_I, real_tail_limit
from .errors import InvalidArgumentError, NumericalError, RegimeError, RegimeWarning
from .exact_tails import (
    LogProb,
    TailQuery,
    expected_count,
    expected_count_radius,
    expected_count_rightmost,
    kostlan_radius_tail,
    tail_bracket,
)
from .kernels import k_complex, s_complex_real_ensemble, s_real_real_ensemble
from .specfun import LogValue, erfc, erfcx, reg_gamma_p, reg_gamma_q, trunc_exp_asymptotic, trunc_exp_log

__version__ = "0.1.0"
