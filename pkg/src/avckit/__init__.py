"""Numerical toolkit for cost-constrained adversarial channels.

Submodules:
  channel       model objects, types, example channel factories
  info          information density and exact finite-n variance
  lp            self-contained dense-simplex linear programming
  symmetrize    symmetrizing-cost LP, symmetrizability scan, eta threshold
  saddle        max-min mutual information and dispersion extraction
  rcu           finite-blocklength random-coding bound evaluators
  normal_approx second-order rate curves
  simulate      desk-scale adversarial code simulation
  cli           command-line front end
"""

from .channel import (
    Avc,
    Dist,
    adding_avc,
    bsc_avc,
    cost_feasible,
    empirical_type,
    enumerate_types,
    induced_channel,
    output_dist,
    validate,
)
from .errors import (
    AvckitError,
    ChannelFormatError,
    GuardExceeded,
    InfeasibleError,
    SolverError,
)
from .info import (
    InfoStats,
    centered_density,
    dispersion_v,
    info_density,
    info_stats,
    mutual_information,
    sigma_n_exact,
    third_moment_t,
)
from .normal_approx import (
    NaCurve,
    achievability_na,
    bsc_avc_closed_form,
    converse_na,
    corollary_check,
    na_curve,
    polylog_coeff,
    q_func,
    q_inv,
)
from .rcu import (
    NLetterTest,
    PairTest,
    RcuReport,
    TypicalSet,
    chernoff_bound,
    classical_rcu,
    nletter_test,
    rcu_exact_singleshot,
    rcu_mc_avc,
)
from .saddle import (
    SaddleSolution,
    capacity,
    random_code_capacity,
    v_minus,
    v_plus,
)
from .simulate import (
    Codebook,
    SimResult,
    decode,
    sample_codebook,
    simulate_worst_case,
    validate_bound,
)
from .symmetrize import (
    EtaResult,
    SymResult,
    SymVerdict,
    eta_star,
    is_symmetrizable,
    lambda0,
)

__version__ = "0.1.0"
