"""Symmetric two-armed Bernoulli bandit: exact minimax regret and
pseudoregret by backward induction, closed-form parabolic approximations,
and a reproducible experiment harness."""

from .core import (
    GameParams,
    PseudoState,
    RegretState,
    erf,
    erfc,
    heat_kernel,
    terminal_payoff,
)
from .dp import (
    bayesian_pseudoregret_check,
    pseudoregret_value,
    pseudoregret_value_full,
    regret_value,
    regret_value_full,
    regret_value_reduced,
    value_trace,
)
from .env import EpisodeLog, RewardPair, play_episode, sample_rewards, simulate_batch, step
from .experiments import (
    MCResult,
    ScalingFit,
    SweepSpec,
    convergence_sweep,
    error_scaling_fit,
    figure_data,
    mc_estimate,
)
from .pde import (
    ClosedForm,
    bar_u_total,
    maximize_prefactor,
    pde_residual,
    phi_fn,
    phi_hat,
    prefactor_c,
    prefactor_c_bar,
    u_h,
    u_total,
)
from .strategy import (
    Decision,
    MyopicStrategy,
    TabularStrategy,
    UniformStrategy,
    brute_force_minimax,
    likelihood_ratio,
    minimax_pair_solve,
    myopic_decision,
)

__version__ = "0.1.0"
