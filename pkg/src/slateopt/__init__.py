"""slateopt: optimal slate composition under a consumption cap.

Given m item types with likelihoods p_t and per-type value models, find
the integer split (a_1, ..., a_m) of an n-item slate maximizing the
expected sum of the k highest realized item values, and measure how the
optimal split trades off diversity against concentration.
"""

from .allocate import (
    Allocation,
    SolveReport,
    certify_concavity,
    composition_count,
    cross_check,
    solve_brute_force,
    solve_greedy,
    solve_relaxed_rounded,
)
from .distributions import (
    Bernoulli,
    Beta,
    DecayingBernoulli,
    Distribution,
    Exponential,
    FiniteDiscrete,
    Pareto,
    Uniform,
    order_stat_mean_analytic,
    pareto_max_asymptote,
)
from .diversity import (
    GammaFit,
    PredictedLimit,
    convergence_probe,
    fit_gamma,
    gamma_vector,
    predict_limit,
    representation,
    uniform_topk_slack,
)
from .errors import (
    BudgetExceededError,
    ConfigError,
    CoverageError,
    CrossCheckError,
    HypothesisViolated,
    NoClosedFormError,
    SlateoptError,
    UnidentifiableError,
)
from .experiments import (
    ExperimentConfig,
    objective_fragment,
    parse_distribution,
    run_bernoulli_chart,
    run_convergence,
    run_heatmap,
    run_orderstats,
    run_solve_once,
)
from .order_stats import OrderStatTable, build_order_stat_table, monte_carlo_order_stat_table, table_to_csv
from .values import (
    MultiPrefSpec,
    ObjectiveSpec,
    TypeProfile,
    best_dual_pref_split,
    eval_objective,
    expected_success_count,
    expected_top_k_sum,
    miss_probability,
    prob_any_success,
    prob_any_success_decaying,
)

__version__ = "0.1.0"
