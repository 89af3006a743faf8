"""Quantum cooperation indicators for two-player prisoner's-dilemma games."""
from .qcore import (
    COOPERATE,
    DEFECT,
    QUANTUM,
    ConstraintError,
    OutcomeDistribution,
    ParameterRangeError,
    PayoffMatrix,
    PayoffPair,
    QuantumState,
    StrategyParams,
    entangler,
    expected_payoffs,
    final_state,
    game_payoff,
    outcome_distribution,
    strategy_matrix,
)
from .equilibria import (
    Barrier,
    EquilibriumCertificate,
    StrategyGrid,
    best_response,
    gamma1_barrier,
    gamma2_barrier,
    is_dominant,
    is_nash,
)
from .indicators import (
    IndicatorSet,
    NoRootError,
    delta_lower,
    delta_star,
    gamma_star,
    indicator_set,
    n_indicator,
    novel_function,
    novel_function_quadrature,
)
from .classify import (
    GameRecord,
    RankingReport,
    builtin_datasets,
    classical_rank_experiment,
    compare_games,
    rank_experiment,
)

__version__ = "0.1.0"
