"""Solver for the two-person zero-sum hide-and-search game with overlooks.

A hider picks one of n boxes; searching box i takes t_i time and detects
a hider there with probability alpha_i. The package evaluates search
sequences exactly, computes certified brackets on the game value, and
produces epsilon-optimal mixed strategies for both players.
"""

from .bounds import HiderFloor, hider_floor, value_bounds
from .errors import BoxSearchError
from .gittins import (
    SearchSequence,
    SearchState,
    TieOrdering,
    all_orderings,
    cyclic_sequence,
    gittins_index,
    gittins_sequence,
    initial_orderings,
)
from .model import (
    CyclicStructure,
    HidingStrategy,
    SampleScheme,
    SCHEMES,
    SearchGame,
    future_benefit,
    immediate_benefit,
    load_game,
    make_cyclic_game,
    p0,
    sample_game,
    validate_game,
)
from .payoff import (
    INFINITE_PAYOFF,
    PayoffBracket,
    TailBoundParams,
    expected_payoff,
    mc_estimate,
    mixed_payoff,
    payoff,
    payoff_cyclic,
    payoff_truncated,
    round_robin_payoff,
    tail_params,
)
from .lp import LpSolution, PayoffMatrix, recover_searcher_mixture, solve_hider_lp
from .solver import (
    P0TestResult,
    SolveConfig,
    Solution,
    Termination,
    best_response_value,
    solve,
    test_p0_optimality,
)
from .study import (
    BatchRecord,
    RuckleRecord,
    ruckle_sweep,
    run_batch,
    summarize,
    two_box_study,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
