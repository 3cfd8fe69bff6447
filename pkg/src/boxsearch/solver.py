"""Iterative best-response solver with certified value brackets.

The hider's payoff u(p) = min_xi u(p, xi) is the lower envelope of the
linear functions p -> u(p, xi), one per search sequence, so maximizing it
is a cutting-plane problem. Each iteration solves the finite matrix game
restricted to the sequences stored so far (an upper bound U_k on the game
value, since the searcher is restricted), then evaluates a Gittins best
response against the optimal floored hiding strategy p_k (a lower bound
L_k = u(p_k)). The best response is added as a new column: it cuts off
(p_k, U_k), so the upper bounds decrease to the value. Iteration stops
once U_k/L_k - 1 < epsilon and no probability floor binds; the searcher's
optimal mixture then comes from the final LP's duals and mixes at most n
sequences.

The floors p_i >= delta_i are essential: without them the LP can park the
hider on a boundary strategy whose unique best response never searches
some box, making that response useless as a cut.

A separate finite test decides whether the heuristic strategy p0 is
exactly optimal: p0 is optimal in the full game if and only if it is
optimal in the finite game restricted to the sigma-deterministic Gittins
counters against p0 (at most n! of them), which reduces to comparing that
game's value with u(p0).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .bounds import hider_floor
from .errors import NoCycleDetected, PerfectDetectionUnsupported
from .gittins import (
    TIE_REL_TOL,
    SearchSequence,
    TieOrdering,
    all_orderings,
    cyclic_sequence,
    gittins_sequence,
    initial_orderings,
)
from .lp import LpSolution, PayoffMatrix, recover_searcher_mixture, solve_hider_lp
from .model import HidingStrategy, SearchGame, p0
from .payoff import PayoffBracket, expected_payoff, payoff, payoff_cyclic

P0_OPT_REL_THRESHOLD = 1e-9


@dataclass(frozen=True)
class SolveConfig:
    """epsilon is the relative-gap target; keep payoff_rel_tol well below
    it, since certified bounds can never be tighter than the payoff
    brackets they are built from."""

    epsilon: float = 1e-6
    max_iterations: int = 10000
    shrink: float = 0.99
    payoff_rel_tol: float = 1e-10
    initial_sequences: int | None = None  # None: one per cyclic rotation (n)
    dedupe_horizon: int = 64

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


class Termination(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    upper: float
    lower: float
    gap: float
    added_sequence: int | None
    binding: tuple[bool, ...]


@dataclass(frozen=True)
class Solution:
    p_star: HidingStrategy
    theta: tuple[float, ...]
    sequences: tuple[SearchSequence, ...]
    L: float
    U: float
    iterations: int
    trace: tuple[IterationRecord, ...]
    termination: Termination

    @property
    def gap(self) -> float:
        return self.U / self.L - 1.0

    def theta_support(self) -> list[tuple[float, SearchSequence]]:
        return [
            (w, seq) for w, seq in zip(self.theta, self.sequences) if w > 0
        ]


@dataclass(frozen=True)
class P0TestResult:
    optimal: bool
    v_D: float
    u_p0: PayoffBracket
    theta: tuple[float, ...]
    sequences: tuple[SearchSequence, ...]
    sequences_used: int


def _counter_sequence(game: SearchGame, p: HidingStrategy,
                      order: TieOrdering | None = None,
                      force_sigma_prefix: bool = False,
                      exact_ties: bool = False) -> SearchSequence:
    """Gittins counter to p; on cyclic games, with its cycle identified.

    exact_ties compares float indices directly (no tie tolerance). Best
    responses inside the iteration use it: near the optimum, indices tie
    for real, and a tolerant tie-break could pick a fractionally
    sub-maximal box, overshooting the lower bound u(p_k). Any
    directly-compared sequence is a genuine Gittins counter.
    """
    tol = 0.0 if exact_ties else TIE_REL_TOL
    if game.cyclic is not None:
        try:
            return cyclic_sequence(game, p, order, tie_rel_tol=tol)
        except NoCycleDetected:
            pass
    return gittins_sequence(
        game, p, order, force_sigma_prefix=force_sigma_prefix,
        tie_rel_tol=tol,
    )


def _column_values(game: SearchGame, seq: SearchSequence,
                   rel_tol: float) -> tuple[np.ndarray, float]:
    """Midpoint payoffs u(i, seq) for all boxes and their worst bracket
    half-width (exact, zero-width, on cyclic cycles)."""
    if game.cyclic is not None and seq.cycle is not None:
        values = [payoff_cyclic(game, i, seq) for i in range(game.n)]
        return np.array(values), 0.0
    brackets = [payoff(game, i, seq, rel_tol) for i in range(game.n)]
    half = max(0.5 * b.width for b in brackets)
    return np.array([b.midpoint for b in brackets]), half


def _lower_bracket(game: SearchGame, p: HidingStrategy, seq: SearchSequence,
                   rel_tol: float) -> PayoffBracket:
    """Certified bracket of u(p, seq) (zero-width on cyclic cycles)."""
    if game.cyclic is not None and seq.cycle is not None:
        val = math.fsum(
            pi * payoff_cyclic(game, i, seq)
            for i, pi in enumerate(p.p) if pi > 0
        )
        return PayoffBracket(val, val, 0)
    return expected_payoff(game, p, seq, rel_tol)


def _upper_value(game: SearchGame, i: int, seq: SearchSequence,
                 rel_tol: float) -> float:
    if game.cyclic is not None and seq.cycle is not None:
        return payoff_cyclic(game, i, seq)
    return payoff(game, i, seq, rel_tol).upper


def _mixture_certificate(game: SearchGame, theta, sequences,
                         rel_tol: float) -> float:
    """max_i u(i, theta) over bracket upper bounds: a rigorous upper bound
    on the game value for any searcher mixture theta, independent of LP
    rounding."""
    return max(
        math.fsum(
            w * _upper_value(game, i, seq, rel_tol)
            for w, seq in zip(theta, sequences) if w > 0
        )
        for i in range(game.n)
    )


def best_response_value(
    game: SearchGame, p: HidingStrategy, rel_tol: float = 1e-10
) -> tuple[PayoffBracket, SearchSequence]:
    """u(p) with a certified bracket, and the Gittins counter achieving it.

    Boxes with p_i = 0 are never searched, so the value then refers to the
    game restricted to the support (the returned sequence is flagged
    degenerate_support).
    """
    seq = _counter_sequence(game, p, exact_ties=True)
    return _lower_bracket(game, p, seq, rel_tol), seq


def _dedupe_key(seq: SearchSequence, horizon: int) -> tuple[int, ...]:
    # distinct Gittins counters diverge within their first tie, and ties
    # vanish after n searches for sampled games, so a prefix suffices
    return seq.prefix(horizon)


_DEDUPE_CONFIRM_CAP = 1 << 16


def _same_sequence(a: SearchSequence, b: SearchSequence,
                   horizon: int) -> bool:
    """Adaptive prefix comparison for key collisions.

    Responses against near-boundary hiding strategies can share prefixes
    far longer than the key horizon (a starved box first appears only
    once the dominant box's index decays to its level), so equal keys are
    confirmed by quadrupling the compared span before two sequences are
    declared identical.
    """
    span = horizon
    while span < _DEDUPE_CONFIRM_CAP:
        span *= 4
        if a.prefix(span) != b.prefix(span):
            return False
    return True


class _SequencePool:
    """Deduplicating store: short prefix keys, adaptive confirmation."""

    def __init__(self, horizon: int):
        self.horizon = horizon
        self._buckets: dict[tuple[int, ...], list[SearchSequence]] = {}

    def add(self, seq: SearchSequence) -> bool:
        """Record seq; False when an identical sequence is already held."""
        bucket = self._buckets.setdefault(_dedupe_key(seq, self.horizon), [])
        for other in bucket:
            if _same_sequence(seq, other, self.horizon):
                return False
        bucket.append(seq)
        return True


def solve(game: SearchGame, config: SolveConfig | None = None) -> Solution:
    """Run the iterative solve to an epsilon-certified value bracket."""
    cfg = config or SolveConfig()
    if game.has_perfect_box():
        raise PerfectDetectionUnsupported(
            "iterative solve requires alpha_i < 1; use test_p0_optimality "
            "for perfect-detection studies"
        )
    n = game.n
    floors = hider_floor(game, cfg.shrink)
    delta = np.asarray(floors.delta)
    start = p0(game)

    horizon = cfg.dedupe_horizon
    if game.cyclic is not None:
        horizon = max(horizon, 4 * game.cyclic.x_hat)

    orderings = initial_orderings(n)
    if cfg.initial_sequences is not None:
        orderings = all_orderings(n)[: cfg.initial_sequences]
    pool = _SequencePool(horizon)
    sequences: list[SearchSequence] = []
    for sigma in orderings:
        seq = _counter_sequence(game, start, sigma, force_sigma_prefix=True)
        if pool.add(seq):
            sequences.append(seq)
    columns = []
    worst_half = 0.0
    for seq in sequences:
        values, half = _column_values(game, seq, cfg.payoff_rel_tol)
        columns.append(values)
        worst_half = max(worst_half, half)

    trace: list[IterationRecord] = []
    lp: LpSolution | None = None
    lp_matrix: PayoffMatrix | None = None
    stalled = False
    for k in range(1, cfg.max_iterations + 1):
        lp_matrix = PayoffMatrix(
            u=np.column_stack(columns),
            column_ids=tuple(range(len(columns))),
        )
        lp = solve_hider_lp(lp_matrix, delta)
        # the LP sees bracket midpoints; inflating its value by the worst
        # half-width keeps the reported upper bound certified
        upper = lp.v + worst_half
        response = _counter_sequence(game, lp.p, exact_ties=True)
        bracket = _lower_bracket(game, lp.p, response, cfg.payoff_rel_tol)
        lower = bracket.lower
        gap = upper / lower - 1.0
        done = gap < cfg.epsilon and not any(lp.binding)

        added: int | None = None
        if not done:
            if not pool.add(response):
                stalled = True  # unreachable in exact arithmetic; float guard
            else:
                added = len(sequences)
                sequences.append(response)
                values, half = _column_values(
                    game, response, cfg.payoff_rel_tol
                )
                columns.append(values)
                worst_half = max(worst_half, half)
        trace.append(IterationRecord(k, upper, lower, gap, added, lp.binding))
        if done or stalled:
            break

    final = trace[-1]
    theta = recover_searcher_mixture(lp_matrix, delta, lp)
    # the final LP predates any column added in its own iteration
    theta_full = [float(w) for w in theta]
    theta_full += [0.0] * (len(sequences) - len(theta_full))
    converged = final.gap < cfg.epsilon and not any(final.binding)
    upper = final.upper
    if converged:
        # replace the LP value (subject to pivot rounding) by the dual
        # certificate: with no floor binding the two agree to ~1e-12
        upper = _mixture_certificate(
            game, theta_full, sequences, cfg.payoff_rel_tol
        )
    return Solution(
        p_star=lp.p,
        theta=tuple(theta_full),
        sequences=tuple(sequences),
        L=final.lower,
        U=upper,
        iterations=final.iteration,
        trace=tuple(trace),
        termination=(
            Termination.CONVERGED if converged else Termination.MAX_ITERATIONS
        ),
    )


def test_p0_optimality(
    game: SearchGame,
    cap: int = 8,
    dedupe_horizon: int = 64,
    payoff_rel_tol: float = 1e-10,
) -> P0TestResult:
    """Decide exactly whether p0 is an optimal hiding strategy.

    Builds every sigma-deterministic Gittins counter to p0 (n! tie
    orderings, duplicates removed), solves the finite game they span, and
    declares p0 optimal iff that game's value matches u(p0) to relative
    1e-9. When optimal, the finite game's searcher mixture is optimal in
    the full game.
    """
    n = game.n
    start = p0(game)
    horizon = dedupe_horizon
    if game.cyclic is not None:
        horizon = max(game.cyclic.x_hat, n)

    pool = _SequencePool(horizon)
    sequences: list[SearchSequence] = []
    for sigma in all_orderings(n, cap):
        seq = _counter_sequence(game, start, sigma, force_sigma_prefix=True)
        if pool.add(seq):
            sequences.append(seq)

    u = np.column_stack(
        [_column_values(game, seq, payoff_rel_tol)[0] for seq in sequences]
    )
    matrix = PayoffMatrix(u=u, column_ids=tuple(range(len(sequences))))
    lp = solve_hider_lp(matrix, np.zeros(n))
    theta = recover_searcher_mixture(matrix, np.zeros(n), lp)

    p0_vec = start.as_array()
    col_values = p0_vec @ u
    best_col = int(np.argmin(col_values))
    u_p0 = _lower_bracket(game, start, sequences[best_col], payoff_rel_tol)
    optimal = abs(u_p0.midpoint - lp.v) / lp.v < P0_OPT_REL_THRESHOLD
    return P0TestResult(
        optimal=optimal,
        v_D=lp.v,
        u_p0=u_p0,
        theta=tuple(theta.tolist()),
        sequences=tuple(sequences),
        sequences_used=len(sequences),
    )


def write_trace(solution: Solution, path) -> None:
    """Line-per-iteration CSV: iter,U,L,gap,added_seq,binding_mask."""
    with open(path, "w") as fh:
        fh.write("iter,U,L,gap,added_seq,binding_mask\n")
        for rec in solution.trace:
            added = "" if rec.added_sequence is None else rec.added_sequence
            mask = "".join("1" if b else "0" for b in rec.binding)
            fh.write(
                f"{rec.iteration},{rec.upper!r},{rec.lower!r},"
                f"{rec.gap!r},{added},{mask}\n"
            )
