"""Expected time to detection, with certified lower/upper brackets.

For a hider in box i and a search sequence xi with visit times tau_i(r),
the expected detection time is

    u(i, xi) = tau_i(1) + sum_{r>=1} (1-alpha_i)^r [tau_i(r+1) - tau_i(r)].

Truncating the sum after R terms gives a lower bound. An upper bound
follows from a worst-case continuation: under any Gittins sequence no more
than l_hat time passes between successive visits of a box, so the tail is
at most l_hat (1-alpha_i)^{R+1} / alpha_i. payoff() grows R until the
bracket's relative width is below tolerance (default 1e-10).

Cyclic games shortcut the series: once the sequence cycles, the tail is a
geometric sum with ratio (1-alpha_i)^{x_i} and the value has a closed
form, exact up to rounding.

Every mixed payoff here is interval arithmetic over per-box brackets, so
reported values are certified brackets rather than point estimates. A box
a sequence provably never visits has infinite payoff, represented by the
INFINITE_PAYOFF sentinel (never a float inf that could enter a matrix).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BoxNeverSearched,
    InvalidMixture,
    NoCycleDetected,
    NotCyclic,
    PerfectDetectionUnsupported,
)
from .gittins import SearchSequence, from_pattern
from .model import HidingStrategy, SearchGame, Seed


@dataclass(frozen=True)
class PayoffBracket:
    """Certified bracket lower <= u <= upper; searches_used is the
    truncation depth R behind it (0 when the value is exact)."""

    lower: float
    upper: float
    searches_used: int

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    is_infinite = False


class _InfinitePayoff:
    """Sentinel for u(i, xi) = +inf (box i never searched under xi)."""

    is_infinite = True

    def __repr__(self) -> str:
        return "INFINITE_PAYOFF"


INFINITE_PAYOFF = _InfinitePayoff()


@dataclass(frozen=True)
class TailBoundParams:
    """l: max searches of any one box between successive visits of another;
    l_hat: max time between successive visits of any box."""

    l: int
    l_hat: float


def tail_params(game: SearchGame) -> TailBoundParams:
    """Worst-case visit spacing under any Gittins sequence.

    l = floor(max_{i,j} log(1-alpha_i)/log(1-alpha_j)) + 1, so that
    (1-alpha_j)^l < 1-alpha_i for every pair; l_hat = sum_j l * t_j.
    """
    if game.has_perfect_box():
        raise PerfectDetectionUnsupported(
            "tail bound degenerates when some alpha_i = 1"
        )
    logs = [math.log1p(-a) for a in game.alpha]
    ratio = max(li / lj for li in logs for lj in logs)
    l = int(math.floor(ratio)) + 1
    return TailBoundParams(l=l, l_hat=l * math.fsum(game.t))


def _tail_time(game: SearchGame) -> float:
    """l_hat, extended to games containing perfect boxes: a perfect box is
    searched at most once ever, so it contributes its t_j only once."""
    if not game.has_perfect_box():
        return tail_params(game).l_hat
    finite = [j for j in range(game.n) if game.alpha[j] < 1.0]
    if not finite:
        return 0.0
    logs = [math.log1p(-game.alpha[j]) for j in finite]
    l = int(math.floor(max(li / lj for li in logs for lj in logs))) + 1
    return l * math.fsum(game.t[j] for j in finite) + math.fsum(
        game.t[j] for j in range(game.n) if game.alpha[j] == 1.0
    )


def payoff_truncated(
    game: SearchGame, i: int, xi: SearchSequence, R: int,
    tail_time: float | None = None,
) -> tuple[float, float]:
    """(lower, upper) bracket of u(i, xi) from the first R series terms.

    Needs R+1 realized visits of box i; extends xi on demand and raises
    InsufficientPrefix when the sequence cannot reach that many visits.
    """
    a = game.alpha[i]
    xi.ensure_visits(i, R + 1)
    tau = np.asarray(xi.visit_times(i)[: R + 1])
    lower = float(tau[0])
    if R > 0:
        q_pows = np.cumprod(np.full(R, 1.0 - a))
        lower += float(q_pows @ np.diff(tau))
        tail_factor = float(q_pows[-1]) * (1.0 - a)
    else:
        tail_factor = 1.0 - a
    if tail_time is None:
        tail_time = _tail_time(game)
    return lower, lower + tail_time * tail_factor / a


def payoff(
    game: SearchGame, i: int, xi: SearchSequence, rel_tol: float = 1e-10
) -> PayoffBracket | _InfinitePayoff:
    """Bracket u(i, xi) to relative width rel_tol, extending xi on demand.

    Returns INFINITE_PAYOFF when xi provably never searches box i (the
    p_i = 0 case). Results are memoized on the sequence, keyed by
    (box, rel_tol): extension is append-only so a bracket never goes stale.
    """
    cached = xi._payoff_cache.get((i, rel_tol))
    if cached is not None:
        return cached
    result = _payoff_uncached(game, i, xi, rel_tol)
    xi._payoff_cache[(i, rel_tol)] = result
    return result


def _payoff_uncached(game, i, xi, rel_tol):
    if xi.num_visits(i) == 0 and not xi.can_visit_more(i):
        return INFINITE_PAYOFF
    a = game.alpha[i]
    if a == 1.0:
        xi.ensure_visits(i, 1)
        tau1 = xi.visit_times(i)[0]
        return PayoffBracket(tau1, tau1, 0)
    tail = _tail_time(game)
    q = 1.0 - a
    # first R with tail <= rel_tol * t_i; t_i <= tau_i(1) <= lower always
    R = max(1, math.ceil(math.log(rel_tol * game.t[i] * a / tail) / math.log(q)))
    while True:
        lower, upper = payoff_truncated(game, i, xi, R, tail_time=tail)
        if upper <= lower * (1.0 + rel_tol):
            return PayoffBracket(lower, upper, R)
        R *= 2


def payoff_cyclic(game: SearchGame, i: int, xi: SearchSequence) -> float:
    """Closed-form u(i, xi) for a cyclic game once xi's cycle is known.

    With R = xi.cycle.entry[i] visits before the cycle, the tail past R is
    a geometric sum over whole cycles of the x_i in-cycle gaps:

        u = tau_i(1) + u_R + (1-alpha_i)^R * A_i / (1 - (1-alpha_i)^x_i),
        A_i = sum_{r=1}^{x_i} (1-alpha_i)^r [tau_i(R+r+1) - tau_i(R+r)],

    where u_R is the truncated series over the pre-cycle visits. Exact up
    to float rounding.
    """
    if game.cyclic is None:
        raise NotCyclic("game has no cyclic structure")
    if xi.cycle is None:
        raise NoCycleDetected("sequence has no detected cycle")
    a = game.alpha[i]
    q = 1.0 - a
    x_i = game.cyclic.x[i]
    R = xi.cycle.entry[i]
    xi.ensure_visits(i, R + x_i + 1)
    tau = xi.visit_times(i)
    u_R = 0.0
    qr = 1.0
    for r in range(1, R + 1):
        qr *= q
        u_R += qr * (tau[r] - tau[r - 1])
    A_i = 0.0
    qc = qr
    for r in range(1, x_i + 1):
        qc *= q
        A_i += qc * (tau[R + r] - tau[R + r - 1])
    # qc has absorbed the (1-alpha_i)^R factor by continuing from qr
    return tau[0] + u_R + A_i / (1.0 - q**x_i)


def round_robin_payoff(game: SearchGame, i: int) -> float:
    """u(i, xi') for xi' repeating (box 0, ..., box n-1): the hider in box
    i is reached after sum_{j<=i} t_j, then every full lap T."""
    a = game.alpha[i]
    if a == 1.0:
        return math.fsum(game.t[: i + 1])
    T = math.fsum(game.t)
    return math.fsum(game.t[: i + 1]) + (1.0 - a) / a * T


def round_robin_sequence(game: SearchGame) -> SearchSequence:
    return from_pattern(game, tuple(range(game.n)))


def expected_payoff(
    game: SearchGame, p: HidingStrategy, xi: SearchSequence,
    rel_tol: float = 1e-10,
) -> PayoffBracket:
    """u(p, xi) = sum_i p_i u(i, xi) with interval arithmetic.

    Boxes with p_i = 0 contribute nothing, even when their payoff is the
    infinite sentinel.
    """
    lower = upper = 0.0
    used = 0
    for i, pi in enumerate(p.p):
        if pi == 0.0:
            continue
        br = payoff(game, i, xi, rel_tol)
        if br.is_infinite:
            raise BoxNeverSearched(
                f"box {i} has p_i = {pi} > 0 but is never searched"
            )
        lower += pi * br.lower
        upper += pi * br.upper
        used = max(used, br.searches_used)
    return PayoffBracket(lower, upper, used)


def mixed_payoff(
    game: SearchGame,
    target: int | HidingStrategy,
    theta: list[tuple[float, SearchSequence]],
    rel_tol: float = 1e-10,
) -> PayoffBracket:
    """u(target, theta) for a searcher mixture theta over sequences.

    target is a box index (pure hider) or a HidingStrategy. Weights must
    be nonnegative and sum to 1.
    """
    weights = [w for w, _ in theta]
    if any(w < 0 for w in weights) or abs(math.fsum(weights) - 1.0) > 1e-9:
        raise InvalidMixture(
            f"mixture weights must be >= 0 and sum to 1, got {weights}"
        )
    lower = upper = 0.0
    used = 0
    for w, xi in theta:
        if w == 0.0:
            continue
        if isinstance(target, HidingStrategy):
            br = expected_payoff(game, target, xi, rel_tol)
        else:
            br = payoff(game, target, xi, rel_tol)
            if br.is_infinite:
                raise BoxNeverSearched(
                    f"box {target} never searched by a mixed-in sequence"
                )
        lower += w * br.lower
        upper += w * br.upper
        used = max(used, br.searches_used)
    return PayoffBracket(lower, upper, used)


def mc_estimate(
    game: SearchGame, i: int, xi: SearchSequence, trials: int, seed: Seed,
) -> tuple[float, float]:
    """Monte-Carlo oracle for u(i, xi): simulate per-visit detection.

    Each trial draws the geometric visit number at which box i's search
    succeeds and reads off its completion time. Returns the sample mean
    and the 95% confidence half-width (0 by convention for one trial).
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    draws = rng.geometric(game.alpha[i], size=trials)
    xi.ensure_visits(i, int(draws.max()))
    times = np.asarray(xi.visit_times(i))[draws - 1]
    mean = float(times.mean())
    if trials < 2:
        return mean, 0.0
    half = 1.96 * float(times.std(ddof=1)) / math.sqrt(trials)
    return mean, half
