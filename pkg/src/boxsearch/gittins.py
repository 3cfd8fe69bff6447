"""Gittins index search sequences with explicit tie-breaking.

Against a fixed hiding strategy p, an optimal search sequence always next
searches a box of maximal index p_i (1-alpha_i)^{m_i} alpha_i / t_i, where
m_i counts completed searches of box i. Whenever several indices tie, the
sequence's tie ordering sigma decides: among tied boxes, the one earliest
in sigma is searched.

Float indices tie reliably only in contrived situations, so generation
treats indices within relative 1e-9 of the maximum as tied; for sampled
games no two indices collide after the first n searches, which is the only
place a tie is by design (the strategy p0 ties all n starting indices, and
there the first n searches are simply forced to follow sigma).

Cyclic games admit an exact integer tie rule: starting from p0, comparing
fractions r_i/x_i (r_i = searches of box i inside the current cycle)
reproduces the index order exactly, and every tie is detected. Sequences
there repeat a fixed cycle of x_hat searches from the very start. For
other hiding strategies the float generator runs until some window of
x_hat consecutive searches visits box i exactly x_i times; from that entry
point the sequence provably repeats the window forever.

Sequences are generated lazily and extended on demand; per-box visit
completion times are memoized so repeated payoff evaluations never
regenerate prefixes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    CapExceeded,
    EmptyGame,
    InsufficientPrefix,
    InvalidGameError,
    InvalidHidingStrategy,
    NoCycleDetected,
    NotCyclic,
    NumericalFailure,
)
from .model import HidingStrategy, SearchGame, p0

TIE_REL_TOL = 1e-9

_CYCLE_STEP_BUDGET_FACTOR = 10_000


@dataclass(frozen=True)
class TieOrdering:
    """Preference permutation used to break index ties (0-based boxes)."""

    sigma: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.sigma) != list(range(len(self.sigma))):
            raise InvalidGameError(
                f"{self.sigma} is not a permutation of 0..{len(self.sigma) - 1}"
            )

    @staticmethod
    def identity(n: int) -> "TieOrdering":
        return TieOrdering(tuple(range(n)))

    def rank(self) -> list[int]:
        """rank[i] = position of box i in the preference order."""
        r = [0] * len(self.sigma)
        for pos, box in enumerate(self.sigma):
            r[box] = pos
        return r


def initial_orderings(n: int) -> list[TieOrdering]:
    """The n cyclic rotations of (0, 1, ..., n-1)."""
    if n < 1:
        raise EmptyGame("n must be >= 1")
    base = list(range(n))
    return [TieOrdering(tuple(base[k:] + base[:k])) for k in range(n)]


def all_orderings(n: int, cap: int = 8) -> list[TieOrdering]:
    """All n! tie orderings, for the p0 optimality test. The cap refuses
    n above 8, where the 40320 sequences stop being practical."""
    if n > cap:
        raise CapExceeded(f"n = {n} exceeds the ordering cap {cap}")
    return [TieOrdering(perm) for perm in itertools.permutations(range(n))]


def gittins_index(p_i: float, alpha_i: float, t_i: float, m_i: int) -> float:
    """Index of a box holding probability p_i after m_i failed searches."""
    return p_i * (1.0 - alpha_i) ** m_i * alpha_i / t_i


@dataclass(frozen=True)
class SearchState:
    """Snapshot after some searches: per-box completed-search counts and
    the total time elapsed (always exactly sum_i searched[i] * t_i)."""

    searched: tuple[int, ...]
    elapsed: float


@dataclass(frozen=True)
class CycleInfo:
    """Detected cycle: entry[i] = searches of box i before the cycle
    begins; pattern = the x_hat boxes repeated forever after entry."""

    entry: tuple[int, ...]
    pattern: tuple[int, ...]


class _GittinsDriver:
    """Streams the next box of a Gittins sequence against p.

    Maintains current index values by one multiplication per step; drift
    versus recomputing powers is ~1 ulp per step, far below the tie
    tolerance. An optional forced prefix pins the first n searches to
    sigma (used for sequences against p0, whose starting tie is exact)."""

    __slots__ = ("alpha", "t", "idx", "rank", "tol", "forced", "pos")

    def __init__(self, game: SearchGame, p: HidingStrategy, order: TieOrdering,
                 forced_prefix: tuple[int, ...] | None = None,
                 tie_rel_tol: float = TIE_REL_TOL):
        self.alpha = game.alpha
        self.t = game.t
        self.idx = [
            pi * ai / ti for pi, ai, ti in zip(p.p, game.alpha, game.t)
        ]
        self.rank = order.rank()
        self.tol = tie_rel_tol
        self.forced = forced_prefix
        self.pos = 0

    def step(self) -> int:
        if self.forced is not None and self.pos < len(self.forced):
            choice = self.forced[self.pos]
        else:
            idx = self.idx
            best = max(idx)
            if best <= 0.0:
                raise NumericalFailure(
                    "all Gittins indices are zero (underflow or empty support)"
                )
            cut = best - best * self.tol
            choice = -1
            choice_rank = len(idx)
            for i, v in enumerate(idx):
                if v >= cut and self.rank[i] < choice_rank:
                    choice = i
                    choice_rank = self.rank[i]
        self.idx[choice] *= 1.0 - self.alpha[choice]
        self.pos += 1
        return choice

    def can_visit(self, i: int, visits_so_far: int) -> bool:
        # index 0 means the box is never searched again: p_i = 0, or a
        # perfect box already searched once
        return self.idx[i] > 0.0


class _PatternDriver:
    """Streams a fixed pattern of boxes, repeated indefinitely."""

    __slots__ = ("pattern", "pos")

    def __init__(self, pattern: tuple[int, ...], pos: int = 0):
        self.pattern = pattern
        self.pos = pos

    def step(self) -> int:
        b = self.pattern[self.pos]
        self.pos += 1
        if self.pos == len(self.pattern):
            self.pos = 0
        return b

    def can_visit(self, i: int, visits_so_far: int) -> bool:
        return i in self.pattern


class SearchSequence:
    """A lazily extendable search sequence with memoized visit times.

    boxes holds the realized prefix; visit time tau_i(r) (completion time
    of the r-th search of box i, r >= 1) is available once realized.
    Completed prefixes are append-only, so values handed out never change.
    """

    __slots__ = (
        "game", "_boxes", "_visits", "_elapsed", "_driver", "cycle",
        "degenerate_support", "_payoff_cache",
    )

    def __init__(self, game: SearchGame, driver=None,
                 boxes: tuple[int, ...] = (), cycle: CycleInfo | None = None,
                 degenerate_support: bool = False):
        self.game = game
        self._boxes: list[int] = []
        self._visits: list[list[float]] = [[] for _ in range(game.n)]
        self._elapsed = 0.0
        self._driver = driver
        self.cycle = cycle
        self.degenerate_support = degenerate_support
        self._payoff_cache: dict = {}
        for b in boxes:
            self._append(b)

    def _append(self, b: int) -> None:
        self._boxes.append(b)
        self._elapsed += self.game.t[b]
        self._visits[b].append(self._elapsed)

    def _extend_once(self) -> None:
        if self._driver is None:
            raise InsufficientPrefix(
                f"sequence of length {len(self._boxes)} is not extendable"
            )
        self._append(self._driver.step())

    def __len__(self) -> int:
        return len(self._boxes)

    def ensure_length(self, length: int) -> None:
        while len(self._boxes) < length:
            self._extend_once()

    def prefix(self, length: int) -> tuple[int, ...]:
        self.ensure_length(length)
        return tuple(self._boxes[:length])

    def num_visits(self, i: int) -> int:
        return len(self._visits[i])

    def can_visit_more(self, i: int) -> bool:
        """Whether further extension can ever add another visit of box i."""
        if self._driver is None:
            return False
        return self._driver.can_visit(i, len(self._visits[i]))

    def ensure_visits(self, i: int, count: int) -> None:
        while len(self._visits[i]) < count:
            if not self.can_visit_more(i):
                raise InsufficientPrefix(
                    f"box {i} reaches only {len(self._visits[i])} visits; "
                    f"{count} requested"
                )
            self._extend_once()

    def visit_times(self, i: int) -> list[float]:
        """Realized completion times of searches of box i (read-only use)."""
        return self._visits[i]

    def state(self, after: int | None = None) -> SearchState:
        """SearchState after the first `after` searches (default: all
        realized)."""
        if after is None:
            after = len(self._boxes)
        self.ensure_length(after)
        searched = [0] * self.game.n
        elapsed = 0.0
        for b in self._boxes[:after]:
            searched[b] += 1
            elapsed += self.game.t[b]
        return SearchState(searched=tuple(searched), elapsed=elapsed)

    def visit_time(self, i: int, r: int) -> float:
        """tau_i(r): completion time of the r-th search of box i (r >= 1)."""
        self.ensure_visits(i, r)
        return self._visits[i][r - 1]

    def to_jsonable(self, length: int | None = None) -> dict:
        """Serialize as a 1-based box list, plus the cycle when detected."""
        if length is None:
            length = len(self._boxes)
        out: dict = {"boxes": [b + 1 for b in self.prefix(length)]}
        if self.cycle is not None:
            out["cycle"] = {
                "pattern": [b + 1 for b in self.cycle.pattern],
                "entry": list(self.cycle.entry),
            }
        return out


def from_pattern(game: SearchGame, pattern: tuple[int, ...] | list[int],
                 cycle: CycleInfo | None = None) -> SearchSequence:
    """Sequence repeating `pattern` forever (testing and round-robin use)."""
    pattern = tuple(pattern)
    if not pattern:
        raise EmptyGame("pattern must be nonempty")
    if any(not 0 <= b < game.n for b in pattern):
        raise InvalidGameError(f"pattern {pattern} has out-of-range boxes")
    return SearchSequence(game, driver=_PatternDriver(pattern), cycle=cycle)


def from_boxes(game: SearchGame, boxes) -> SearchSequence:
    """Finite, non-extendable sequence (requests past its end fail)."""
    return SearchSequence(game, driver=None, boxes=tuple(boxes))


def gittins_sequence(
    game: SearchGame,
    p: HidingStrategy,
    order: TieOrdering | None = None,
    horizon: int = 0,
    force_sigma_prefix: bool = False,
    tie_rel_tol: float = TIE_REL_TOL,
) -> SearchSequence:
    """Gittins search sequence against p under tie ordering `order`.

    Realizes the first `horizon` searches immediately; the sequence stays
    extendable afterwards. force_sigma_prefix pins the first n searches to
    sigma's order, which is exact when p = p0 (all starting indices tie).
    Boxes with p_i = 0 are never searched; the sequence is then flagged
    degenerate_support.

    tie_rel_tol = 0 compares indices directly: whatever comes out is still
    a Gittins sequence (of the rounded index process), which is all a best
    response needs. The nonzero default exists to recognize the designed
    tie at p0 and hand-crafted degenerate inputs deterministically.
    """
    if p.n != game.n:
        raise InvalidHidingStrategy("strategy length differs from box count")
    if order is None:
        order = TieOrdering.identity(game.n)
    forced = order.sigma if force_sigma_prefix else None
    driver = _GittinsDriver(
        game, p, order, forced_prefix=forced, tie_rel_tol=tie_rel_tol
    )
    seq = SearchSequence(
        game, driver=driver, degenerate_support=not p.full_support
    )
    seq.ensure_length(horizon)
    return seq


def replay_check(game: SearchGame, p: HidingStrategy, seq: SearchSequence,
                 rel_tol: float = TIE_REL_TOL, length: int | None = None) -> bool:
    """Verify each realized choice attains the maximal index within rel_tol.

    Recomputes every index from scratch per step, independently of the
    incremental generator.
    """
    if length is None:
        length = len(seq)
    boxes = seq.prefix(length)
    m = [0] * game.n
    for step in range(length):
        b = boxes[step]
        vals = [
            gittins_index(p.p[i], game.alpha[i], game.t[i], m[i])
            for i in range(game.n)
        ]
        best = max(vals)
        if vals[b] < best - best * rel_tol:
            return False
        m[b] += 1
    return True


def _integer_rule_pattern(game: SearchGame, order: TieOrdering) -> tuple[int, ...]:
    """One cycle of the exact integer rule for a cyclic game started at p0.

    Searching argmax x_i/r_i (i.e. the smallest fraction r_i/x_i of its
    cycle quota used) reproduces the index order exactly; ties, including
    the all-boxes tie at the start and end of each cycle, go to sigma.
    """
    x = game.cyclic.x
    n = game.n
    rank = order.rank()
    r = [0] * n
    pattern = []
    for _ in range(game.cyclic.x_hat):
        choice = min(
            range(n), key=lambda i: (Fraction(r[i], x[i]), rank[i])
        )
        pattern.append(choice)
        r[choice] += 1
    assert r == list(x)
    return tuple(pattern)


def cyclic_sequence(
    game: SearchGame,
    p: HidingStrategy | None = None,
    order: TieOrdering | None = None,
    tie_rel_tol: float = TIE_REL_TOL,
) -> SearchSequence:
    """Search sequence for a cyclic game, with its cycle identified.

    Started at p0 (the default), the exact integer rule yields a sequence
    that cycles from the first search: entry 0 for every box and a pattern
    of x_hat searches visiting box i exactly x_i times. For any other p,
    float generation runs until x_hat consecutive searches contain exactly
    x_i visits of box i; the posterior then equals its value at the window
    start, so the window repeats forever and is installed as the pattern.
    """
    if game.cyclic is None:
        raise NotCyclic("game has no cyclic structure")
    if order is None:
        order = TieOrdering.identity(game.n)
    base = p0(game)
    if p is None:
        p = base
    n = game.n
    x = game.cyclic.x
    x_hat = game.cyclic.x_hat

    at_p0 = all(
        abs(pi - bi) <= 1e-12 * bi for pi, bi in zip(p.p, base.p)
    )
    if at_p0:
        pattern = _integer_rule_pattern(game, order)
        return from_pattern(
            game, pattern, cycle=CycleInfo(entry=(0,) * n, pattern=pattern)
        )
    if not p.full_support:
        # a counter to degenerate p skips the zero boxes, so no window
        # ever reaches the full per-box quotas
        raise NoCycleDetected("no cycle exists without full support")

    driver = _GittinsDriver(game, p, order, tie_rel_tol=tie_rel_tol)
    boxes: list[int] = []
    window_counts = [0] * n
    budget = _CYCLE_STEP_BUDGET_FACTOR * x_hat
    for step in range(budget):
        b = driver.step()
        boxes.append(b)
        window_counts[b] += 1
        if step >= x_hat:
            window_counts[boxes[step - x_hat]] -= 1
        if step >= x_hat - 1 and window_counts == list(x):
            start = step - x_hat + 1
            pattern = tuple(boxes[start : start + x_hat])
            entry = tuple(
                sum(1 for bb in boxes[:start] if bb == i) for i in range(n)
            )
            seq = SearchSequence(
                game,
                driver=_PatternDriver(pattern),
                boxes=tuple(boxes[:start]),
                cycle=CycleInfo(entry=entry, pattern=pattern),
                degenerate_support=not p.full_support,
            )
            return seq
    raise NoCycleDetected(
        f"no cycle of {x_hat} searches found within {budget} steps"
    )
