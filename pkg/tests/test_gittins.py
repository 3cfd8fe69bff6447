"""Sequence generation, tie-breaking, orderings, and cycle detection."""

import numpy as np
import pytest

from boxsearch import (
    SCHEMES,
    HidingStrategy,
    SearchGame,
    all_orderings,
    cyclic_sequence,
    gittins_index,
    gittins_sequence,
    initial_orderings,
    make_cyclic_game,
    p0,
    sample_game,
)
from boxsearch.errors import CapExceeded, InsufficientPrefix, NotCyclic
from boxsearch.gittins import TieOrdering, from_boxes, from_pattern, replay_check
from boxsearch.payoff import tail_params


class TestGittinsIndex:
    def test_direct_products(self):
        assert gittins_index(0.5, 0.5, 1.0, 0) == 0.25
        assert gittins_index(0.5, 0.5, 1.0, 2) == 0.0625
        assert gittins_index(0.0, 0.3, 2.0, 5) == 0.0


class TestOrderings:
    def test_rotations(self):
        assert [o.sigma for o in initial_orderings(3)] == [
            (0, 1, 2), (1, 2, 0), (2, 0, 1)
        ]
        assert [o.sigma for o in initial_orderings(1)] == [(0,)]
        assert [o.sigma for o in initial_orderings(2)] == [(0, 1), (1, 0)]

    def test_all_orderings_counts(self):
        assert len(all_orderings(2)) == 2
        assert len(all_orderings(3)) == 6

    def test_cap(self):
        with pytest.raises(CapExceeded):
            all_orderings(9)
        assert len(all_orderings(4, cap=4)) == 24

    def test_ordering_must_be_permutation(self):
        with pytest.raises(Exception):
            TieOrdering((0, 0, 1))


class TestGittinsSequence:
    def test_symmetric_tie_toward_sigma(self):
        game = SearchGame(t=(1.0, 1.0), alpha=(0.5, 0.5))
        seq = gittins_sequence(
            game, HidingStrategy((0.5, 0.5)), TieOrdering((1, 0)), horizon=4
        )
        assert seq.prefix(4) == (1, 0, 1, 0)

    def test_hand_traced_asymmetric(self):
        # indices: 0.3,0.3 tie -> box0; 0.075 vs 0.3 -> box1; 0.075 vs
        # 0.15 -> box1; 0.075,0.075 tie -> box0; cycle (0,1,1)
        game = SearchGame(t=(1.0, 1.0), alpha=(0.75, 0.5))
        seq = gittins_sequence(game, p0(game), TieOrdering((0, 1)), horizon=6)
        assert seq.prefix(6) == (0, 1, 1, 0, 1, 1)

    def test_zero_mass_box_never_searched(self):
        game = SearchGame(t=(1.0, 1.0), alpha=(0.5, 0.5))
        seq = gittins_sequence(game, HidingStrategy((1.0, 0.0)), horizon=5)
        assert seq.prefix(5) == (0, 0, 0, 0, 0)
        assert seq.degenerate_support

    def test_replay_on_sampled_games(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            n = int(rng.integers(2, 6))
            game = sample_game(SCHEMES["varied"], n, rng)
            raw = rng.uniform(0.05, 1.0, size=n)
            p = HidingStrategy(tuple(raw / raw.sum()))
            seq = gittins_sequence(game, p, horizon=120)
            assert replay_check(game, p, seq)

    def test_every_box_in_every_window(self):
        # against full support, each window of n*l searches hits every box
        rng = np.random.default_rng(22)
        for _ in range(10):
            n = int(rng.integers(2, 5))
            game = sample_game(SCHEMES["varied"], n, rng)
            p = p0(game)
            window = n * tail_params(game).l
            seq = gittins_sequence(game, p, horizon=6 * window)
            boxes = seq.prefix(6 * window)
            for start in range(len(boxes) - window + 1):
                assert set(boxes[start : start + window]) == set(range(n))

    def test_rotation_relabels_symmetric_game(self):
        game = SearchGame(t=(1.0,) * 3, alpha=(0.4,) * 3)
        p = p0(game)
        base = gittins_sequence(game, p, TieOrdering((0, 1, 2)), horizon=30)
        for shift in (1, 2):
            sigma = tuple((i + shift) % 3 for i in range(3))
            rotated = gittins_sequence(game, p, TieOrdering(sigma), horizon=30)
            relabeled = tuple((b + shift) % 3 for b in base.prefix(30))
            assert rotated.prefix(30) == relabeled

    def test_forced_prefix_matches_tolerant_ties(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            n = int(rng.integers(2, 6))
            game = sample_game(SCHEMES["varied"], n, rng)
            sigma = initial_orderings(n)[1 % n]
            free = gittins_sequence(game, p0(game), sigma, horizon=50)
            forced = gittins_sequence(
                game, p0(game), sigma, horizon=50, force_sigma_prefix=True
            )
            assert free.prefix(50) == forced.prefix(50)


class TestSearchSequence:
    def test_lazy_extension_and_visit_times(self):
        game = SearchGame(t=(1.0, 2.0), alpha=(0.5, 0.5))
        seq = from_pattern(game, (0, 1))
        assert seq.visit_time(0, 2) == 4.0  # 0 at 1, 1 at 3, 0 at 4
        assert seq.visit_time(1, 1) == 3.0
        assert len(seq) == 3  # extension stops as soon as the visit exists

    def test_finite_sequences_do_not_extend(self):
        game = SearchGame(t=(1.0, 1.0), alpha=(0.5, 0.5))
        seq = from_boxes(game, (0, 0, 0))
        with pytest.raises(InsufficientPrefix):
            seq.ensure_visits(1, 1)
        with pytest.raises(InsufficientPrefix):
            seq.ensure_length(4)

    def test_state_snapshot(self):
        game = SearchGame(t=(1.0, 2.0), alpha=(0.5, 0.5))
        seq = from_pattern(game, (0, 1, 1))
        state = seq.state(after=5)
        assert state.searched == (2, 3)
        assert state.elapsed == sum(
            m * t for m, t in zip(state.searched, game.t)
        )

    def test_serialization_is_one_based(self):
        game = make_cyclic_game(0.25, (1, 2), (1.0, 1.0))
        seq = cyclic_sequence(game)
        payload = seq.to_jsonable(length=6)
        assert payload["boxes"] == [1, 2, 2, 1, 2, 2]
        assert payload["cycle"] == {"pattern": [1, 2, 2], "entry": [0, 0]}


class TestCyclicSequence:
    def test_integer_rule_identity_order(self):
        game = make_cyclic_game(0.25, (1, 2), (1.0, 1.0))
        seq = cyclic_sequence(game, order=TieOrdering((0, 1)))
        assert seq.cycle.pattern == (0, 1, 1)
        assert seq.cycle.entry == (0, 0)

    def test_integer_rule_reversed_order(self):
        game = make_cyclic_game(0.25, (1, 2), (1.0, 1.0))
        seq = cyclic_sequence(game, order=TieOrdering((1, 0)))
        assert seq.cycle.pattern == (1, 0, 1)

    def test_requires_cyclic_structure(self):
        game = SearchGame(t=(1.0, 1.0), alpha=(0.5, 0.5))
        with pytest.raises(NotCyclic):
            cyclic_sequence(game)

    def test_integer_rule_agrees_with_float_generation(self):
        rng = np.random.default_rng(31)
        for _ in range(15):
            n = int(rng.integers(1, 5))
            x = [int(v) for v in rng.integers(1, 4, size=n)]
            x[int(rng.integers(0, n))] = 1
            game = make_cyclic_game(
                float(rng.uniform(0.1, 0.9)), x,
                [float(v) for v in rng.uniform(1, 5, size=n)],
            )
            sigma = TieOrdering(tuple(rng.permutation(n).tolist()))
            exact = cyclic_sequence(game, order=sigma)
            floaty = gittins_sequence(
                game, p0(game), sigma, force_sigma_prefix=True
            )
            span = 3 * game.cyclic.x_hat
            assert exact.prefix(span) == floaty.prefix(span)

    def test_general_p_cycle_detection(self):
        game = make_cyclic_game(0.25, (1, 2), (1.0, 1.0))
        p = HidingStrategy((0.55, 0.45))
        seq = cyclic_sequence(game, p)
        assert seq.cycle is not None
        x = game.cyclic.x
        counts = [seq.cycle.pattern.count(i) for i in range(game.n)]
        assert counts == list(x)
        # the sealed continuation is a genuine Gittins sequence
        assert replay_check(game, p, seq, length=40)
