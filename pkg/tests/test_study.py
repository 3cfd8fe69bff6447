"""Batch harness, statistics, Ruckle sweep, two-box study, CSV round-trips."""

import pytest

from boxsearch import SCHEMES, future_benefit, ruckle_sweep, run_batch, summarize
from boxsearch.errors import BoxSearchError, EmptyGame
from boxsearch.study import (
    BatchRecord,
    extract_tie_index,
    read_batch_csv,
    read_ruckle_csv,
    two_box_games,
    two_box_study,
    write_batch_csv,
    write_ruckle_csv,
)


def record(**overrides) -> BatchRecord:
    base = dict(
        index=0, scheme="varied", t=(1.0, 2.0), alpha=(0.3, 0.7),
        v_star=5.0, u_p0=5.0, p0_optimal=True, pct_below=0.0,
        iterations=0, wall_time=0.01, error=None,
    )
    base.update(overrides)
    return BatchRecord(**base)


class TestRunBatch:
    def test_single_game_reproducible(self):
        a = run_batch(SCHEMES["high"], 2, 1, epsilon=1e-3, seed=11)
        b = run_batch(SCHEMES["high"], 2, 1, epsilon=1e-3, seed=11)
        assert len(a) == 1
        assert a[0] == b[0] or (
            # wall_time is the only nondeterministic field
            a[0].v_star == b[0].v_star
            and a[0].u_p0 == b[0].u_p0
            and a[0].pct_below == b[0].pct_below
            and a[0].iterations == b[0].iterations
        )

    def test_heuristic_never_beats_optimum(self):
        records = run_batch(SCHEMES["varied"], 2, 30, epsilon=1e-6, seed=12)
        for r in records:
            assert r.error is None
            assert r.u_p0 <= r.v_star * (1 + 1e-9)
            assert r.pct_below >= -1e-6
            if r.p0_optimal:
                assert r.pct_below < 1e-5
                assert r.iterations == 0
            else:
                assert r.iterations >= 1

    def test_skips_test_above_cap(self):
        records = run_batch(
            SCHEMES["high"], 2, 2, epsilon=1e-3, seed=13, p0_test_cap=1
        )
        assert all(r.p0_optimal is None for r in records)
        assert all(r.iterations >= 1 for r in records)

    def test_per_game_failure_recorded_batch_continues(self, monkeypatch):
        import boxsearch.study as study_mod
        from boxsearch.errors import NumericalFailure

        calls = {"n": 0}
        original = study_mod.test_p0_optimality

        def flaky(game, **kwargs):
            calls["n"] += 1
            if calls["n"] == 2:
                raise NumericalFailure("injected")
            return original(game, **kwargs)

        monkeypatch.setattr(study_mod, "test_p0_optimality", flaky)
        records = run_batch(SCHEMES["high"], 2, 3, epsilon=1e-3, seed=18)
        assert len(records) == 3
        assert records[1].error == "NumericalFailure: injected"
        assert records[0].error is None and records[2].error is None


class TestSummarize:
    def test_all_optimal(self):
        stats = summarize([record(), record(index=1)])
        assert stats.mean_pct_below == 0.0
        assert stats.p95_pct_below == 0.0
        assert stats.frac_p0_optimal == 1.0
        assert stats.mean_iterations is None

    def test_mean_of_two(self):
        stats = summarize([
            record(),
            record(index=1, p0_optimal=False, pct_below=2.0, iterations=4),
        ])
        assert stats.mean_pct_below == 1.0
        assert stats.frac_p0_optimal == 0.5
        assert stats.mean_iterations == 4.0

    def test_empty_batch(self):
        with pytest.raises(EmptyGame):
            summarize([])
        with pytest.raises(EmptyGame):
            summarize([record(error="NumericalFailure: boom")])

    def test_untested_records_have_no_fraction(self):
        stats = summarize([record(p0_optimal=None, iterations=3)])
        assert stats.frac_p0_optimal is None


class TestRuckleSweep:
    def test_table_values(self):
        records = {r.alpha: r for r in ruckle_sweep([0.7, 0.5, 0.3])}
        assert records[0.7].h == 1
        assert records[0.7].p_star_1 == pytest.approx(1 / 1.7, rel=1e-9)
        assert records[0.5].h == 2
        assert records[0.5].p_star_1 == pytest.approx(0.8, rel=1e-9)
        assert records[0.3].h == 3

    def test_h_one_iff_p0(self):
        for r in ruckle_sweep([0.65, 0.6]):
            if r.h == 1:
                assert r.p_star_1 == pytest.approx(r.p0_1, abs=1e-6)
            else:
                assert r.p_star_1 > r.p0_1 + 1e-6

    def test_extract_tie_index_at_kinks(self):
        for alpha, h in ((0.5, 2), (0.3, 3), (0.35, 3)):
            p = 1.0 / (1.0 + alpha * (1.0 - alpha) ** (h - 1))
            assert extract_tie_index(alpha, p) == h


class TestTwoBoxStudy:
    def test_relabel_postcondition(self):
        for game in two_box_games(25, seed=14):
            assert future_benefit(game, 0) <= future_benefit(game, 1)

    def test_counts_partition(self):
        result = two_box_study(20, seed=15, epsilon=1e-5)
        assert result.n_pstar_greater + result.n_pstar_smaller == result.n_suboptimal
        assert result.n_suboptimal <= 20

    def test_single_game_contract(self):
        result = two_box_study(1, seed=16)
        assert result.n_suboptimal in (0, 1)
        if result.n_suboptimal == 0:
            assert result == (0, 0, 0)


class TestCsvRoundTrip:
    def test_batch_records(self, tmp_path):
        records = run_batch(SCHEMES["medium"], 2, 4, epsilon=1e-3, seed=17)
        path = tmp_path / "batch.csv"
        write_batch_csv(records, path)
        assert read_batch_csv(path) == records
        assert path.read_text().startswith("# boxsearch-batch-v1")

    def test_batch_none_and_bool_fields(self, tmp_path):
        records = [
            record(),
            record(index=1, p0_optimal=None, iterations=7),
            record(index=2, p0_optimal=False, pct_below=0.25, iterations=3),
        ]
        path = tmp_path / "batch.csv"
        write_batch_csv(records, path)
        assert read_batch_csv(path) == records

    def test_ruckle_records(self, tmp_path):
        records = ruckle_sweep([0.7, 0.4])
        path = tmp_path / "ruckle.csv"
        write_ruckle_csv(records, path)
        assert read_ruckle_csv(path) == records

    def test_error_record_round_trip(self, tmp_path):
        import math as _math

        bad = record(
            index=9, v_star=_math.nan, u_p0=_math.nan,
            p0_optimal=None, pct_below=_math.nan,
            error="NumericalFailure: injected",
        )
        path = tmp_path / "batch.csv"
        write_batch_csv([bad], path)
        back = read_batch_csv(path)[0]
        assert back.error == bad.error
        assert back.index == 9
        assert _math.isnan(back.v_star) and _math.isnan(back.pct_below)

    def test_version_header_required(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("not,a,known,header\n")
        with pytest.raises(BoxSearchError):
            read_batch_csv(path)
        with pytest.raises(BoxSearchError):
            read_ruckle_csv(path)
