import numpy as np
import pytest

from claimpi.data import (
    AUTOBI_PREDICTORS,
    AUTOBI_TRANSFORM,
    load_csv,
    prepare,
    realdata_experiment,
    summarize,
    summarize_columns,
    write_csv,
)
from claimpi.errors import DataError, NonnegativityError
from claimpi.intervals import RegressionSample, constrained_interval, unsupervised_claim_interval
from claimpi.order_statistics import upper_rank
from claimpi.transform import parse


def test_fixture_shape(fixture_csv):
    table = load_csv(fixture_csv)
    assert table.n_rows == 30
    assert table.header == ("CASENUM", "ATTORNEY", "CLMSEX", "MARITAL", "CLMINSUR", "SEATBELT", "CLMAGE", "LOSS")
    assert table.missing_count == 9


def test_round_trip(fixture_csv, tmp_path):
    table = load_csv(fixture_csv)
    out = tmp_path / "copy.csv"
    write_csv(table, out)
    assert load_csv(out) == table


def test_short_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n3\n")
    with pytest.raises(DataError, match="line 3"):
        load_csv(path)


def test_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("LOSS,CLMAGE\n")
    table = load_csv(path)
    assert table.n_rows == 0 and table.header == ("LOSS", "CLMAGE")


def test_quoted_fields_and_custom_markers(tmp_path):
    path = tmp_path / "q.csv"
    path.write_text('"LOSS","X"\n"1.5",NA\n2,"3"\n')
    table = load_csv(path, missing_markers=("NA",))
    assert table.columns == {"LOSS": [1.5, 2.0], "X": [None, 3.0]}


def test_non_numeric_token(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("LOSS\nabc\n")
    with pytest.raises(DataError):
        load_csv(path)


def test_unreadable(tmp_path):
    with pytest.raises(DataError):
        load_csv(tmp_path / "nope.csv")


class TestPrepare:
    def test_autobi_selection(self, fixture_csv):
        table = load_csv(fixture_csv)
        ds = prepare(table)
        assert ds.sample.n == 30 and ds.sample.p == 5
        assert ds.predictors == AUTOBI_PREDICTORS
        assert not np.isnan(ds.sample.features).any()
        raw_missing = sum(v is None for name in ("LOSS",) + AUTOBI_PREDICTORS for v in table.column(name))
        assert ds.imputed_count == raw_missing == 9

    def test_no_predictors(self, fixture_csv):
        ds = prepare(load_csv(fixture_csv), predictors=())
        assert ds.sample.p == 0
        assert unsupervised_claim_interval(ds.sample.responses, 0.1).upper > 0

    def test_negative_response(self, tmp_path):
        path = tmp_path / "neg.csv"
        path.write_text("LOSS,A\n1,1\n-2,1\n")
        with pytest.raises(DataError):
            prepare(load_csv(path), predictors=("A",))

    def test_unknown_column(self, fixture_csv):
        with pytest.raises(DataError):
            prepare(load_csv(fixture_csv), predictors=("NOPE",))


class TestSummarize:
    def test_matches_sorted_ranks(self, fixture_csv):
        ds = prepare(load_csv(fixture_csv))
        stats = summarize(ds)
        loss = np.sort(ds.sample.responses)
        s = stats["LOSS"]
        assert (s.minimum, s.q1, s.median, s.q3, s.maximum) == (loss[0], loss[7], loss[14], loss[22], loss[29])
        assert s.mean == pytest.approx(loss.mean(), rel=1e-15)
        assert list(stats) == ["LOSS", *AUTOBI_PREDICTORS]

    def test_constant_column(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text("A\n" + "4.5\n" * 9)
        s = summarize_columns(load_csv(path), ["A"])["A"]
        assert {s.minimum, s.q1, s.median, s.q3, s.maximum, s.mean} == {4.5}


class TestRealData:
    def test_fixture_run(self, fixture_csv):
        ds = prepare(load_csv(fixture_csv))
        h = parse(AUTOBI_TRANSFORM, 5)
        rows = realdata_experiment(ds, h, (0.1, 0.2))
        y = ds.sample.responses
        train = RegressionSample(ds.sample.features[:-1], y[:-1])
        for row in rows:
            assert row.baseline_upper in y
            assert row.baseline_upper == np.sort(y[:-1])[upper_rank(29, row.alpha) - 1]
            assert row.transform_upper == constrained_interval(train, h, ds.sample.features[-1], row.alpha).upper

    def test_zero_transform_equals_baseline(self, fixture_csv):
        ds = prepare(load_csv(fixture_csv))
        for row in realdata_experiment(ds, parse("0", 5), (0.1, 0.075, 0.05, 0.025)):
            assert row.transform_upper == row.baseline_upper

    def test_single_alpha(self, fixture_csv):
        ds = prepare(load_csv(fixture_csv))
        assert len(realdata_experiment(ds, parse(AUTOBI_TRANSFORM, 5), (0.5,))) == 1

    def test_negative_transform_rejected(self, fixture_csv):
        ds = prepare(load_csv(fixture_csv))
        with pytest.raises(NonnegativityError):
            realdata_experiment(ds, parse("t5 - 50", 5), (0.1,))
