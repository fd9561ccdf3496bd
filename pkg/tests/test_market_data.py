import datetime as dt

import numpy as np
import pytest

from wvar.errors import DataError
from wvar.market_data import (
    CsvSchema,
    PriceSeries,
    ReturnSeries,
    WindowSpec,
    compute_returns,
    load_price_csv,
    windows,
)


def write_csv(tmp_path, text, name="prices.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def day(offset):
    return dt.date(2020, 1, 1) + dt.timedelta(days=offset)


def make_return_series(values, asset_id="X"):
    return ReturnSeries(asset_id, tuple(day(i) for i in range(len(values))), np.asarray(values))


class TestLoadPriceCsv:
    def test_three_row_readback(self, tmp_path):
        path = write_csv(tmp_path, "date,AAA\n2020-01-01,100\n2020-01-02,110\n2020-01-03,99\n")
        series_list = load_price_csv(path)
        assert len(series_list) == 1
        series = series_list[0]
        assert series.asset_id == "AAA"
        assert len(series) == 3
        assert np.allclose(series.closes, [100.0, 110.0, 99.0])

    def test_duplicate_date_error_names_the_date(self, tmp_path):
        path = write_csv(
            tmp_path, "date,AAA\n2020-01-01,100\n2020-01-02,110\n2020-01-02,99\n"
        )
        with pytest.raises(DataError, match="2020-01-02"):
            load_price_csv(path)

    def test_fixture_has_two_full_length_series(self, two_assets_csv):
        series_list = load_price_csv(two_assets_csv)
        assert [s.asset_id for s in series_list] == ["EQ", "BD"]
        assert all(len(s) == 2262 for s in series_list)
        assert series_list[0].dates[0] == dt.date(2003, 10, 3)
        assert series_list[0].dates[-1] == dt.date(2012, 9, 28)

    def test_rows_sorted_by_date(self, tmp_path):
        path = write_csv(
            tmp_path, "date,AAA\n2020-01-03,99\n2020-01-01,100\n2020-01-02,110\n"
        )
        (series,) = load_price_csv(path)
        assert np.allclose(series.closes, [100.0, 110.0, 99.0])

    def test_blank_cell_drops_row_for_all_assets(self, tmp_path):
        path = write_csv(
            tmp_path,
            "date,AAA,BBB\n2020-01-01,100,50\n2020-01-02,,51\n2020-01-03,99,52\n",
        )
        first, second = load_price_csv(path)
        assert len(first) == len(second) == 2
        assert first.dates == second.dates

    def test_nonpositive_price_drops_row(self, tmp_path):
        path = write_csv(
            tmp_path, "date,AAA\n2020-01-01,100\n2020-01-02,-3\n2020-01-03,99\n"
        )
        (series,) = load_price_csv(path)
        assert len(series) == 2

    def test_unparseable_date_drops_row(self, tmp_path):
        path = write_csv(
            tmp_path, "date,AAA\n2020-01-01,100\nnot-a-date,5\n2020-01-03,99\n"
        )
        (series,) = load_price_csv(path)
        assert len(series) == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_price_csv(tmp_path / "absent.csv")

    def test_malformed_header(self, tmp_path):
        path = write_csv(tmp_path, "date\n2020-01-01\n")
        with pytest.raises(DataError):
            load_price_csv(path)

    def test_schema_selects_columns(self, tmp_path):
        path = write_csv(
            tmp_path,
            "day,AAA,BBB\n2020-01-01,100,50\n2020-01-02,101,51\n",
        )
        series_list = load_price_csv(path, CsvSchema(date_column="day", asset_columns=("BBB",)))
        assert [s.asset_id for s in series_list] == ["BBB"]

    def test_schema_unknown_column(self, tmp_path):
        path = write_csv(tmp_path, "date,AAA\n2020-01-01,100\n")
        with pytest.raises(DataError):
            load_price_csv(path, CsvSchema(date_column="nope"))


class TestComputeReturns:
    def test_hand_arithmetic(self):
        prices = PriceSeries("X", (day(0), day(1), day(2)), np.array([100.0, 110.0, 99.0]))
        returns = compute_returns(prices)
        assert np.allclose(returns.returns, [0.10, -0.10])
        assert returns.dates == (day(1), day(2))

    def test_constant_prices_zero_returns(self):
        prices = PriceSeries("X", (day(0), day(1), day(2)), np.array([50.0, 50.0, 50.0]))
        assert np.array_equal(compute_returns(prices).returns, [0.0, 0.0])

    def test_spreadsheet_recomputation_oracle(self):
        closes = np.array([100.0, 110.0, 99.0, 108.9])
        prices = PriceSeries("X", tuple(day(i) for i in range(4)), closes)
        expected = np.diff(closes) / closes[:-1]
        returns = compute_returns(prices)
        assert np.allclose(returns.returns, expected, atol=1e-15)
        assert np.allclose(returns.returns, [0.10, -0.10, 0.10])

    def test_too_short(self):
        prices = PriceSeries("X", (day(0),), np.array([100.0]))
        with pytest.raises(DataError):
            compute_returns(prices)

    def test_round_trip_reconstructs_prices(self, two_assets_csv):
        for prices in load_price_csv(two_assets_csv):
            returns = compute_returns(prices)
            rebuilt = prices.closes[0] * np.cumprod(1.0 + returns.returns)
            assert np.allclose(rebuilt, prices.closes[1:], rtol=1e-12)


class TestWindows:
    def test_rolling_count_matches_table_arithmetic(self):
        # 253 + 250 observations, length 250, step 1 -> 253 windows
        series = make_return_series(np.zeros(503))
        out = windows(series, WindowSpec("rolling", 250, 1))
        assert len(out) == 253
        assert all(len(w.in_sample) == 250 for w in out)

    def test_minimal_rolling(self):
        series = make_return_series([0.1, 0.2, 0.3])
        out = windows(series, WindowSpec("rolling", 2, 1))
        assert len(out) == 1
        assert out[0].next_return == pytest.approx(0.3)

    def test_expanding_enumeration(self):
        series = make_return_series(np.arange(10) / 100.0)
        out = windows(series, WindowSpec("expanding", 5, 1))
        assert len(out) == 5
        assert [len(w.in_sample) for w in out] == [5, 6, 7, 8, 9]
        assert [w.next_return for w in out] == pytest.approx([0.05, 0.06, 0.07, 0.08, 0.09])

    def test_step_skips_windows(self):
        series = make_return_series(np.zeros(503))
        out = windows(series, WindowSpec("rolling", 250, 10))
        assert len(out) == 26

    def test_too_short_series(self):
        series = make_return_series([0.1, 0.2])
        with pytest.raises(DataError):
            windows(series, WindowSpec("rolling", 2, 1))

    def test_no_look_ahead(self, two_assets_csv):
        series = compute_returns(load_price_csv(two_assets_csv)[0])
        for spec in (WindowSpec("rolling", 250, 21), WindowSpec("expanding", 500, 63)):
            for window in windows(series, spec):
                assert max(window.in_sample.dates) < window.next_date


class TestSpecValidation:
    def test_rolling_needs_length_two(self):
        with pytest.raises(ValueError):
            WindowSpec("rolling", 1, 1)

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            WindowSpec("sliding", 10, 1)

    def test_bad_step(self):
        with pytest.raises(ValueError):
            WindowSpec("rolling", 10, 0)


class TestSeriesInvariants:
    def test_prices_must_be_positive(self):
        with pytest.raises(DataError):
            PriceSeries("X", (day(0), day(1)), np.array([100.0, 0.0]))

    def test_dates_strictly_increasing(self):
        with pytest.raises(DataError, match="2020-01-01"):
            PriceSeries("X", (day(0), day(0)), np.array([100.0, 101.0]))

    def test_return_series_slice(self):
        series = make_return_series([0.1, 0.2, 0.3, 0.4])
        part = series.slice(1, 3)
        assert np.allclose(part.returns, [0.2, 0.3])
        assert part.dates == (day(1), day(2))
