import numpy as np
import pytest

from tvpssm import DataFormatError, SyntheticSpec, generate_seasonal_series, load_series
from tvpssm.io import write_forecast_csv, write_series
from tvpssm.forecast import forecast_summary


def write_rows(path, rows, header="t,value"):
    path.write_text("\n".join([header] + rows) + "\n", encoding="utf-8")


class TestLoadSeries:
    def test_full_length_file(self, tmp_path):
        series = generate_seasonal_series(SyntheticSpec(n=288), seed=1)
        p = tmp_path / "s.csv"
        write_series(series, p)
        loaded = load_series(p)
        assert loaded.n == 288
        assert loaded.n_missing == 0

    def test_na_marks_missing(self, tmp_path):
        rows = [f"{t},{20.0 + t}" for t in range(1, 31)]
        rows[4] = "5,NA"
        rows[9] = "10,"
        p = tmp_path / "s.csv"
        write_rows(p, rows)
        loaded = load_series(p)
        assert loaded.n == 30
        assert list(loaded.missing_t) == [5, 10]

    def test_gap_names_line(self, tmp_path):
        rows = ["1,20.0", "2,21.0", "4,22.0"] + [f"{t},20" for t in range(4, 31)]
        p = tmp_path / "s.csv"
        write_rows(p, rows)
        with pytest.raises(DataFormatError, match="line 4"):
            load_series(p)

    def test_unparsable_value_names_line(self, tmp_path):
        rows = [f"{t},20.0" for t in range(1, 31)]
        rows[6] = "7,oops"
        p = tmp_path / "s.csv"
        write_rows(p, rows)
        with pytest.raises(DataFormatError, match="line 8"):
            load_series(p)

    def test_bad_header(self, tmp_path):
        p = tmp_path / "s.csv"
        write_rows(p, ["1,20.0"], header="time,val")
        with pytest.raises(DataFormatError, match="line 1"):
            load_series(p)

    def test_empty_file(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("", encoding="utf-8")
        with pytest.raises(DataFormatError, match="empty"):
            load_series(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataFormatError, match="no such file"):
            load_series(tmp_path / "nope.csv")

    def test_too_short_series_is_data_error(self, tmp_path):
        rows = [f"{t},20.0" for t in range(1, 11)]
        p = tmp_path / "s.csv"
        write_rows(p, rows)
        with pytest.raises(DataFormatError, match="too short"):
            load_series(p)

    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(5)
        values = rng.normal(25.0, 7.0, 60)
        values[[13, 40]] = np.nan
        series = generate_seasonal_series(SyntheticSpec(n=60), seed=0)
        series.values = values
        p = tmp_path / "s.csv"
        write_series(series, p)
        loaded = load_series(p)
        assert np.array_equal(loaded.values, values, equal_nan=True)


class TestForecastCsv:
    def test_rows_and_header(self, tmp_path):
        paths = np.random.default_rng(0).normal(size=(500, 12))
        summ = forecast_summary(paths)
        p = tmp_path / "f.csv"
        write_forecast_csv(summ, p)
        lines = p.read_text().splitlines()
        assert lines[0] == "h,median,lower,upper"
        assert len(lines) == 13
        first = lines[1].split(",")
        assert first[0] == "1"
        assert float(first[2]) <= float(first[1]) <= float(first[3])
