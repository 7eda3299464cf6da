"""Reader tests on hand-built fixture files."""

import json

import numpy as np
import pytest
from conftest import write_aggregate, write_collapse, write_fit_report

from miptkz_figures import InputError, read_aggregate, read_collapse, read_fit_report


class TestAggregate:
    def test_round_trip(self, tmp_path):
        g = np.array([0.1, 0.0, -0.1])
        path = write_aggregate(tmp_path, "a", g=g, mean=[1.0, 2.0, 3.0])
        agg = read_aggregate(path)
        series = agg.series("S_half")
        np.testing.assert_allclose(series["g"], g)
        np.testing.assert_allclose(series["mean"], [1.0, 2.0, 3.0])
        np.testing.assert_allclose(series["p"], g + 0.15995)
        assert series["sem"].shape == (3,)
        assert agg.meta["spec"]["L"] == 128

    def test_label_lookup(self, tmp_path):
        path = write_aggregate(tmp_path, "a", g=[0.0], mean=[1.0])
        agg = read_aggregate(path)
        assert agg.label("R") == pytest.approx(0.08)
        assert agg.label("L") == 128
        assert agg.label("direction") == "from_area"
        assert agg.label("p0") == pytest.approx(0.30995)

    def test_label_unknown_key_names_file(self, tmp_path):
        path = write_aggregate(tmp_path, "a", g=[0.0], mean=[1.0])
        agg = read_aggregate(path)
        with pytest.raises(InputError, match=r"a\.csv"):
            agg.label("no_such_key")

    def test_missing_sidecar(self, tmp_path):
        path = write_aggregate(tmp_path, "a", g=[0.0], mean=[1.0])
        (tmp_path / "a.meta.json").unlink()
        with pytest.raises(InputError, match=r"a\.meta\.json"):
            read_aggregate(path)

    def test_empty_csv_names_file(self, tmp_path):
        path = write_aggregate(tmp_path, "a", g=[0.0], mean=[1.0])
        path.write_text("")
        with pytest.raises(InputError, match=r"a\.csv"):
            read_aggregate(path)

    def test_missing_column_named(self, tmp_path):
        path = write_aggregate(tmp_path, "a", g=[0.0], mean=[1.0])
        text = "\n".join(
            ",".join(row.split(",")[:2] + row.split(",")[3:])
            for row in path.read_text().splitlines()
        )
        path.write_text(text + "\n")
        with pytest.raises(InputError) as err:
            read_aggregate(path)
        assert "a.csv" in str(err.value)
        assert "g" in str(err.value)

    def test_bad_numeric_cell_names_line_and_column(self, tmp_path):
        path = write_aggregate(tmp_path, "a", g=[0.0, 0.1], mean=[1.0, 2.0])
        lines = path.read_text().splitlines()
        cells = lines[2].split(",")
        cells[5] = "not-a-number"
        lines[2] = ",".join(cells)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(InputError) as err:
            read_aggregate(path)
        msg = str(err.value)
        assert "a.csv" in msg and "line 3" in msg and "mean" in msg

    def test_unknown_observable_lists_available(self, tmp_path):
        path = write_aggregate(tmp_path, "a", g=[0.0], mean=[1.0])
        agg = read_aggregate(path)
        with pytest.raises(InputError) as err:
            agg.series("S_Q")
        msg = str(err.value)
        assert "S_Q" in msg and "S_half" in msg and "a.csv" in msg

    def test_region_size_disambiguation(self, tmp_path):
        g = [0.1, 0.0]
        lines = ["t,p,g,observable,region_size,mean,sem,n_traj"]
        for size in (16, 32):
            for i, gv in enumerate(g):
                lines.append(
                    f"{i/2},{gv + 0.15995},{gv},S_region,{size},{1.0 + size},0.05,10"
                )
        path = tmp_path / "multi.csv"
        path.write_text("\n".join(lines) + "\n")
        meta = {
            "format": "miptkz-aggregate-v1",
            "spec": {"L": 64, "schedule": {"kind": "constant", "p": 0.15995}},
        }
        (tmp_path / "multi.meta.json").write_text(json.dumps(meta))
        agg = read_aggregate(path)
        with pytest.raises(InputError, match="region_size"):
            agg.series("S_region")
        series = agg.series("S_region", region_size=32)
        np.testing.assert_allclose(series["mean"], [33.0, 33.0])


class TestCollapse:
    def test_round_trip(self, tmp_path):
        x = np.linspace(0, 1, 5)
        curves = [
            {"x": x, "y": x**2, "yerr": np.full_like(x, 0.1)},
            {"x": x, "y": 1 - x, "yerr": np.full_like(x, 0.2)},
        ]
        path = write_collapse(
            tmp_path, "c", curves, labels=[{"R": 0.3}, {"R": 0.1}]
        )
        col = read_collapse(path)
        assert len(col.curves) == 2
        np.testing.assert_allclose(col.curves[0]["y"], x**2)
        np.testing.assert_allclose(col.curves[1]["yerr"], 0.2)
        assert col.curve_label(0, "R") == pytest.approx(0.3)
        assert col.report["mode"] == "VELOCITY"

    def test_missing_report_sidecar(self, tmp_path):
        x = np.array([0.0, 1.0])
        path = write_collapse(
            tmp_path, "c", [{"x": x, "y": x, "yerr": x}], labels=[{"R": 1}]
        )
        (tmp_path / "c.report.json").unlink()
        with pytest.raises(InputError, match=r"c\.report\.json"):
            read_collapse(path)

    def test_curve_label_missing_key(self, tmp_path):
        x = np.array([0.0, 1.0])
        path = write_collapse(
            tmp_path, "c", [{"x": x, "y": x, "yerr": x}], labels=[{"R": 1}]
        )
        col = read_collapse(path)
        with pytest.raises(InputError, match="L"):
            col.curve_label(0, "L")


class TestFitReport:
    def test_round_trip(self, tmp_path):
        path = write_fit_report(tmp_path, "fit", {"slope": -0.9, "intercept": 2.0})
        report = read_fit_report(path)
        assert report["parameters"]["slope"] == pytest.approx(-0.9)

    def test_missing_parameters_block(self, tmp_path):
        path = tmp_path / "bad.report.json"
        path.write_text(json.dumps({"model": "x"}))
        with pytest.raises(InputError) as err:
            read_fit_report(path)
        msg = str(err.value)
        assert "bad.report.json" in msg and "parameters" in msg

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError, match="nope"):
            read_fit_report(tmp_path / "nope.report.json")
