import csv
import io
import json
import math
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from gti.cli import TABLE1_BETAS, main
from gti.hmd import MortalityRateSeries, Sex, format_hmd_mx

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

REPORT_SCHEMA = {
    "type": "object",
    "required": ["file", "year", "sex", "hazard_source", "rows", "median_age_at_death"],
    "additionalProperties": False,
    "properties": {
        "file": {"type": "string"},
        "year": {"type": "integer"},
        "sex": {"type": "string"},
        "hazard_source": {"type": "string"},
        "median_age_at_death": {"type": ["number", "null"]},
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["T", "gti", "survival", "h_eff", "class"],
                "additionalProperties": False,
                "properties": {
                    "T": {"type": "number"},
                    "gti": {"type": "number"},
                    "survival": {"type": "number"},
                    "h_eff": {"type": "number"},
                    "class": {"enum": ["Ageing", "Rejuvenating", "NonAgeing"]},
                },
            },
        },
    },
}


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def constant_file():
    return FIXTURES / "lt_constant_mx.txt"


@pytest.fixture
def mx_file(tmp_path):
    ages = np.arange(111)
    young = 0.03 * np.exp(-0.5 * ages)
    series = [
        MortalityRateSeries(1921, ages, {s: young + 2e-4 * np.exp(0.08 * ages) for s in Sex}),
        MortalityRateSeries(2009, ages, {s: 0.1 * young + 3e-5 * np.exp(0.1 * ages) for s in Sex}),
    ]
    path = tmp_path / "Mx_1x1.txt"
    path.write_text(format_hmd_mx(series))
    return path


class TestWeibull:
    def test_default_table(self, capsys):
        code, out, _ = run(capsys, "weibull")
        assert code == 0
        lines = out.strip().splitlines()
        assert len(lines) == 10
        assert lines[1].split() == ["5", "0.666667", "Ageing"]
        assert lines[5].split()[:2] == ["1", "0"]
        assert lines[-1].split() == ["0.2", "-0.666667", "Rejuvenating"]

    def test_json_full_precision(self, capsys):
        code, out, _ = run(capsys, "weibull", "--format", "json")
        rows = json.loads(out)
        assert [r["beta"] for r in rows] == list(TABLE1_BETAS)
        expected = [2 / 3, 0.6, 0.5, 1 / 3, 0.0, -1 / 3, -0.5, -0.6, -2 / 3]
        for row, value in zip(rows, expected):
            assert abs(row["gti"] - value) < 1e-12

    def test_single_beta(self, capsys):
        code, out, _ = run(capsys, "weibull", "--beta", "1")
        assert code == 0
        lines = out.strip().splitlines()
        assert len(lines) == 2
        assert "Constant mortality rate" in lines[1]
        assert lines[1].split()[1] == "0"

    def test_csv(self, capsys):
        _, out, _ = run(capsys, "weibull", "--beta", "2", "--beta", "0.5", "--format", "csv")
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["beta", "gti", "class"]
        assert float(rows[1][1]) == pytest.approx(1 / 3)
        assert rows[2][2] == "Rejuvenating"

    @pytest.mark.parametrize("beta", ["-1", "0"])
    def test_nonpositive_beta(self, capsys, beta):
        code, _, err = run(capsys, "weibull", "--beta", beta)
        assert code == 2
        assert "positive" in err

    def test_unparseable_beta(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["weibull", "--beta", "abc"])
        assert exc.value.code == 2


class TestCompute:
    def test_golden_json(self, capsys, monkeypatch):
        monkeypatch.chdir(FIXTURES)
        code, out, _ = run(capsys, "compute", "--file", "lt_constant_mx.txt", "--year", "2000")
        assert code == 0
        assert out == (GOLDEN / "compute_constant_mx.json").read_text()

    def test_golden_csv(self, capsys, monkeypatch):
        monkeypatch.chdir(FIXTURES)
        _, out, _ = run(capsys, "compute", "--file", "lt_constant_mx.txt", "--year", "2000", "--format", "csv")
        assert out == (GOLDEN / "compute_constant_mx.csv").read_text()

    def test_constant_table(self, capsys, constant_file):
        code, out, _ = run(capsys, "compute", "--file", constant_file, "--year", "2000")
        report = json.loads(out)
        jsonschema.validate(report, REPORT_SCHEMA)
        assert [r["T"] for r in report["rows"]] == [25, 65, 105]
        for row in report["rows"]:
            assert abs(row["gti"]) < 1e-9
            assert row["class"] == "NonAgeing"
            assert row["h_eff"] * row["T"] == pytest.approx(-math.log(row["survival"]), rel=1e-12)
        assert report["median_age_at_death"] == pytest.approx(34.66, abs=0.01)
        assert report["sex"] == "Total"
        assert report["hazard_source"] == "mx"

    def test_cutoffs_sorted(self, capsys, constant_file):
        _, out, _ = run(capsys, "compute", "--file", constant_file, "--year", "2000",
                        "--cutoff", "80", "--cutoff", "10")
        assert [r["T"] for r in json.loads(out)["rows"]] == [10, 80]

    def test_qx_source(self, capsys, constant_file):
        code, out, _ = run(capsys, "compute", "--file", constant_file, "--year", "2000", "--hazard-source", "qx")
        report = json.loads(out)
        assert report["hazard_source"] == "qx"
        assert all(abs(r["gti"]) < 1e-9 for r in report["rows"])

    def test_mx_file(self, capsys, mx_file):
        code, out, _ = run(capsys, "compute", "--file", mx_file, "--year", "1921", "--sex", "female")
        report = json.loads(out)
        jsonschema.validate(report, REPORT_SCHEMA)
        assert report["sex"] == "Female"
        assert report["rows"][2]["class"] == "Ageing"

    def test_mx_file_rejects_qx(self, capsys, mx_file):
        code, _, _ = run(capsys, "compute", "--file", mx_file, "--year", "1921", "--hazard-source", "qx")
        assert code == 2

    def test_table_format(self, capsys, constant_file):
        _, out, _ = run(capsys, "compute", "--file", constant_file, "--year", "2000", "--format", "table")
        assert "median age at death: 34.6596" in out
        assert "0.606531" in out

    def test_out_file(self, capsys, tmp_path, constant_file):
        target = tmp_path / "r.json"
        code, out, _ = run(capsys, "compute", "--file", constant_file, "--year", "2000", "--out", target)
        assert code == 0 and out == ""
        jsonschema.validate(json.loads(target.read_text()), REPORT_SCHEMA)

    def test_cutoff_beyond_domain(self, capsys, constant_file):
        code, _, err = run(capsys, "compute", "--file", constant_file, "--year", "2000", "--cutoff", "150")
        assert code == 3
        assert "150" in err

    def test_sex_mismatch(self, capsys, constant_file):
        code, _, err = run(capsys, "compute", "--file", constant_file, "--year", "2000", "--sex", "male")
        assert code == 3

    def test_parse_error_line_number(self, capsys):
        code, _, err = run(capsys, "compute", "--file", FIXTURES / "lt_missing_datum.txt", "--year", "1990")
        assert code == 1
        assert "line 5" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "compute", "--file", tmp_path / "nope.txt", "--year", "2000")
        assert code == 1

    def test_missing_year(self, capsys, constant_file):
        code, _, err = run(capsys, "compute", "--file", constant_file, "--year", "1921")
        assert code == 1
        assert "1921" in err

    @pytest.mark.parametrize(
        "argv",
        [
            ["compute", "--year", "2000"],
            ["compute", "--file", "x", "--year", "2000", "--sex", "both"],
            ["compute", "--file", "x", "--year", "2000", "--format", "xml"],
            ["compute", "--file", "x", "--year", "2000", "--hazard-source", "ax"],
            ["compute", "--file", "x", "--year", "2000", "--epsilon", "-1"],
            ["compute", "--file", "x", "--year", "abc"],
        ],
    )
    def test_bad_flags(self, argv):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2

    def test_epsilon_flag(self, capsys, mx_file):
        _, out, _ = run(capsys, "compute", "--file", mx_file, "--year", "1921", "--epsilon", "0.99")
        assert {r["class"] for r in json.loads(out)["rows"]} == {"NonAgeing"}


class TestCompare:
    def test_same_file_twice(self, capsys, mx_file):
        code, out, _ = run(capsys, "compare", "--file", mx_file, "--year", "2009", "--file", mx_file,
                           "--year", "2009", "--format", "json")
        assert code == 0
        assert all(r["delta"] == 0 for r in json.loads(out)["rows"])

    def test_delta(self, capsys, mx_file):
        _, out, _ = run(capsys, "compare", "--file", mx_file, "--year", "1921", "--year", "2009", "--format", "json")
        obj = json.loads(out)
        for row, ra, rb in zip(obj["rows"], obj["a"]["rows"], obj["b"]["rows"]):
            assert row["delta"] == rb["gti"] - ra["gti"]
        jsonschema.validate(obj["a"], REPORT_SCHEMA)

    def test_table_and_csv(self, capsys, mx_file):
        _, out, _ = run(capsys, "compare", "--file", mx_file, "--year", "1921", "--year", "2009")
        assert out.splitlines()[2].split() == ["T", "gti_a", "survival_a", "gti_b", "survival_b", "delta"]
        assert "median" in out
        _, out, _ = run(capsys, "compare", "--file", mx_file, "--year", "1921", "--year", "2009", "--format", "csv")
        rows = list(csv.reader(io.StringIO(out)))
        assert len(rows) == 4 and len(rows[0]) == 6

    def test_missing_year_names_file(self, capsys, mx_file, constant_file):
        code, _, err = run(capsys, "compare", "--file", constant_file, "--year", "2000",
                           "--file", mx_file, "--year", "1950")
        assert code == 1
        assert "input b" in err and str(mx_file) in err

    def test_domain_error_tagged(self, capsys, mx_file):
        code, _, err = run(capsys, "compare", "--file", mx_file, "--year", "1921", "--year", "2009",
                           "--cutoff", "200")
        assert code == 3
        assert "input a" in err

    def test_needs_two_years(self, capsys, mx_file):
        code, _, _ = run(capsys, "compare", "--file", mx_file, "--year", "1921")
        assert code == 2


class TestPlot:
    def test_chord_quadratic(self, capsys, tmp_path):
        out_csv = tmp_path / "chord.csv"
        code, out, _ = run(capsys, "plot", "chord", "--beta", "2", "--cutoff", "1", "--out", out_csv)
        assert code == 0
        values = dict(line.split("=", 1) for line in out.strip().splitlines())
        area, total = float(values["A"]), float(values["A+B"])
        assert float(values["GTI"]) == pytest.approx(1 / 3, abs=1e-6)
        assert 1 - area / total == float(values["GTI"])
        rows = list(csv.reader(out_csv.open()))
        assert rows[0] == ["t", "H", "h_eff_t"]
        assert float(rows[-1][1]) == pytest.approx(1.0) == float(rows[-1][2])
        assert len(rows) == 10_002

    def test_chord_matches_compute(self, capsys, tmp_path, mx_file):
        _, out, _ = run(capsys, "plot", "chord", "--file", mx_file, "--year", "1921", "--cutoff", "65.5",
                        "--out", tmp_path / "c.csv")
        chord_gti = float(dict(ln.split("=", 1) for ln in out.strip().splitlines())["GTI"])
        _, out, _ = run(capsys, "compute", "--file", mx_file, "--year", "1921", "--cutoff", "65.5")
        assert abs(chord_gti - json.loads(out)["rows"][0]["gti"]) < 1e-12

    def test_chord_csv_ends_at_cutoff(self, capsys, tmp_path, mx_file):
        target = tmp_path / "c.csv"
        run(capsys, "plot", "chord", "--file", mx_file, "--year", "2009", "--cutoff", "40.25", "--out", target)
        rows = list(csv.reader(target.open()))[1:]
        assert float(rows[-1][0]) == 40.25
        assert float(rows[-1][1]) == pytest.approx(float(rows[-1][2]), rel=1e-14)
        assert len(rows) == 42

    def test_rates_two_years(self, capsys, tmp_path, mx_file):
        target = tmp_path / "rates.csv"
        code, _, _ = run(capsys, "plot", "rates", "--file", mx_file, "--year", "1921", "--year", "2009",
                         "--out", target)
        assert code == 0
        rows = list(csv.reader(target.open()))
        assert rows[0] == ["age", "mx_1921", "mx_2009"]
        assert all(len(r) == 3 for r in rows)
        assert len(rows) == 111

    def test_chord_needs_input(self, capsys, tmp_path):
        code, _, _ = run(capsys, "plot", "chord", "--cutoff", "1", "--out", tmp_path / "x.csv")
        assert code == 2

    def test_plot_needs_out(self):
        with pytest.raises(SystemExit) as exc:
            main(["plot", "rates", "--file", "x", "--year", "1"])
        assert exc.value.code == 2


def test_determinism(capsys, tmp_path, mx_file):
    outputs = []
    for i in range(2):
        chord = tmp_path / f"chord{i}.csv"
        rates = tmp_path / f"rates{i}.csv"
        _, a, _ = run(capsys, "compute", "--file", mx_file, "--year", "2009")
        _, b, _ = run(capsys, "compare", "--file", mx_file, "--year", "1921", "--year", "2009")
        _, c, _ = run(capsys, "plot", "chord", "--file", mx_file, "--year", "2009", "--cutoff", "65", "--out", chord)
        run(capsys, "plot", "rates", "--file", mx_file, "--year", "1921", "--out", rates)
        outputs.append((a, b, c, chord.read_bytes(), rates.read_bytes()))
    assert outputs[0] == outputs[1]
