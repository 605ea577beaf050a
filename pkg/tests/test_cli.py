import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from efwe import distributions as dist
from efwe.cli import EXIT_DATA, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main
from efwe.distributions import EfweParams


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


def rows(text):
    return list(csv.reader(io.StringIO(text)))


class TestFit:
    def test_json(self):
        code, out = run("fit", "--aarset", "--out", "json")
        assert code == EXIT_OK
        d = json.loads(out)
        assert d["model"] == "efwe"
        assert set(d) >= {"params", "loglik", "aic", "aicc", "bic", "ks", "ks_pvalue", "ci", "vcov", "defect", "converged"}
        assert d["params"]["alpha"] == pytest.approx(0.015, abs=0.001)

    def test_text(self):
        code, out = run("fit", "--aarset", "--model", "weibull")
        assert code == EXIT_OK
        assert "loglik   -241.002" in out
        assert "95% CI" in out

    def test_csv_file(self, tmp_path):
        f = tmp_path / "d.csv"
        x = dist.sample(EfweParams(1, 1, 0.2), 300, seed=1)
        f.write_text("time\n" + "\n".join(map(repr, x.tolist())) + "\n")
        code, out = run("fit", "--data", str(f), "--out", "json", "--likelihood", "conditional")
        assert code == EXIT_OK
        assert json.loads(out)["likelihood"] == "conditional"

    def test_bad_file(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("time\n1\n-3\n")
        assert run("fit", "--data", str(f))[0] == EXIT_DATA
        assert run("fit", "--data", str(tmp_path / "missing.csv"))[0] == EXIT_DATA

    def test_usage(self):
        with pytest.raises(SystemExit) as err:
            run("fit")
        assert err.value.code == EXIT_USAGE
        with pytest.raises(SystemExit) as err:
            run("fit", "--aarset", "--model", "gamma")
        assert err.value.code == EXIT_USAGE


class TestCompare:
    def test_ranking(self):
        code, out = run("compare", "--aarset", "--out", "json")
        assert code == EXIT_OK
        ranked = [r["model"] for r in json.loads(out)]
        assert ranked == ["efwe", "lfr", "weibull", "fwe"]

    def test_text_and_subset(self):
        code, out = run("compare", "--aarset", "--models", "fwe,weibull")
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert lines[1].split()[1] == "weibull"

    def test_unknown_family(self):
        assert run("compare", "--aarset", "--models", "efwe,gamma")[0] == EXIT_USAGE


class TestSample:
    def test_csv(self):
        code, out = run("sample", "--params", "1,1,0.2", "--n", "5", "--seed", "3")
        assert code == EXIT_OK
        r = rows(out)
        assert r[0] == ["x"]
        np.testing.assert_array_equal([float(v[0]) for v in r[1:]], dist.sample(EfweParams(1, 1, 0.2), 5, seed=3))

    def test_strict_defect(self):
        assert run("sample", "--params", "1,1,1", "--n", "10", "--policy", "strict")[0] == EXIT_NUMERIC

    def test_bad_params(self):
        assert run("sample", "--params", "1,1", "--n", "3")[0] == EXIT_USAGE
        assert run("sample", "--params", "1,-1,1", "--n", "3")[0] == EXIT_USAGE
        assert run("sample", "--params", "1,1,1", "--n", "-3")[0] == EXIT_USAGE


class TestTable:
    @pytest.mark.parametrize(
        "what,fn",
        [
            ("cdf", dist.cdf),
            ("pdf", dist.pdf),
            ("hazard", dist.hazard),
            ("survival", dist.survival),
            ("reversed-hazard", dist.reversed_hazard),
            ("cumulative-hazard", dist.cumulative_hazard),
        ],
    )
    def test_curves(self, what, fn):
        code, out = run("table", "--params", "1,1,0.5", "--what", what, "--grid", "0.5:3:6")
        assert code == EXIT_OK
        r = rows(out)
        assert r[0] == ["x", what.replace("-", "_")]
        x = np.array([float(v[0]) for v in r[1:]])
        np.testing.assert_allclose(x, np.linspace(0.5, 3, 6))
        np.testing.assert_array_equal([float(v[1]) for v in r[1:]], fn(EfweParams(1, 1, 0.5), x))

    def test_default_grid(self):
        code, out = run("table", "--params", "1,1,0.5", "--what", "cdf")
        assert code == EXIT_OK
        assert len(rows(out)) == 101

    def test_km_overlay(self):
        code, out = run("table", "--what", "km-overlay", "--aarset", "--params", "0.015,0.381,0.076")
        assert code == EXIT_OK
        r = rows(out)
        assert r[0] == ["t", "km_survival", "fitted_survival"]
        at18 = next(v for v in r[1:] if float(v[0]) == 18.0)
        assert float(at18[1]) == pytest.approx(0.64)

    def test_km_overlay_fits(self):
        code, out = run("table", "--what", "km-overlay", "--aarset", "--model", "weibull", "--grid", "1:80:5")
        assert code == EXIT_OK
        assert len(rows(out)) == 6

    def test_errors(self):
        assert run("table", "--what", "cdf")[0] == EXIT_USAGE
        assert run("table", "--what", "cdf", "--params", "1,1,1", "--grid", "3:1:5")[0] == EXIT_USAGE
        assert run("table", "--what", "km-overlay")[0] == EXIT_USAGE


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "efwe", "sample", "--params", "1,1,0.2", "--n", "2"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "x"
