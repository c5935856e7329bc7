import csv
import json

import pytest

from finsler import cli, ratfunc
from finsler.config import load_config, parse_config
from finsler.errors import ConfigError

MINIMAL = {
    "dim": 2,
    "a": [["1", "0"], ["0", "1"]],
    "b": ["0", "0"],
    "family": {"name": "riemannian"},
}


def _write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


class TestConfig:
    def test_minimal_euclidean_valid(self, tmp_path):
        cfg = load_config(_write(tmp_path, MINIMAL))
        assert cfg.spec.dim == 2
        assert cfg.spec.family.is_riemannian
        assert cfg.tolerance == 1e-7
        assert len(cfg.config_sha256) == 64

    def test_asymmetric_table_named_path(self, tmp_path):
        doc = dict(MINIMAL, a=[["1", "x1"], ["0", "1"]])
        with pytest.raises(ConfigError) as exc:
            load_config(_write(tmp_path, doc))
        assert exc.value.path == "a.0.1"

    def test_bad_expression_wraps_parse_offset(self, tmp_path):
        doc = dict(MINIMAL, b=["x1 +", "0"])
        with pytest.raises(ConfigError) as exc:
            load_config(_write(tmp_path, doc))
        assert exc.value.path == "b.0"
        assert "offset 4" in str(exc.value)

    def test_missing_field(self):
        with pytest.raises(ConfigError) as exc:
            parse_config({"dim": 2})
        assert exc.value.path == "a"

    def test_unknown_family(self):
        doc = dict(MINIMAL, family={"name": "nope"})
        with pytest.raises(ConfigError) as exc:
            parse_config(doc)
        assert exc.value.path == "family.name"

    def test_approx_matsumoto_order(self):
        doc = dict(MINIMAL, family={"name": "approx_matsumoto", "order": 3}, b=["0.1", "0"])
        cfg = parse_config(doc)
        assert cfg.spec.family.coeffs == (1.0, 1.0, 1.0, 1.0)


class TestCommands:
    def test_geodesic_straight_line_csv(self, tmp_path):
        doc = dict(
            MINIMAL,
            geodesic={"x0": [0.0, 0.0], "y0": [1.0, 2.0], "t_end": 1.0, "step": 0.1},
        )
        cfg_path = _write(tmp_path, doc)
        out = tmp_path / "traj.csv"
        rc = cli.main(["geodesic", "--config", cfg_path, "--out", str(out)])
        assert rc == 0
        rows = list(csv.DictReader(out.open()))
        assert float(rows[-1]["x1"]) == pytest.approx(1.0, abs=1e-10)
        assert float(rows[-1]["x2"]) == pytest.approx(2.0, abs=1e-10)
        f_vals = [float(r["F"]) for r in rows]
        assert max(f_vals) - min(f_vals) <= 1e-12

    def test_geodesic_plot_renders(self, tmp_path):
        doc = dict(
            MINIMAL,
            geodesic={"x0": [0.0, 0.0], "y0": [1.0, 0.0], "t_end": 0.5, "step": 0.1},
        )
        cfg_path = _write(tmp_path, doc)
        out = tmp_path / "traj.csv"
        rc = cli.main(["geodesic", "--config", cfg_path, "--out", str(out), "--plot"])
        assert rc == 0
        assert (tmp_path / "traj.png").exists()

    def test_curvatures_report_and_plot(self, tmp_path):
        doc = dict(
            MINIMAL,
            b=["0.2", "0"],
            family={"name": "second_matsumoto"},
            sample={"base_points": [[0.0, 0.0]], "directions_per_point": 24, "seed": 0},
        )
        cfg_path = _write(tmp_path, doc)
        out = tmp_path / "report.json"
        rc = cli.main(["curvatures", "--config", cfg_path, "--out", str(out), "--plot"])
        assert rc == 0
        doc_out = json.loads(out.read_text())
        assert doc_out["command"] == "curvatures"
        assert doc_out["version"]
        assert len(doc_out["config_sha256"]) == 64
        assert len(doc_out["samples"]) == 24
        assert doc_out["summary"]["B_max"] <= 1e-12
        assert (tmp_path / "report.png").exists()

    def test_classify_parallel_beta_report(self, tmp_path):
        doc = dict(
            MINIMAL,
            b=["0.2", "0"],
            family={"name": "second_matsumoto"},
            sample={"base_points": [[0.0, 0.0]], "directions_per_point": 24, "seed": 0},
        )
        cfg_path = _write(tmp_path, doc)
        out = tmp_path / "report.json"
        rc = cli.main(["classify", "--config", cfg_path, "--out", str(out)])
        assert rc == 0
        rep = json.loads(out.read_text())["report"]
        assert rep["flags"]["berwald"]["holds"]
        assert rep["fits"]["isotropic_S"]["c"] == [0.0]
        assert rep["lemma_branch"]["kind"] == "CS2"

    def test_reports_bit_identical(self, tmp_path):
        doc = dict(
            MINIMAL,
            b=["0.1", "0"],
            family={"name": "randers"},
            sample={"base_points": [[0.1, 0.2]], "directions_per_point": 24, "seed": 5},
        )
        cfg_path = _write(tmp_path, doc)
        o1 = tmp_path / "r1.json"
        o2 = tmp_path / "r2.json"
        assert cli.main(["classify", "--config", cfg_path, "--out", str(o1)]) == 0
        assert cli.main(["classify", "--config", cfg_path, "--out", str(o2)]) == 0
        assert o1.read_bytes() == o2.read_bytes()

    def test_verify_defaults_exit_zero(self, tmp_path):
        out = tmp_path / "verify.json"
        rc = cli.main(["verify", "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["passed"]
        assert all(c["passed"] for c in doc["checks"])


class TestExitCodes:
    def test_config_error_is_2(self, tmp_path, capsys):
        doc = dict(MINIMAL, a=[["1", "x1"], ["0", "1"]])
        rc = cli.main(["classify", "--config", _write(tmp_path, doc)])
        assert rc == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "ConfigError"
        assert err["path"] == "a.0.1"

    def test_regularity_error_is_3(self, tmp_path, capsys):
        # |b| = 2 violates b^2 < 1 at evaluation time
        doc = dict(
            MINIMAL,
            b=["2", "0"],
            family={"name": "randers"},
            sample={"base_points": [[0.0, 0.0]], "directions_per_point": 24, "seed": 0},
        )
        rc = cli.main(["classify", "--config", _write(tmp_path, doc)])
        assert rc == 3
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "RegularityError"

    def test_verification_failure_is_4(self, tmp_path, monkeypatch):
        failing = ratfunc.ReductionCertificate(q_ok=False, theta_ok=True, psi_ok=True)
        monkeypatch.setattr(
            cli.ratfunc, "verify_second_matsumoto_reduction", lambda: failing
        )
        rc = cli.main(["verify", "--out", str(tmp_path / "v.json")])
        assert rc == 4
