import json
import math

import numpy as np
import pytest

from fracpow import bench
from fracpow.bench import (
    ACTION_COLUMNS,
    CONVERGENCE_COLUMNS,
    SPEED_COLUMNS,
    ExperimentConfig,
    parse_csv,
    run_action_bench,
    run_convergence,
    run_speed_table,
    validated_oracle,
)
from fracpow.cli import main
from fracpow.errors import ValidationError
from fracpow.matrices import read_matrix_market, write_matrix_market
from fracpow.oracles import hpd_power


class TestConfig:
    def test_defaults_valid(self):
        c = ExperimentConfig()
        assert c.budget == 1000 and c.alphas == (0.2, 0.5, 0.8)

    @pytest.mark.parametrize("kw", [dict(alphas=(1.2,)), dict(m_grid=(16, 8)), dict(m_grid=(8, 8)),
                                     dict(tols=(0.0,)), dict(norm_rel_tol=0.7), dict(budget=1)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            ExperimentConfig(**kw)

    def test_load_matrix(self, tmp_path):
        assert bench.load_matrix("lap1d:7")[1].n == 7
        write_matrix_market(tmp_path / "m.mtx", np.eye(3))
        name, A = bench.load_matrix(str(tmp_path / "m.mtx"))
        assert name == "m" and np.array_equal(A, np.eye(3))
        with pytest.raises(ValueError):
            bench.load_matrix("spd:x:1")
        with pytest.raises(ValueError):
            bench.load_matrix("nope")


class TestTables:
    def test_convergence_schema_and_pattern(self):
        cfg = ExperimentConfig(matrix="spd:100:1e2", alphas=(0.5,), m_grid=(16, 32))
        text = run_convergence(cfg)
        assert text.splitlines()[0] == ",".join(CONVERGENCE_COLUMNS)
        assert "\r\n" in text
        rows = parse_csv(text)
        assert len(rows) == 4 * 2
        for r in rows:
            assert math.isfinite(float(r["rel_error"])) and float(r["rel_error"]) > 0
        at32 = {r["method"]: float(r["rel_error"]) for r in rows if r["m"] == "32"}
        assert at32["gj2"] < at32["de"]

    def test_convergence_ill_de_lowest(self):
        cfg = ExperimentConfig(matrix="spd:100:1e7", alphas=(0.8,), m_grid=(96,))
        at96 = {r["method"]: float(r["rel_error"]) for r in parse_csv(run_convergence(cfg))}
        assert at96["de"] == min(at96.values())

    def test_convergence_nonsymmetric_skips_gj2pre(self):
        cfg = ExperimentConfig(matrix="ns:40:1e2", alphas=(0.5,), m_grid=(16,))
        methods = {r["method"] for r in parse_csv(run_convergence(cfg))}
        assert methods == {"de", "gj1", "gj2"}

    def test_deterministic(self, tmp_path):
        cfg = ExperimentConfig(matrix="spd:30:1e3", alphas=(0.3,), m_grid=(8, 16),
                               out=str(tmp_path / "a.csv"))
        run_convergence(cfg)
        first = (tmp_path / "a.csv").read_bytes()
        run_convergence(cfg)
        assert (tmp_path / "a.csv").read_bytes() == first

    def test_speed(self):
        text = run_speed_table([1e2, 1e4, 1e10], [0.4, 0.5])
        rows = parse_csv(text)
        assert text.splitlines()[0] == ",".join(SPEED_COLUMNS)
        r = {(float(x["kappa"]), float(x["alpha"])): x for x in rows}
        assert float(r[(1e4, 0.5)]["phi_gj2"]) == pytest.approx(0.40134139092430232254, rel=1e-14)
        assert r[(1e10, 0.5)]["recommended"] == "de"
        assert r[(1e2, 0.4)]["phi_gj1"] == ""
        assert any(x["switch"] for x in rows)

    def test_action(self):
        cfg = ExperimentConfig(matrix="spd:100:1e7", alphas=(0.8,),
                               methods=("de-adaptive", "gj2", "gj2pre"))
        rows = parse_csv(run_action_bench(cfg, tol=1e-6))
        assert list(rows[0].keys()) == list(ACTION_COLUMNS)
        r = {x["method"]: x for x in rows}
        assert set(r) == {"de-adaptive", "gj2"}
        assert int(r["de-adaptive"]["evals"]) < int(r["gj2"]["evals"])
        assert r["gj2"]["capped"] == "1" and r["de-adaptive"]["capped"] == "0"
        assert float(r["de-adaptive"]["error"]) <= 1e-6
        assert r["de-adaptive"]["error_kind"] == "oracle"

    def test_action_cap_flag_and_estimate_kind(self):
        cfg = ExperimentConfig(matrix="lap1d:500", alphas=(0.5,), methods=("gj2",),
                               budget=24, oracle_max_n=100)
        (row,) = parse_csv(run_action_bench(cfg, tol=1e-14))
        assert row["capped"] == "1" and row["evals"] == "24" and row["error_kind"] == "estimate"

    def test_oracle_validation(self):
        A = hpd_power(bench.load_matrix("spd:20:1e2")[1], 1.0)
        assert np.allclose(validated_oracle(A, 0.5) @ validated_oracle(A, 0.5), A)
        with pytest.raises(ValidationError):
            validated_oracle(A, 0.5, tol=0.0)


class TestCli:
    def test_interval_example(self, capsys):
        assert main(["interval", "--alpha", "0.5", "--eps", "1e-7", "--norm-a", "10",
                     "--norm-ainv", "10"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["a"] == pytest.approx(2.945243112740431e-08, rel=1e-13)
        assert out["r"] == pytest.approx(3.9128359178215622, rel=1e-13)
        assert out["a_branch"] == "tolerance"

    def test_interval_missing(self, capsys):
        assert main(["interval", "--alpha", "0.5"]) == 2

    def test_powm_file(self, tmp_path, capsys):
        out = tmp_path / "x.mtx"
        assert main(["powm", "spd:20:1e3", "--alpha", "0.5", "--rel", "--eps", "1e-9",
                     "--out", str(out)]) == 0
        X = read_matrix_market(out)
        A = bench.load_matrix("spd:20:1e3")[1]
        assert np.linalg.norm(X @ X - A) <= 1e-7 * np.linalg.norm(A)
        info = json.loads(capsys.readouterr().out)
        assert info["evals"] >= 8

    def test_powm_budget_exit(self, capsys):
        assert main(["powm", "spd:20:1e7", "--alpha", "0.5", "--rel", "--eps", "1e-12",
                     "--budget", "20"]) == 3

    def test_bad_alpha_exit(self, capsys):
        assert main(["powm", "spd:5:10", "--alpha", "-1"]) == 2

    def test_action(self, tmp_path, capsys):
        b = np.ones(10) / math.sqrt(10)
        write_matrix_market(tmp_path / "b.mtx", b)
        assert main(["action", "lap1d:10", "--alpha", "0.5", "--rhs", str(tmp_path / "b.mtx"),
                     "--out", str(tmp_path / "x.mtx")]) == 0
        from fracpow.matrices import read_vector

        x = read_vector(tmp_path / "x.mtx")
        L = bench.load_matrix("lap1d:10")[1].toarray()
        assert np.linalg.norm(x - hpd_power(L, 0.5) @ b) <= 1e-6

    def test_tables(self, tmp_path, capsys):
        assert main(["speed", "--kappa", "1e2,1e10", "--alpha", "0.5"]) == 0
        assert "recommended" in capsys.readouterr().out
        assert main(["convergence", "spd:20:1e2", "--alpha", "0.5", "--m", "8,16",
                     "--out", str(tmp_path / "c.csv")]) == 0
        assert len(parse_csv((tmp_path / "c.csv").read_text())) == 8
        assert main(["bench", "spd:20:1e2", "--alpha", "0.5"]) == 0
        assert len(parse_csv(capsys.readouterr().out)) == 3

    def test_validation_exit(self, monkeypatch, capsys):
        def boom(*a, **k):
            raise ValidationError("forced")
        monkeypatch.setattr(bench, "run_speed_table", boom)
        assert main(["speed", "--kappa", "10"]) == 1
