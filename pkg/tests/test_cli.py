import json
from pathlib import Path

import pytest

from drfed.cli import main
from drfed.config import load, parse_override, parse_value
from drfed.errors import ConfigError

BASIC = "# small run\nM = 4\nK = 2\nT = 300\nL = 40\nc = 0.9\nruns = 3\n"


@pytest.fixture
def conf(tmp_path):
    p = tmp_path / "exp.toml"
    p.write_text(BASIC)
    return p


def run_dir(out: Path) -> Path:
    (d,) = [p for p in out.iterdir() if p.name.startswith("run-")]
    return d


class TestConfigLoading:
    def test_values(self):
        assert parse_value("3") == 3 and parse_value("0.5") == 0.5
        assert parse_value("er") == "er" and parse_value('"x"') == "x"
        assert parse_override("T = 100") == ("T", 100)
        with pytest.raises(ConfigError):
            parse_override("T100")

    def test_precedence(self, conf):
        cfg, h = load(conf, ["seed=7"], env={"DRFED_SEED": "3"})
        assert cfg.seed == 7 and h["runs"] == 3
        cfg, _ = load(conf, [], env={"DRFED_SEED": "3"})
        assert cfg.seed == 3

    def test_bad_env_seed(self, conf):
        with pytest.raises(ConfigError):
            load(conf, [], env={"DRFED_SEED": "abc"})

    def test_tables_rejected(self, tmp_path):
        p = tmp_path / "t.toml"
        p.write_text("M = 2\n[extra]\nx = 1\n")
        with pytest.raises(ConfigError) as exc:
            load(p, env={})
        assert exc.value.key == "extra"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load(tmp_path / "nope.toml", env={})


class TestRun:
    def test_outputs_and_manifest(self, conf, tmp_path, capsys, monkeypatch):
        monkeypatch.delenv("DRFED_SEED", raising=False)
        out = tmp_path / "out"
        assert main(["run", "--config", str(conf), "--set", "T=100", "--set", "seed=7", "--out", str(out), "--gnuplot"]) == 0
        d = run_dir(out)
        names = sorted(p.name for p in d.iterdir())
        assert names == ["aggregate.csv", "manifest.json", "regret.gp", "run_0000.csv", "run_0001.csv", "run_0002.csv"]
        man = json.loads((d / "manifest.json").read_text())
        assert man["config"]["T"] == 100 and man["config"]["seed"] == 7
        assert man["seeds"] == [7, 8, 9]
        assert man["config"]["L"] == 40 and man["config"]["C1"] > 0
        assert (d / "aggregate.csv").read_text().startswith("param,t,mean,ci_lo,ci_hi\n")

    def test_manifest_replay_and_jobs(self, conf, tmp_path, monkeypatch):
        monkeypatch.delenv("DRFED_SEED", raising=False)
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["run", str(conf), "--out", str(a)]) == 0
        man = run_dir(a) / "manifest.json"
        assert main(["run", str(man), "--out", str(b), "--jobs", "2"]) == 0
        da, db = run_dir(a), run_dir(b)
        assert da.name == db.name
        for f in ["run_0000.csv", "run_0001.csv", "run_0002.csv", "aggregate.csv"]:
            assert (da / f).read_bytes() == (db / f).read_bytes()

    def test_missing_key_exit_2(self, tmp_path, capsys):
        p = tmp_path / "bad.toml"
        p.write_text("K = 2\nT = 10\n")
        assert main(["run", str(p), "--out", str(tmp_path)]) == 2
        assert "M" in capsys.readouterr().err

    def test_unknown_key_exit_2(self, conf, tmp_path, capsys):
        assert main(["run", str(conf), "--set", "eps=0.1", "--out", str(tmp_path)]) == 2
        assert "eps" in capsys.readouterr().err

    def test_runtime_failure_exit_3(self, conf, tmp_path, monkeypatch):
        import drfed.cli as cli

        def boom(*a, **k):
            raise RuntimeError("disk full")

        monkeypatch.setattr(cli, "run_many", boom)
        assert main(["run", str(conf), "--out", str(tmp_path)]) == 3


class TestSweep:
    def test_c_sweep(self, conf, tmp_path, capsys):
        out = tmp_path / "s"
        assert main(["sweep", "--config", str(conf), "--param", "c", "--values", "0.5,1", "--runs", "2", "--out", str(out)]) == 0
        text = capsys.readouterr().out
        assert "direction decreasing" in text
        assert len([p for p in out.iterdir() if p.name.startswith("run-")]) == 2
        (sd,) = [p for p in out.iterdir() if p.name.startswith("sweep-")]
        assert (sd / "summary.txt").exists() and (sd / "curves.csv").exists()

    def test_single_value(self, conf, tmp_path, capsys):
        assert main(["sweep", "--config", str(conf), "--param", "h", "--values", "0.1", "--runs", "2", "--out", str(tmp_path)]) == 0
        assert "no verdict" in capsys.readouterr().out

    def test_M_has_no_direction(self, conf, tmp_path, capsys):
        assert main(["sweep", "--config", str(conf), "--param", "M", "--values", "2,3", "--runs", "2", "--out", str(tmp_path)]) == 0
        assert "none asserted" in capsys.readouterr().out

    def test_unknown_param(self, conf, tmp_path):
        assert main(["sweep", "--config", str(conf), "--param", "sigma", "--values", "1", "--out", str(tmp_path)]) == 2


class TestOracleAndMixing:
    @pytest.mark.parametrize("M,count,prob", [(2, 1, "1/1"), (3, 4, "3/4"), (4, 38, "12/19")])
    def test_oracle(self, M, count, prob, capsys):
        assert main(["oracle", "--M", str(M)]) == 0
        out = capsys.readouterr().out
        assert out.startswith(f"{count} connected graphs; edge probability {prob}")
        residual = float(out.rsplit(" ", 1)[1])
        assert residual < 1e-12

    def test_oracle_size_limit(self, capsys):
        assert main(["oracle", "--M", "6"]) == 2

    def test_mixing(self, capsys):
        assert main(["mixing", "--M", "3", "--tau1", "1000", "--samples", "20000"]) == 0
        tvs = [float(l.split("tv=")[1]) for l in capsys.readouterr().out.splitlines()]
        assert tvs[-1] < 0.05 and tvs[-1] < tvs[0]

    def test_mixing_trivial(self, capsys):
        assert main(["mixing", "--M", "2", "--tau1", "10", "--samples", "500"]) == 0
        assert all(float(l.split("tv=")[1]) == 0 for l in capsys.readouterr().out.splitlines())

    def test_mixing_size_limit(self):
        assert main(["mixing", "--M", "5"]) == 2
