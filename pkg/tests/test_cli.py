import pytest

from memtaxis.cli import main
from memtaxis.config import parse_config
from memtaxis.errors import ConfigError

BASE = """\
[model]
beta = 0.5
m = 0.5
s = 0.8

[transport]
d11 = 2
d22 = 3
d21 = 18
xi = 0.06
ell = 2

[delay]
tau = 8
"""


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_summary(out_dir):
    return (out_dir / "summary.txt").read_text()


class TestConfigParsing:
    def test_round_trip(self, tmp_path):
        cfg = parse_config(write_cfg(tmp_path, BASE))
        assert cfg.kinetic_params().beta == 0.5
        assert cfg.transport_params().ell == 2.0
        assert cfg.single_tau() == 8.0

    def test_unknown_key_rejected_with_line(self, tmp_path):
        bad = BASE.replace("tau = 8", "tau = 8\nbogus = 1")
        with pytest.raises(ConfigError) as info:
            parse_config(write_cfg(tmp_path, bad))
        assert "bogus" in str(info.value)
        assert "line 15" in str(info.value)

    def test_unknown_section_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(write_cfg(tmp_path, BASE + "\n[plots]\nkind = 1\n"))

    def test_malformed_number(self, tmp_path):
        with pytest.raises(ConfigError) as info:
            parse_config(write_cfg(tmp_path, BASE.replace("d11 = 2", "d11 = two")))
        assert "line" in str(info.value)

    def test_non_finite_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(write_cfg(tmp_path, BASE.replace("tau = 8", "tau = inf")))

    def test_missing_section(self, tmp_path):
        text = BASE.split("[delay]")[0]
        with pytest.raises(ConfigError):
            parse_config(write_cfg(tmp_path, text))

    def test_tau_and_range_conflict(self, tmp_path):
        bad = BASE.replace("tau = 8", "tau = 8\ntau_start = 1")
        with pytest.raises(ConfigError):
            parse_config(write_cfg(tmp_path, bad))

    def test_nonpositive_param_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(write_cfg(tmp_path, BASE.replace("beta = 0.5", "beta = 0")))

    def test_value_lists_parse(self, tmp_path):
        cfg = parse_config(write_cfg(tmp_path, BASE.replace("ell = 2", "ell = 2, 3")))
        assert cfg.transport["ell"] == (2.0, 3.0)
        with pytest.raises(ConfigError):
            cfg.transport_params()

    def test_tau_grid(self, tmp_path):
        text = BASE.replace("tau = 8",
                            "tau_start = 1\ntau_stop = 2\ntau_count = 5")
        cfg = parse_config(write_cfg(tmp_path, text))
        assert cfg.taus() == (1.0, 1.25, 1.5, 1.75, 2.0)


class TestAnalyze:
    def test_reference_outputs(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, BASE)
        out = tmp_path / "out"
        assert main(["analyze", "--config", cfg, "--out", str(out)]) == 0
        text = read_summary(out)
        assert "DelayHopf" in text
        assert "tau*=6.14982" in text
        assert "n_c=1" in text
        rows = (out / "analysis.csv").read_text().splitlines()
        header = rows[0].split(",")
        row1 = dict(zip(header, rows[2].split(",")))
        assert row1["n"] == "1"
        assert float(row1["omega_n"]) == pytest.approx(0.418, abs=5e-4)
        assert float(row1["tau_n0"]) == pytest.approx(6.1498, abs=5e-4)
        assert float(row1["transversality"]) > 0

    def test_no_delay_coupling(self, tmp_path):
        cfg = write_cfg(tmp_path, BASE.replace("d21 = 18", "d21 = 0"))
        out = tmp_path / "out"
        assert main(["analyze", "--config", cfg, "--out", str(out)]) == 0
        text = read_summary(out)
        assert "StableAllTau" in text
        rows = (out / "analysis.csv").read_text().splitlines()
        assert all(row.split(",")[7] == "" for row in rows[1:])

    def test_determinism(self, tmp_path):
        cfg = write_cfg(tmp_path, BASE)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["analyze", "--config", cfg, "--out", str(out1)])
        main(["analyze", "--config", cfg, "--out", str(out2)])
        assert (out1 / "analysis.csv").read_bytes() == (out2 / "analysis.csv").read_bytes()

    def test_config_error_exit_code(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, BASE.replace("beta = 0.5", "beta = -1"))
        assert main(["analyze", "--config", cfg, "--out", str(tmp_path)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_missing_file_exit_code(self, tmp_path, capsys):
        assert main(["analyze", "--config", str(tmp_path / "nope.cfg")]) == 2

    def test_env_output_dir(self, tmp_path, monkeypatch):
        cfg = write_cfg(tmp_path, BASE)
        env_dir = tmp_path / "envout"
        monkeypatch.setenv("MEMTAXIS_OUT", str(env_dir))
        assert main(["analyze", "--config", cfg]) == 0
        assert (env_dir / "analysis.csv").exists()


class TestNormalFormCmd:
    def test_reference_values(self, tmp_path):
        cfg = write_cfg(tmp_path, BASE)
        out = tmp_path / "out"
        assert main(["normal-form", "--config", cfg, "--out", str(out)]) == 0
        text = read_summary(out)
        assert "K1=0.0159958" in text
        assert "K2=-0.928294" in text
        assert "supercritical, stable" in text

    def test_no_hopf_point_message(self, tmp_path):
        cfg = write_cfg(tmp_path, BASE.replace("d21 = 18", "d21 = 0"))
        out = tmp_path / "out"
        assert main(["normal-form", "--config", cfg, "--out", str(out)]) == 0
        assert "no Hopf point" in read_summary(out)


class TestSimulateCmd:
    def test_converged_run(self, tmp_path):
        text = BASE.replace("d21 = 18", "d21 = 0").replace("tau = 8", "tau = 1")
        text += ("\n[simulation]\nn_cells = 32\nt_end = 100\n"
                 "ic_mode = 1\nic_amplitude = 0.05\n")
        cfg = write_cfg(tmp_path, text)
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        for name in ("snapshots.csv", "probe.csv", "spectrum.csv",
                     "verdict.csv", "summary.txt"):
            assert (out / name).exists(), name
        assert "ConvergedToSteady" in (out / "verdict.csv").read_text()

    def test_undecided_exit_code(self, tmp_path):
        text = BASE.replace("tau = 8", "tau = 3")
        text += ("\n[simulation]\nn_cells = 64\nt_end = 50\n"
                 "ic_mode = 1\nic_amplitude = 0.1\n")
        cfg = write_cfg(tmp_path, text)
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 4

    def test_numerical_error_exit_code(self, tmp_path, capsys):
        text = BASE + ("\n[simulation]\nn_cells = 32\nt_end = 10\n"
                       "ic_mode = 1\nic_amplitude = 1.5\n")
        cfg = write_cfg(tmp_path, text)
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 3
        assert "positivity" in capsys.readouterr().err


class TestSweepCmd:
    def test_stability_flip_brackets_crossing(self, tmp_path):
        text = BASE.replace(
            "tau = 8", "tau_start = 5.9\ntau_stop = 6.4\ntau_count = 6")
        cfg = write_cfg(tmp_path, text)
        out = tmp_path / "out"
        assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
        rows = (out / "sweep.csv").read_text().splitlines()
        header = rows[0].split(",")
        stable = []
        for row in rows[1:]:
            rec = dict(zip(header, row.split(",")))
            stable.append((float(rec["tau"]), rec["stable"]))
        flips = [(a, b) for a, b in zip(stable, stable[1:]) if a[1] != b[1]]
        assert len(flips) == 1
        (t_lo, _), (t_hi, _) = flips[0]
        assert t_lo < 6.1498 < t_hi

    def test_single_point_matches_analyze(self, tmp_path):
        text = BASE.replace("tau = 8",
                            "tau_start = 8\ntau_stop = 8\ntau_count = 1")
        cfg = write_cfg(tmp_path, text)
        out = tmp_path / "out"
        assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
        rows = (out / "sweep.csv").read_text().splitlines()
        assert len(rows) == 2
        rec = dict(zip(rows[0].split(","), rows[1].split(",")))
        out2 = tmp_path / "ref"
        main(["analyze", "--config", write_cfg(tmp_path, BASE, "ref.cfg"),
              "--out", str(out2)])
        arows = (out2 / "analysis.csv").read_text().splitlines()
        arec = dict(zip(arows[0].split(","), arows[2].split(",")))
        assert rec["tau_star"] == arec["tau_n0"]
        assert rec["regime"] == "DelayHopf"
        assert rec["stable"] == "false"

    def test_domain_scale_grid_switches_mode(self, tmp_path):
        text = BASE.replace("ell = 2", "ell = 2, 3").replace("tau = 8", "tau = 4")
        cfg = write_cfg(tmp_path, text)
        out = tmp_path / "out"
        assert main(["sweep", "--config", cfg, "--out", str(out),
                     "--normal-form"]) == 0
        rows = (out / "sweep.csv").read_text().splitlines()
        header = rows[0].split(",")
        recs = [dict(zip(header, row.split(","))) for row in rows[1:]]
        by_ell = {float(r["ell"]): r for r in recs}
        assert by_ell[2.0]["n_c"] == "1"
        assert by_ell[3.0]["n_c"] == "2"
        assert float(by_ell[2.0]["k1"]) == pytest.approx(0.016, abs=1e-3)
        assert float(by_ell[3.0]["k2"]) == pytest.approx(-1.3669, abs=7e-3)

    def test_workers_do_not_change_output(self, tmp_path):
        text = BASE.replace(
            "tau = 8", "tau_start = 1\ntau_stop = 7\ntau_count = 7\nworkers = 4")
        cfg = write_cfg(tmp_path, text)
        out1, out2 = tmp_path / "w4", tmp_path / "w1"
        assert main(["sweep", "--config", cfg, "--out", str(out1)]) == 0
        text1 = text.replace("workers = 4", "workers = 1")
        cfg1 = write_cfg(tmp_path, text1, "run1.cfg")
        assert main(["sweep", "--config", cfg1, "--out", str(out2)]) == 0
        assert (out1 / "sweep.csv").read_bytes() == (out2 / "sweep.csv").read_bytes()

    def test_error_rows_recorded(self, tmp_path):
        # a11 >= 0 draws violate the analysis premise and land in the error column
        text = BASE.replace("beta = 0.5", "beta = 0.05").replace(
            "m = 0.5", "m = 2")
        text = text.replace("tau = 8", "tau_start = 1\ntau_stop = 2\ntau_count = 2")
        cfg = write_cfg(tmp_path, text)
        out = tmp_path / "out"
        assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
        rows = (out / "sweep.csv").read_text().splitlines()
        assert len(rows) == 3
        for row in rows[1:]:
            assert "not negative" in row
