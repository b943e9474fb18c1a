import json
import subprocess
import sys

import numpy as np
import pytest

import nfsim as nf
from nfsim.cli import main
from nfsim.io import CSV_COLUMNS, load_config_file, write_spectrum_csv


def run_cli(args, cwd=None):
    return subprocess.run([sys.executable, "-m", "nfsim.cli", *args],
                          capture_output=True, text=True, cwd=cwd)


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:]]
    return header, rows


class TestCsvWriter:
    def test_schema_and_row_count(self, tmp_path):
        grid = nf.TimeGrid(0.0, 0.5, 1e-2)
        trace = np.linspace(1.0, 0.0, grid.samples)
        path = write_spectrum_csv(tmp_path / "out.csv", grid,
                                  intensities={"I_total": trace})
        header, rows = read_csv(path)
        assert header == list(CSV_COLUMNS)
        assert len(rows) == grid.samples
        assert rows[0][2] == "1.0"
        assert rows[0][5] == ""  # absent detector trace -> empty field

    def test_normalization(self, tmp_path):
        grid = nf.TimeGrid(0.0, 0.5, 1e-2)
        trace = 5.0 * np.exp(-grid.taus)
        path = write_spectrum_csv(tmp_path / "out.csv", grid,
                                  intensities={"I_total": trace},
                                  normalize_peak=True)
        _, rows = read_csv(path)
        assert float(rows[0][2]) == 1.0

    def test_unknown_column_rejected(self, tmp_path):
        grid = nf.TimeGrid(0.0, 0.5, 1e-2)
        with pytest.raises(nf.ConfigError):
            write_spectrum_csv(tmp_path / "x.csv", grid,
                               intensities={"I_weird": np.zeros(grid.samples)})


class TestSingleCommand:
    def test_writes_csv_and_manifest(self, tmp_path):
        code = main(["single", "--xi", "1", "--omega2", "28", "--pmax", "14",
                     "--tau-end", "3", "--outdir", str(tmp_path)])
        assert code == 0
        header, rows = read_csv(tmp_path / "single.csv")
        manifest = json.loads((tmp_path / "single_manifest.json").read_text())
        assert len(rows) == manifest["grid"]["samples"]
        assert manifest["config"]["eps"] == [28.0, -28.0]

    def test_zero_thickness_emits_zeros(self, tmp_path):
        code = main(["single", "--xi", "0", "--tau-end", "1",
                     "--outdir", str(tmp_path)])
        assert code == 0
        _, rows = read_csv(tmp_path / "single.csv")
        assert all(float(r[2]) == 0.0 for r in rows)

    def test_unsplit_dynamical_minimum(self, tmp_path):
        # zero field: the trace dips at the thickness-driven null
        code = main(["single", "--b", "0", "--xi", "7", "--pmax", "30",
                     "--tau-end", "2", "--tau-step", "1e-3",
                     "--outdir", str(tmp_path)])
        assert code == 0
        _, rows = read_csv(tmp_path / "single.csv")
        taus = np.array([float(r[1]) for r in rows])
        I = np.array([float(r[2]) for r in rows])
        sel = (taus > 0.2) & (taus < 1.2)
        null_tau = taus[sel][np.argmin(I[sel])]
        assert 2 * np.sqrt(7.0 * 0.8 * null_tau) == pytest.approx(3.8317, abs=5e-3)

    def test_determinism_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["single", "--xi", "2", "--tau-end", "2",
                         "--outdir", str(out)]) == 0
        assert (a / "single.csv").read_bytes() == (b / "single.csv").read_bytes()
        assert (a / "single_manifest.json").read_bytes() == \
            (b / "single_manifest.json").read_bytes()

    def test_manifest_replay_reproduces_outputs(self, tmp_path):
        first = tmp_path / "first"
        again = tmp_path / "again"
        main(["single", "--xi", "1.5", "--omega2", "28", "--tau-end", "2",
              "--outdir", str(first)])
        code = main(["--from-manifest", str(first / "single_manifest.json"),
                     "--outdir", str(again)])
        assert code == 0
        assert (first / "single.csv").read_bytes() == (again / "single.csv").read_bytes()


class TestScheme1Command:
    def test_paper_defaults_run(self, tmp_path):
        code = main(["scheme1", "--xi1", "7", "--xi2", "7", "--pmax", "19",
                     "--b1", "39", "--match-case", "2", "--shutter", "7:74",
                     "--outdir", str(tmp_path)])
        assert code == 0
        man = json.loads((tmp_path / "scheme1_manifest.json").read_text())
        d = man["diagnostics"]
        assert d["visibility_target1"] > 0.8
        assert d["visibility_target2"] < 0.15
        assert (tmp_path / "scheme1_target1.csv").exists()
        assert (tmp_path / "scheme1_target2.csv").exists()

    def test_control_flag(self, tmp_path):
        code = main(["scheme1", "--eps1", "48:-27", "--eps2", "28:-16",
                     "--b2-parallel-z", "--outdir", str(tmp_path)])
        assert code == 0
        man = json.loads((tmp_path / "scheme1_manifest.json").read_text())
        assert man["config"]["eps2"] == [48.0, -27.0]
        assert man["diagnostics"]["visibility_target2"] > 0.8

    def test_splitting_scale_flag(self, tmp_path):
        code = main(["scheme1", "--eps1", "48:-27", "--eps2", "28:-16",
                     "--scale-splitting", "2", "--outdir", str(tmp_path)])
        assert code == 0
        man = json.loads((tmp_path / "scheme1_manifest.json").read_text())
        assert man["config"]["eps1"] == [96.0, -54.0]


class TestScheme2Command:
    def test_zero_phase_preserves_beat(self, tmp_path):
        code = main(["scheme2", "--phi", "0", "--tau-end", "5",
                     "--outdir", str(tmp_path)])
        assert code == 0
        man = json.loads((tmp_path / "scheme2_manifest.json").read_text())
        assert man["diagnostics"]["visibility_det1"] > 0.8

    def test_quarter_phase_marks(self, tmp_path):
        code = main(["scheme2", "--phi", "pi/2", "--auto-alpha", "--pmax", "14",
                     "--xi", "1", "--tau-end", "5", "--outdir", str(tmp_path)])
        assert code == 0
        man = json.loads((tmp_path / "scheme2_manifest.json").read_text())
        assert man["diagnostics"]["visibility_det1"] < 0.02
        assert man["config"]["alpha"] == pytest.approx(0.717, abs=1e-3)

    def test_storage_mode(self, tmp_path):
        code = main(["scheme2", "--mode", "storage", "--tau0", "auto",
                     "--window", "quarter", "--pmax", "1", "--tau-end", "5",
                     "--outdir", str(tmp_path)])
        assert code == 0
        man = json.loads((tmp_path / "scheme2_manifest.json").read_text())
        assert len(man["config"]["storage_events"]) == 1
        assert man["diagnostics"]["visibility_det1"] < 1e-10


class TestConfigPrecedence:
    def test_file_provides_defaults_cli_overrides(self, tmp_path):
        cfgfile = tmp_path / "run.ini"
        cfgfile.write_text("[run]\nxi = 2.0\npmax = 8\ntau_end = 2\n")
        out1 = tmp_path / "filecfg"
        main(["single", "--config", str(cfgfile), "--outdir", str(out1)])
        man = json.loads((out1 / "single_manifest.json").read_text())
        assert man["config"]["xi"] == 2.0 and man["config"]["pmax"] == 8

        out2 = tmp_path / "clioverride"
        main(["single", "--config", str(cfgfile), "--xi", "3",
              "--outdir", str(out2)])
        man2 = json.loads((out2 / "single_manifest.json").read_text())
        assert man2["config"]["xi"] == 3.0 and man2["config"]["pmax"] == 8

    def test_constants_override_section(self, tmp_path):
        cfgfile = tmp_path / "sn.ini"
        cfgfile.write_text("[constants]\nmean_lifetime_ns = 25.0\n")
        out = tmp_path / "sn"
        main(["single", "--config", str(cfgfile), "--tau-end", "1",
              "--outdir", str(out)])
        man = json.loads((out / "single_manifest.json").read_text())
        assert man["constants"]["mean_lifetime_ns"] == 25.0

    def test_bad_config_file(self, tmp_path):
        assert main(["single", "--config", str(tmp_path / "missing.ini")]) == 2

    def test_load_config_file_sections(self, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text("[run]\nxi = 1\n[target1]\neps = 48:-27\n")
        cfg = load_config_file(p)
        assert cfg["target1"]["eps"] == "48:-27"


class TestExitCodes:
    def test_usage_error(self):
        proc = run_cli(["scheme1", "--match-case", "7"])
        assert proc.returncode == 2

    def test_config_error(self, tmp_path):
        code = main(["scheme1", "--eps1", "48:-27", "--outdir", str(tmp_path)])
        assert code == 2

    def test_nonconvergence(self, tmp_path):
        code = main(["single", "--xi", "7", "--pmax", "2", "--tau-end", "3",
                     "--outdir", str(tmp_path)])
        assert code == 3
        assert (tmp_path / "single.csv").exists()  # outputs still written

    def test_outdir_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("NFSIM_OUTDIR", str(tmp_path))
        assert main(["single", "--xi", "1", "--tau-end", "1"]) == 0
        assert (tmp_path / "single.csv").exists()


class TestSweep:
    def test_sweep_runs_each_value(self, tmp_path):
        code = main(["single", "--sweep", "xi=0.5,1.0", "--tau-end", "1",
                     "--outdir", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "xi0.5_single.csv").exists()
        assert (tmp_path / "xi1_single.csv").exists()

    def test_unknown_sweep_flag(self, tmp_path):
        assert main(["single", "--sweep", "nope=1,2",
                     "--outdir", str(tmp_path)]) == 2


class TestInfoCommands:
    def test_constants_text(self):
        proc = run_cli(["constants", "--b", "39"])
        assert proc.returncode == 0
        assert "eps_ground  = +47.6" in proc.stdout

    def test_match_text(self):
        proc = run_cli(["match", "--b1", "39", "--case", "2"])
        assert proc.returncode == 0
        assert "22.58" in proc.stdout

    def test_zero_field_constants(self):
        proc = run_cli(["constants", "--b", "0"])
        assert "+0.0000" in proc.stdout and "-0.0000" in proc.stdout
