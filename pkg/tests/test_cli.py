"""CLI: config validation, artifact schemas, determinism, exit codes."""

import json
import os

import numpy as np
import pytest

from balhet.cli import load_config, main
from balhet.errors import ConfigInvalid
from balhet.serialize import read_csv


def run_cli(*args):
    return main(list(args))


def read_bytes(path):
    with open(path, "rb") as handle:
        return handle.read()


class TestConfigLoading:
    def test_defaults_load(self):
        cfg = load_config(None, mode="spectrum")
        assert cfg.mode == "spectrum"
        assert cfg.opo.gamma == 1.0
        assert cfg.heterodyne.Omega == 0.05

    def test_file_overrides(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[opo]\ngamma = 2.0\nepsilon = 0.25\n")
        cfg = load_config(str(path), mode="spectrum")
        assert cfg.opo.gamma == 2.0
        assert cfg.opo.epsilon == 0.25

    def test_missing_file(self):
        with pytest.raises(ConfigInvalid):
            load_config("/nonexistent/exp.ini")

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[opo]\ngamm = 2.0\n")
        with pytest.raises(ConfigInvalid, match="gamm"):
            load_config(str(path))

    def test_field_level_diagnostics(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[opo]\nepsilon = 0.9\n")  # above threshold
        with pytest.raises(ConfigInvalid, match=r"\[opo\]"):
            load_config(str(path))

    def test_seed_override(self):
        cfg = load_config(None, mode="spectrum", seed=777)
        assert cfg.seed == 777
        assert cfg.snapshot["run"]["seed"] == "777"

    def test_shipped_reference_config_matches_defaults(self):
        ref_path = os.path.join(os.path.dirname(__file__), "..", "configs",
                                "reference.ini")
        ref = load_config(ref_path, mode="spectrum")
        default = load_config(None, mode="spectrum")
        assert ref.opo == default.opo
        assert ref.heterodyne == default.heterodyne
        assert ref.welch == default.welch
        assert ref.lock_heterodyne == default.lock_heterodyne
        for key in ("Omega_prime", "theta", "demod_phase", "lowpass_cutoff",
                    "kp", "ki", "dt", "duration", "lock_tolerance"):
            assert getattr(ref.lock, key) == getattr(default.lock, key)


class TestArtifacts:
    def test_spectrum_schema_golden(self, tmp_path):
        out = tmp_path / "out"
        assert run_cli("spectrum", "--out", str(out)) == 0
        lines = (out / "spectrum_heterodyne.csv").read_text().splitlines()
        assert lines[0] == "# spectral-density csv v1"
        assert lines[1] == "# tool: balhet 0.1.0"
        header_index = next(i for i, l in enumerate(lines) if not l.startswith("#"))
        assert lines[header_index] == "omega,chi_normalized"
        assert any(l.startswith("# config_hash: ") for l in lines[:header_index])
        assert any(l.startswith("# normalization: heterodyne_floor") for l in lines)

    def test_montecarlo_has_sigma_column(self, tmp_path):
        out = tmp_path / "out"
        cfgfile = tmp_path / "exp.ini"
        cfgfile.write_text("[montecarlo]\nsegments = 32\nsegment_length = 512\n")
        assert run_cli("montecarlo", "--config", str(cfgfile),
                       "--out", str(out)) == 0
        meta, cols = read_csv(str(out / "montecarlo.csv"))
        assert list(cols) == ["omega", "chi_normalized", "sigma"]
        assert meta["n_segments"] == "32"
        assert np.all(cols["sigma"] >= 0)

    def test_correlation_table(self, tmp_path):
        out = tmp_path / "out"
        cfgfile = tmp_path / "exp.ini"
        cfgfile.write_text("[opo]\nepsilon = 0.4\n[heterodyne]\nomega = 2.0\n"
                           "[correlation]\npoints = 41\n")
        assert run_cli("correlation", "--config", str(cfgfile),
                       "--out", str(out)) == 0
        _, cols = read_csv(str(out / "correlation.csv"))
        assert list(cols) == ["tau", "lambda_prime", "lambda_prime_quadrature",
                              "time_average"]
        assert np.allclose(cols["lambda_prime"], cols["lambda_prime_quadrature"],
                           atol=1e-12)
        assert np.allclose(cols["lambda_prime"], cols["time_average"],
                           atol=1e-8)

    def test_lock_mode_artifacts(self, tmp_path):
        out = tmp_path / "out"
        assert run_cli("lock", "--out", str(out), "--svg") == 0
        summary = json.loads((out / "lock_summary.json").read_text())
        assert summary["locked"] is True
        assert summary["lock_time"] < 0.4
        assert abs(summary["residual_rms"]) < 1e-3
        _, cols = read_csv(str(out / "lock_trajectory.csv"))
        assert list(cols) == ["t", "phibar", "error"]
        assert abs(cols["phibar"][-1]) < 1e-3
        assert (out / "lock.svg").read_text().startswith("<svg")

    def test_figure3_panels(self, tmp_path):
        out = tmp_path / "out"
        assert run_cli("figure3", "--out", str(out)) == 0
        _, a = read_csv(str(out / "figure3_a.csv"))
        _, c = read_csv(str(out / "figure3_c.csv"))
        _, d = read_csv(str(out / "figure3_d.csv"))
        assert np.min(a["chi_normalized"]) <= 0.003
        i = np.argmin(c["chi_normalized"])
        assert abs(abs(c["omega"][i]) - 5.0) < 1e-12
        assert np.min(c["chi_normalized"]) == pytest.approx(0.495, abs=1e-3)
        j = np.argmin(np.abs(d["omega"]))
        assert d["chi_normalized"][j] == 0.0
        assert (out / "figure3.svg").exists()

    def test_figure3_with_overlay(self, tmp_path):
        out = tmp_path / "out"
        cfgfile = tmp_path / "exp.ini"
        cfgfile.write_text("[montecarlo]\noverlay_seeds = 2\nsegments = 24\n"
                           "segment_length = 1024\nn_segments_min = 8\n")
        assert run_cli("figure3", "--config", str(cfgfile), "--out", str(out)) == 0
        svg = (out / "figure3.svg").read_text()
        assert "circle" in svg  # Monte-Carlo points drawn


class TestDeterminism:
    def test_byte_identical_reruns(self, tmp_path):
        seeded = ("montecarlo", "--seed", "31")
        conf = tmp_path / "exp.ini"
        conf.write_text("[montecarlo]\nsegments = 24\nsegment_length = 512\n"
                        "n_segments_min = 8\n")
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        assert run_cli(*seeded, "--config", str(conf), "--out", str(out1)) == 0
        assert run_cli(*seeded, "--config", str(conf), "--out", str(out2)) == 0
        for name in ("montecarlo.csv", "montecarlo_analytic.csv"):
            assert read_bytes(out1 / name) == read_bytes(out2 / name)

    def test_seed_changes_stochastic_output(self, tmp_path):
        conf = tmp_path / "exp.ini"
        conf.write_text("[montecarlo]\nsegments = 24\nsegment_length = 512\n"
                        "n_segments_min = 8\n")
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        assert run_cli("montecarlo", "--seed", "1", "--config", str(conf),
                       "--out", str(out1)) == 0
        assert run_cli("montecarlo", "--seed", "2", "--config", str(conf),
                       "--out", str(out2)) == 0
        assert (read_bytes(out1 / "montecarlo.csv")
                != read_bytes(out2 / "montecarlo.csv"))

    def test_figure3_reruns_identical(self, tmp_path):
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        assert run_cli("figure3", "--out", str(out1)) == 0
        assert run_cli("figure3", "--out", str(out2)) == 0
        for name in ("figure3_a.csv", "figure3_b.csv", "figure3_c.csv",
                     "figure3_d.csv", "figure3.svg"):
            assert read_bytes(out1 / name) == read_bytes(out2 / name)


class TestExitCodes:
    def test_config_error_is_two(self, tmp_path):
        conf = tmp_path / "exp.ini"
        conf.write_text("[opo]\nepsilon = 2.0\n")
        assert run_cli("spectrum", "--config", str(conf),
                       "--out", str(tmp_path / "o")) == 2
        assert run_cli("spectrum", "--config", "/missing.ini") == 2

    def test_physicality_error_is_three(self, tmp_path):
        # conjugate-quadrature Monte-Carlo with the pump at threshold needs
        # the anti-squeezed spectrum at zero frequency, which diverges
        conf = tmp_path / "exp.ini"
        conf.write_text("[heterodyne]\nphi1 = 1.5707963267948966\n"
                        "phi2 = 1.5707963267948966\n"
                        "[montecarlo]\nsegments = 16\nsegment_length = 256\n"
                        "n_segments_min = 8\n")
        assert run_cli("montecarlo", "--config", str(conf),
                       "--out", str(tmp_path / "o")) == 3

    def test_io_error_is_four(self, tmp_path):
        blocker = tmp_path / "not_a_dir"
        blocker.write_text("occupied")
        assert run_cli("spectrum", "--out", str(blocker / "sub")) == 4
