"""Configuration parsing, CSV schema and the command-line surface."""
import os

import numpy as np
import pytest

from adaptarm import cli
from adaptarm import config as cfgmod
from adaptarm import sim as simmod
from adaptarm.control import ControlLaw
from adaptarm.reference import ConfigError, FeedbackKind, Interconnection, ReferenceForm
from adaptarm.sim import CSV_COLUMNS, ControlUpdate


class TestParse:
    def test_empty_document_is_first_preset(self):
        cfg = cfgmod.parse_config("")
        assert cfgmod.serialize_config(cfg) == cfgmod.serialize_config(cfgmod.preset("fig1"))

    def test_preset_key(self):
        cfg = cfgmod.parse_config("[sim]\npreset = fig3\n")
        assert cfg.ref.ell == 3
        assert cfg.ref.interconnection is Interconnection.FULL
        np.testing.assert_allclose(cfg.ref.alphas,
                                   (100.0, 4 * 100 ** 0.75, 60.0, 4 * 100 ** 0.25))

    def test_override_on_top_of_preset(self):
        cfg = cfgmod.parse_config("[sim]\npreset = fig2\nt_end = 3.5\n"
                                  "[reference]\nlambda_s = 0.25\n")
        assert cfg.t_end == 3.5
        assert cfg.ref.lambda_s == 0.25
        assert cfg.ref.ell == 2

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="frobnicate"):
            cfgmod.parse_config("[plant]\nfrobnicate = 1\n")

    def test_unknown_section_named(self):
        with pytest.raises(ConfigError, match="widgets"):
            cfgmod.parse_config("[widgets]\nx = 1\n")

    def test_negative_alpha_rejected_by_stability_test(self):
        with pytest.raises(ConfigError, match="Routh-Hurwitz"):
            cfgmod.parse_config("[reference]\nalphas = 100, -20\nell = 1\n")

    def test_gamma_forms(self):
        cfg = cfgmod.parse_config("[controller]\ngamma = 5\n")
        np.testing.assert_array_equal(cfg.gamma, 5.0 * np.eye(3))
        cfg = cfgmod.parse_config("[controller]\ngamma = 1, 2, 3\n")
        np.testing.assert_array_equal(cfg.gamma, np.diag([1.0, 2.0, 3.0]))

    def test_vectors_and_tracking_keyword(self):
        cfg = cfgmod.parse_config("[plant]\nq0 = 0.1, -0.2\nqdot0 = tracking\n")
        np.testing.assert_array_equal(cfg.q0, [0.1, -0.2])
        assert cfg.qdot0 is None

    def test_law_and_feedback(self):
        text = ("[controller]\nlaw = dc_constant_gain\n"
                "[reference]\nfeedback = constant\nlambda_c_star = 70\n")
        cfg = cfgmod.parse_config(text)
        assert cfg.law is ControlLaw.DC_CONSTANT_GAIN
        assert cfg.ref.feedback is FeedbackKind.CONSTANT_GAIN

    def test_modified_form_keys(self):
        text = ("[sim]\npreset = fig4\n[reference]\nlambda_matrix = 3.0\n")
        cfg = cfgmod.parse_config(text)
        assert cfg.ref.form is ReferenceForm.MODIFIED
        np.testing.assert_array_equal(cfg.ref.Lambda, 3.0 * np.eye(2))

    def test_roundtrip_all_presets(self):
        for name in cfgmod.PRESET_NAMES:
            text = cfgmod.serialize_config(cfgmod.preset(name))
            again = cfgmod.serialize_config(cfgmod.parse_config(text))
            assert text == again


class TestCsv:
    def test_header_and_row_count(self, tmp_path):
        cfg = cfgmod.preset("fig1")
        cfg.t_end = 0.05
        log = simmod.run(cfg)
        path = os.path.join(tmp_path, "out.csv")
        cfgmod.write_csv(log, path)
        data = cfgmod.read_csv(path)
        assert tuple(data.keys()) == CSV_COLUMNS
        assert len(data["t"]) == len(log)
        np.testing.assert_array_equal(data["e1"], log.e[:, 0])  # bit-exact reload

    def test_remainder_fill_pass(self, tmp_path):
        cfg = cfgmod.preset("fig1")
        cfg.t_end = 0.5
        log = simmod.run(cfg)
        assert log.rem is None
        cfgmod.fill_remainder(log)
        assert log.rem.shape == log.s.shape
        path = os.path.join(tmp_path, "out.csv")
        cfgmod.write_csv(log, path)
        data = cfgmod.read_csv(path)
        assert np.all(np.isfinite(data["rem1"]))


class TestCommands:
    def test_run_writes_csv_and_is_deterministic(self, tmp_path):
        out1 = os.path.join(tmp_path, "a.csv")
        out2 = os.path.join(tmp_path, "b.csv")
        assert cli.main(["run", "--preset", "fig1", "--out", out1, "--t-end", "0.5"]) == 0
        assert cli.main(["run", "--preset", "fig1", "--out", out2, "--t-end", "0.5"]) == 0
        assert open(out1, "rb").read() == open(out2, "rb").read()
        with open(out1) as fh:
            assert fh.readline().strip() == ",".join(CSV_COLUMNS)

    def test_zero_horizon(self, tmp_path):
        out = os.path.join(tmp_path, "z.csv")
        assert cli.main(["run", "--preset", "fig1", "--out", out, "--t-end", "0"]) == 0
        assert len(open(out).readlines()) == 2  # header + one row

    def test_config_error_exit_code(self, tmp_path):
        bad = os.path.join(tmp_path, "bad.ini")
        with open(bad, "w") as fh:
            fh.write("[reference]\nalphas = 100, -20\nell = 1\n")
        out = os.path.join(tmp_path, "x.csv")
        assert cli.main(["run", "--config", bad, "--out", out]) == cli.EXIT_CONFIG

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_aborted_exit_code(self, tmp_path):
        ini = os.path.join(tmp_path, "boom.ini")
        with open(ini, "w") as fh:
            fh.write("[sim]\nt_end = 2\n[tau_star]\nkind = step\n"
                     "amplitude = 1e280, 1e280\nt_on = 0.5\n")
        out = os.path.join(tmp_path, "boom.csv")
        assert cli.main(["run", "--config", ini, "--out", out]) == cli.EXIT_ABORTED
        assert os.path.exists(out)  # partial log still written

    def test_compare_zero_torque(self, tmp_path, capsys):
        out = os.path.join(tmp_path, "cmp.csv")
        assert cli.main(["compare", "--preset", "fig2", "--out", out,
                         "--t-end", "4"]) == 0
        data = {}
        import csv as csvmod
        with open(out) as fh:
            reader = csvmod.DictReader(fh)
            rows = list(reader)
        assert tuple(rows[0].keys()) == cli.COMPARE_COLUMNS
        # zero reference torque: the linear model stays at zero, difference
        # equals the nonlinear adaptation transient and decays
        lin = np.array([float(r["lin_e1"]) for r in rows])
        diff = np.array([abs(float(r["diff1"])) for r in rows])
        assert np.abs(lin).max() == 0.0
        assert diff[-1] < diff.max()

    def test_sweep_with_rejected_point(self, tmp_path):
        ini = os.path.join(tmp_path, "sweep.ini")
        with open(ini, "w") as fh:
            fh.write("[sim]\nt_end = 1\n"
                     "[sweep]\nreference.lambda_s = 0.1, 0.5\n")
        out = os.path.join(tmp_path, "grid")
        assert cli.main(["sweep", "--config", ini, "--out", out, "--jobs", "2"]) == 0
        names = sorted(os.listdir(out))
        assert "summary.csv" in names
        assert sum(n.endswith(".csv") for n in names) == 3  # 2 points + summary
        # a stability-violating point is marked rejected, the sweep continues
        ini2 = os.path.join(tmp_path, "sweep2.ini")
        with open(ini2, "w") as fh:
            fh.write("[sim]\nt_end = 1\n[reference]\nell = 1\n"
                     "[sweep]\nreference.alphas = 100, 20; 100, -20\n")
        out2 = os.path.join(tmp_path, "grid2")
        assert cli.main(["sweep", "--config", ini2, "--out", out2]) == 0
        summary = open(os.path.join(out2, "summary.csv")).read()
        assert "rejected" in summary and "ok" in summary

    def test_verify_fast_exit_zero(self, capsys):
        assert cli.main(["verify", "--level", "fast"]) == 0
        said = capsys.readouterr().out
        assert "PROPERTY dynamics.skew_symmetry PASS" in said
        assert "SUMMARY" in said
