"""CLI contract: scenarios, sweeps, output schemas, exit codes, determinism."""

import json
from pathlib import Path

import numpy as np
import pytest

from memosc.cli import (
    ConfigError,
    DEFAULT_CONFIG,
    main,
    parse_sweep_values,
    resolve_config,
    run_scenario,
    run_sweep,
)

# Composition defect of the memory model at (0, 1, 2), omega = 1, for the
# endpoints of the gamma sweep; frozen from the first verified run.
SWEEP_DEFECT_GAMMA_01 = 0.00877577432279641
SWEEP_DEFECT_GAMMA_09 = 1.98448899544742


def cfg_for(tmp_path, **overrides):
    cfg = dict(DEFAULT_CONFIG)
    cfg["out_dir"] = str(tmp_path)
    cfg.update(overrides)
    return cfg


def read_summary(tmp_path, scenario):
    return json.loads((Path(tmp_path) / f"{scenario}.summary.json").read_text())


class TestConfig:
    def test_defaults_plus_overrides(self, tmp_path):
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps({"gamma": 0.25}))
        cfg = resolve_config(str(cfg_file), ["omega=1.5", "n_times=7"], str(tmp_path))
        assert cfg["gamma"] == 0.25
        assert cfg["omega"] == 1.5
        assert cfg["n_times"] == 7
        assert cfg["out_dir"] == str(tmp_path)

    def test_unknown_key_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            resolve_config(None, ["nope=1"], str(tmp_path))

    def test_malformed_override_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            resolve_config(None, ["gamma"], str(tmp_path))
        with pytest.raises(ConfigError):
            resolve_config(None, ["gamma=abc"], str(tmp_path))

    def test_sweep_value_parsing(self):
        np.testing.assert_allclose(parse_sweep_values("0.1:0.5:0.2"), [0.1, 0.3, 0.5])
        np.testing.assert_allclose(parse_sweep_values("1,2,3"), [1.0, 2.0, 3.0])
        with pytest.raises(ConfigError):
            parse_sweep_values("0.1:0.5")
        with pytest.raises(ConfigError):
            parse_sweep_values("0.5:0.1:0.1:9")


class TestScenarios:
    def test_classical_trajectory_record(self, tmp_path):
        cfg = cfg_for(tmp_path, n_times=5, t_end=1.0)
        record = run_scenario("classical-trajectory", cfg)
        assert record.passed
        summary = read_summary(tmp_path, "classical-trajectory")
        assert summary["passed"] is True
        assert summary["config"]["n_times"] == 5  # full config echoed
        csv = Path(record.series_path).read_text().splitlines()
        assert csv[0] == "t,x,p,x_rk4,p_rk4,abs_err"
        assert len(csv) == 6

    def test_asymptotics_outputs(self, tmp_path):
        cfg = cfg_for(tmp_path, omega=0.0, x0=0.0, p0=1.0, n_times=5, t_end=10.0)
        record = run_scenario("asymptotics", cfg)
        out = record.outputs
        np.testing.assert_allclose(out["x_asympt_new"], 2.0)
        np.testing.assert_allclose(out["x_asympt_ck"], 1.0)
        assert record.passed

    def test_quantum_defect_ck_passes(self, tmp_path):
        cfg = cfg_for(tmp_path, kernel="ck")
        record = run_scenario("quantum-defect", cfg)
        assert record.passed
        worst = max(
            record.outputs["coefficient_distance"],
            record.outputs["norm_modulus_error"],
            record.outputs["norm_phase_error"],
        )
        assert worst <= 1e-9

    def test_quantum_defect_new_breaks(self, tmp_path):
        cfg = cfg_for(tmp_path, kernel="new")
        record = run_scenario("quantum-defect", cfg)
        assert record.passed  # "breaks composition" is the passing condition
        assert record.outputs["density_l2"] > 1e-3

    def test_packet_evolution_pure_damping(self, tmp_path):
        cfg = cfg_for(
            tmp_path,
            kernel="pure-damping",
            omega=0.0,
            x0=0.0,
            p0=1.0,
            t_end=4.0,
            n_times=9,
        )
        record = run_scenario("packet-evolution", cfg)
        assert record.passed
        csv = Path(record.series_path).read_text().splitlines()
        assert csv[0] == "t,center,momentum,dispersion,norm,center_classical,center_abs_err"

    def test_kernel_check(self, tmp_path):
        cfg = cfg_for(tmp_path, kernel="new", n_taus=2)
        record = run_scenario("kernel-check", cfg)
        assert record.passed
        assert record.outputs["max_residual"] <= 1e-5

    def test_appendix_check(self, tmp_path):
        cfg = cfg_for(tmp_path, n_taus=3)
        record = run_scenario("appendix-check", cfg)
        assert record.passed
        assert record.outputs["xp_hamiltonian_residual"] <= 1e-5
        assert record.outputs["mass_hamiltonian_residual"] > 1e-2

    def test_unknown_scenario_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            run_scenario("nope", cfg_for(tmp_path))

    def test_csv_determinism(self, tmp_path):
        cfg_a = cfg_for(tmp_path / "a", n_times=5, t_end=1.0)
        cfg_b = cfg_for(tmp_path / "b", n_times=5, t_end=1.0)
        rec_a = run_scenario("classical-trajectory", cfg_a)
        rec_b = run_scenario("classical-trajectory", cfg_b)
        assert Path(rec_a.series_path).read_bytes() == Path(rec_b.series_path).read_bytes()


class TestSweep:
    def test_gamma_sweep_monotone_defect(self, tmp_path):
        cfg = cfg_for(tmp_path)
        values = [round(0.1 * i, 1) for i in range(1, 10)]
        summary = run_sweep("classical-defect", cfg, "gamma", values)
        assert summary["passed"]
        norms = [r["outputs"]["defect_norm"] for r in summary["records"]]
        assert all(b > a for a, b in zip(norms, norms[1:]))
        np.testing.assert_allclose(norms[0], SWEEP_DEFECT_GAMMA_01, rtol=1e-9)
        np.testing.assert_allclose(norms[-1], SWEEP_DEFECT_GAMMA_09, rtol=1e-9)

    def test_single_value_matches_scenario(self, tmp_path):
        cfg = cfg_for(tmp_path)
        summary = run_sweep("classical-defect", cfg, "gamma", [0.5])
        direct = run_scenario("classical-defect", cfg_for(tmp_path / "direct", gamma=0.5))
        np.testing.assert_allclose(
            summary["records"][0]["outputs"]["defect_norm"],
            direct.outputs["defect_norm"],
            rtol=0,
        )

    def test_invalid_value_isolated(self, tmp_path):
        cfg = cfg_for(tmp_path)
        summary = run_sweep("classical-defect", cfg, "gamma", [0.5, 1.5, 0.7])
        flags = [r["passed"] for r in summary["records"]]
        assert flags == [True, False, True]
        assert "error" in summary["records"][1]

    def test_bad_axis_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            run_sweep("classical-defect", cfg_for(tmp_path), "model", [1.0])


class TestMain:
    def test_success_exit_code(self, tmp_path, capsys):
        code = main(
            [
                "classical-defect",
                "--set",
                "model=ck",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        assert "PASS" in capsys.readouterr().out

    def test_config_error_exit_code(self, tmp_path, capsys):
        assert main(["classical-defect", "--set", "bogus=1", "--out", str(tmp_path)]) == 2

    def test_domain_error_exit_code(self, tmp_path, capsys):
        code = main(
            ["classical-trajectory", "--set", "gamma=2.0", "--out", str(tmp_path)]
        )
        assert code == 3

    def test_verify_subcommand(self, tmp_path, capsys):
        code = main(["verify", "--out", str(tmp_path)])
        assert code == 0
        report = json.loads((tmp_path / "verify.summary.json").read_text())
        assert report["all_passed"] is True
        names = {c["name"] for c in report["checks"]}
        assert "classical.symplectic_det" in names
        assert "quantum.composition_ck" in names
