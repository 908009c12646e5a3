"""Command-line front end: named scenarios, parameter sweeps, verification.

Every invocation takes one JSON config (``--config``), overridable field by
field with ``--set key=value``. Results are written as a JSON summary plus a
CSV series per scenario; numbers are printed with 17 significant digits so
files round-trip exactly and reruns are byte-identical.

Exit codes: 0 success, 1 verification/check failure, 2 usage or config error,
3 numeric-domain error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import _kernels, classical, quantum
from .core import (
    DomainError,
    KernelKind,
    ModelKind,
    OscillatorParams,
    PhaseState,
    derived_frequency,
    tol_scale,
)
from .verify import run_verification_suite


class ConfigError(ValueError):
    """Bad usage: unknown scenario, unknown key, or malformed value."""


DEFAULT_CONFIG: dict = {
    "model": "new",
    "kernel": "new",
    "gamma": 0.5,
    "omega": 1.0,
    "m0": 1.0,
    "hbar": 1.0,
    "t0": 0.0,
    "x0": 1.0,
    "p0": 0.0,
    "sigma": 1.0,
    "t_end": 5.0,
    "n_times": 101,
    "t1": 1.0,
    "t2": 2.0,
    "tau_min": 0.2,
    "tau_max": 1.5,
    "n_taus": 6,
    "out_dir": "out",
}

SCENARIOS = (
    "classical-trajectory",
    "classical-defect",
    "packet-evolution",
    "kernel-check",
    "quantum-defect",
    "asymptotics",
    "appendix-check",
)

_MODEL_BY_NAME = {m.value: m for m in ModelKind}
_KERNEL_BY_NAME = {k.value: k for k in KernelKind}


@dataclass
class ResultRecord:
    """Self-describing output of one scenario run."""

    scenario: str
    config: dict
    outputs: dict
    checks: list
    series_path: str | None = None
    backend: str = _kernels.BACKEND

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _fmt(value: float) -> str:
    return f"{float(value):.16e}"


def write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def resolve_config(config_path: str | None, overrides: list[str], out_dir: str | None) -> dict:
    cfg = dict(DEFAULT_CONFIG)
    if config_path is not None:
        try:
            loaded = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, value in loaded.items():
            if key not in cfg:
                raise ConfigError(f"unknown config key {key!r}")
            cfg[key] = value
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, _, raw = item.partition("=")
        key = key.strip()
        if key not in cfg:
            raise ConfigError(f"unknown config key {key!r}")
        cfg[key] = _parse_value(raw.strip(), type(DEFAULT_CONFIG[key]))
    if out_dir is not None:
        cfg["out_dir"] = out_dir
    return cfg


def _parse_value(raw: str, expected: type):
    if expected is str:
        return raw
    if expected is int:
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"expected an integer, got {raw!r}") from exc
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"expected a number, got {raw!r}") from exc


def params_from_config(cfg: dict) -> OscillatorParams:
    return OscillatorParams(
        gamma=float(cfg["gamma"]),
        omega=float(cfg["omega"]),
        m0=float(cfg["m0"]),
        hbar=float(cfg["hbar"]),
        t0=float(cfg["t0"]),
    )


def _model_from_config(cfg: dict) -> ModelKind:
    name = str(cfg["model"])
    if name not in _MODEL_BY_NAME:
        raise ConfigError(f"unknown model {name!r}; choose from {sorted(_MODEL_BY_NAME)}")
    return _MODEL_BY_NAME[name]


def _kernel_from_config(cfg: dict) -> KernelKind:
    name = str(cfg["kernel"])
    if name not in _KERNEL_BY_NAME:
        raise ConfigError(f"unknown kernel {name!r}; choose from {sorted(_KERNEL_BY_NAME)}")
    return _KERNEL_BY_NAME[name]


def _check(name: str, passed: bool, value: float, tolerance: float) -> dict:
    return {
        "name": name,
        "passed": bool(passed),
        "value": float(value),
        "tolerance": float(tolerance),
    }


def _times(cfg: dict, p: OscillatorParams) -> np.ndarray:
    n = int(cfg["n_times"])
    if n < 2:
        raise ConfigError("n_times must be >= 2")
    return np.linspace(p.t0, float(cfg["t_end"]), n)


def scenario_classical_trajectory(cfg: dict) -> tuple[dict, list[str], list[dict], list[dict]]:
    p = params_from_config(cfg)
    model = _model_from_config(cfg)
    s0 = PhaseState(float(cfg["x0"]), float(cfg["p0"]))
    rows = []
    worst = 0.0
    for t in _times(cfg, p):
        exact = classical.evolve_state(model, s0, float(t), p)
        oracle = classical.rk4_state(model, s0, float(t), p)
        err = max(abs(exact.x - oracle.x), abs(exact.p - oracle.p))
        worst = max(worst, err)
        rows.append(
            {
                "t": t,
                "x": exact.x,
                "p": exact.p,
                "x_rk4": oracle.x,
                "p_rk4": oracle.p,
                "abs_err": err,
            }
        )
    tol = 1e-6 * tol_scale()
    outputs = {"max_abs_err": worst, "oracle_residual": worst, "tolerance": tol}
    checks = [_check("trajectory_matches_rk4", worst <= tol, worst, tol)]
    return outputs, ["t", "x", "p", "x_rk4", "p_rk4", "abs_err"], rows, checks


def scenario_classical_defect(cfg: dict) -> tuple[dict, list[str], list[dict], list[dict]]:
    p = params_from_config(cfg)
    model = _model_from_config(cfg)
    t0, t1, t2 = float(cfg["t0"]), float(cfg["t1"]), float(cfg["t2"])
    defect = classical.composition_defect(model, t0, t1, t2, p)
    m = defect.matrix
    rows = [
        {
            "t0": t0,
            "t1": t1,
            "t2": t2,
            "defect_xx": m[0, 0],
            "defect_xp": m[0, 1],
            "defect_px": m[1, 0],
            "defect_pp": m[1, 1],
            "norm": defect.norm,
        }
    ]
    tol = 1e-10 * tol_scale()
    if model is ModelKind.CALDIROLA_KANAI:
        checks = [_check("composition_law_holds", defect.norm <= tol, defect.norm, tol)]
    else:
        checks = [_check("composition_law_breaks", defect.norm > 1e-4, defect.norm, 1e-4)]
    outputs = {"defect_norm": defect.norm, "tolerance": tol}
    columns = ["t0", "t1", "t2", "defect_xx", "defect_xp", "defect_px", "defect_pp", "norm"]
    return outputs, columns, rows, checks


def scenario_packet_evolution(cfg: dict) -> tuple[dict, list[str], list[dict], list[dict]]:
    p = params_from_config(cfg)
    variant = _kernel_from_config(cfg)
    if variant is KernelKind.PURE_DAMPING and p.omega != 0.0:
        raise ConfigError("the pure-damping kernel needs omega = 0 (use --set omega=0)")
    psi0 = quantum.GaussianPacket.from_sigma(
        float(cfg["x0"]), float(cfg["p0"]), float(cfg["sigma"]), p.hbar
    )
    model = quantum.variant_model(variant)
    s0 = PhaseState(psi0.center, psi0.momentum)
    rows = []
    worst_norm = 0.0
    worst_center = 0.0
    for t in _times(cfg, p):
        t = float(t)
        if t == p.t0:
            packet = psi0
        else:
            packet = quantum.apply_kernel(quantum.kernel(variant, t, p.t0, p), psi0)
        classical_x = classical.evolve_state(model, s0, t, p).x
        norm = packet.norm_squared()
        err = abs(packet.center - classical_x)
        worst_norm = max(worst_norm, abs(norm - 1.0))
        worst_center = max(worst_center, err)
        rows.append(
            {
                "t": t,
                "center": packet.center,
                "momentum": packet.momentum,
                "dispersion": packet.dispersion,
                "norm": norm,
                "center_classical": classical_x,
                "center_abs_err": err,
            }
        )
    norm_tol = 1e-10 * tol_scale()
    center_tol = 1e-8 * tol_scale()
    outputs = {"max_norm_drift": worst_norm, "max_center_err": worst_center}
    checks = [
        _check("norm_preserved", worst_norm <= norm_tol, worst_norm, norm_tol),
        _check("center_matches_classical", worst_center <= center_tol, worst_center, center_tol),
    ]
    columns = ["t", "center", "momentum", "dispersion", "norm", "center_classical", "center_abs_err"]
    return outputs, columns, rows, checks


def _tau_grid(cfg: dict, p: OscillatorParams, variant: KernelKind) -> np.ndarray:
    n = int(cfg["n_taus"])
    if n < 1:
        raise ConfigError("n_taus must be >= 1")
    tau_max = float(cfg["tau_max"])
    if variant is not KernelKind.PURE_DAMPING:
        tau_max = min(tau_max, 0.95 * math.pi / derived_frequency(p))
    return np.linspace(float(cfg["tau_min"]), tau_max, n)


def scenario_kernel_check(cfg: dict) -> tuple[dict, list[str], list[dict], list[dict]]:
    p = params_from_config(cfg)
    variant = _kernel_from_config(cfg)
    if variant is KernelKind.PURE_DAMPING and p.omega != 0.0:
        raise ConfigError("the pure-damping kernel needs omega = 0 (use --set omega=0)")
    taus = _tau_grid(cfg, p, variant)
    rows = []
    worst = 0.0
    for tau in taus:
        res = quantum.verify_schrodinger(variant, p, taus=[float(tau)])
        worst = max(worst, res)
        rows.append({"tau": tau, "residual": res})
    tol = 1e-5 * tol_scale()
    outputs = {"max_residual": worst, "tolerance": tol}
    checks = [_check("schrodinger_residual", worst <= tol, worst, tol)]
    return outputs, ["tau", "residual"], rows, checks


def scenario_quantum_defect(cfg: dict) -> tuple[dict, list[str], list[dict], list[dict]]:
    p = params_from_config(cfg)
    variant = _kernel_from_config(cfg)
    t0, t1, t2 = float(cfg["t0"]), float(cfg["t1"]), float(cfg["t2"])
    psi0 = quantum.GaussianPacket.from_sigma(
        float(cfg["x0"]), float(cfg["p0"]), float(cfg["sigma"]), p.hbar
    )
    defect = quantum.quantum_composition_defect(variant, t0, t1, t2, p, psi0)
    rows = [
        {
            "t0": t0,
            "t1": t1,
            "t2": t2,
            "coefficient_distance": defect.coefficient_distance,
            "norm_modulus_error": defect.norm_modulus_error,
            "norm_phase_error": defect.norm_phase_error,
            "density_l2": defect.density_l2,
        }
    ]
    tol = 1e-9 * tol_scale()
    if variant is KernelKind.CK:
        worst = max(
            defect.coefficient_distance, defect.norm_modulus_error, defect.norm_phase_error
        )
        checks = [
            _check("composition_law_holds", worst <= tol, worst, tol),
            _check("density_route_agrees", defect.density_l2 <= tol, defect.density_l2, tol),
        ]
    else:
        checks = [
            _check(
                "composition_law_breaks",
                defect.density_l2 > 1e-3,
                defect.density_l2,
                1e-3,
            )
        ]
    outputs = {
        "coefficient_distance": defect.coefficient_distance,
        "norm_modulus_error": defect.norm_modulus_error,
        "norm_phase_error": defect.norm_phase_error,
        "density_l2": defect.density_l2,
    }
    columns = [
        "t0",
        "t1",
        "t2",
        "coefficient_distance",
        "norm_modulus_error",
        "norm_phase_error",
        "density_l2",
    ]
    return outputs, columns, rows, checks


def scenario_asymptotics(cfg: dict) -> tuple[dict, list[str], list[dict], list[dict]]:
    p = params_from_config(cfg)
    if p.omega != 0.0:
        raise ConfigError("asymptotics is a pure-damping scenario (use --set omega=0)")
    if p.gamma <= 0:
        raise ConfigError("asymptotics needs gamma > 0")
    s0 = PhaseState(float(cfg["x0"]), float(cfg["p0"]))
    new_state = classical.asymptotic_state(ModelKind.NONLOCAL_NEW, s0, p)
    ck_state = classical.asymptotic_state(ModelKind.CALDIROLA_KANAI, s0, p)
    sigma = float(cfg["sigma"])
    rows = []
    worst_ratio = 0.0
    for t in _times(cfg, p):
        t = float(t)
        tau = t - p.t0
        entries = {}
        for model, label in ((ModelKind.NONLOCAL_NEW, "new"), (ModelKind.CALDIROLA_KANAI, "ck")):
            mat = classical.pure_damping_matrix(model, t, p)
            lim = classical.asymptotic_matrix(model, p)
            entries[f"xp_{label}"] = mat.xp
            entries[f"err_{label}"] = abs(mat.xp - lim.xp)
        bound = 2.5 * math.exp(-2.0 * p.gamma * tau) / (p.m0 * p.gamma)
        if tau > 0:
            worst_ratio = max(
                worst_ratio, max(entries["err_new"], entries["err_ck"]) / bound
            )
        rows.append({"t": t, **entries})
    outputs = {
        "x_asympt_new": new_state.x,
        "x_asympt_ck": ck_state.x,
        "p_asympt": new_state.p,
        "sigma_asympt_new": quantum.asymptotic_dispersion(sigma, ModelKind.NONLOCAL_NEW, p),
        "sigma_asympt_ck": quantum.asymptotic_dispersion(sigma, ModelKind.CALDIROLA_KANAI, p),
    }
    checks = [_check("decay_envelope", worst_ratio <= 1.0, worst_ratio, 1.0)]
    columns = ["t", "xp_new", "err_new", "xp_ck", "err_ck"]
    return outputs, columns, rows, checks


def scenario_appendix_check(cfg: dict) -> tuple[dict, list[str], list[dict], list[dict]]:
    p = params_from_config(cfg)
    taus = _tau_grid(cfg, p, KernelKind.KOCHAN)
    rows = []
    for tau in taus:
        coeffs = quantum.appendix_coeffs(p.t0 + float(tau), p)
        rows.append(
            {"tau": tau, "mu": coeffs.mu, "nu": coeffs.nu, "lambda": coeffs.lambda_coef}
        )
    residual = quantum.verify_schrodinger(KernelKind.KOCHAN, p, taus=taus)
    control = quantum.verify_schrodinger(
        KernelKind.KOCHAN, p, taus=taus, hamiltonian="mass", max_refinements=4
    )
    tol = 1e-5 * tol_scale()
    outputs = {
        "xp_hamiltonian_residual": residual,
        "mass_hamiltonian_residual": control,
        "tolerance": tol,
    }
    checks = [
        _check("bare_kernel_solves_xp_hamiltonian", residual <= tol, residual, tol),
        _check("bare_kernel_rejects_mass_hamiltonian", control > 1e-2, control, 1e-2),
    ]
    return outputs, ["tau", "mu", "nu", "lambda"], rows, checks


_SCENARIO_FUNCS = {
    "classical-trajectory": scenario_classical_trajectory,
    "classical-defect": scenario_classical_defect,
    "packet-evolution": scenario_packet_evolution,
    "kernel-check": scenario_kernel_check,
    "quantum-defect": scenario_quantum_defect,
    "asymptotics": scenario_asymptotics,
    "appendix-check": scenario_appendix_check,
}


def run_scenario(scenario: str, cfg: dict) -> ResultRecord:
    """Execute one named scenario and write its JSON summary and CSV series."""
    if scenario not in _SCENARIO_FUNCS:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")
    outputs, columns, rows, checks = _SCENARIO_FUNCS[scenario](cfg)
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    series_path = out_dir / f"{scenario}.series.csv"
    write_csv(series_path, columns, rows)
    record = ResultRecord(
        scenario=scenario,
        config=dict(cfg),
        outputs=outputs,
        checks=checks,
        series_path=str(series_path),
    )
    write_json(out_dir / f"{scenario}.summary.json", record.to_dict())
    return record


def parse_sweep_values(spec: str) -> list[float]:
    """Parse sweep values given as 'start:stop:step' or a comma list."""
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range syntax is start:stop:step, got {spec!r}")
        try:
            start, stop, step = (float(v) for v in parts)
        except ValueError as exc:
            raise ConfigError(f"malformed range {spec!r}") from exc
        if step <= 0:
            raise ConfigError("sweep step must be > 0")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        if count < 1:
            raise ConfigError(f"empty sweep range {spec!r}")
        return [start + i * step for i in range(count)]
    try:
        return [float(v) for v in spec.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"malformed value list {spec!r}") from exc


def run_sweep(scenario: str, cfg: dict, axis: str, values: list[float]) -> dict:
    """Run one scenario per axis value; failures are isolated per value."""
    if axis not in DEFAULT_CONFIG or not isinstance(DEFAULT_CONFIG[axis], (int, float)):
        raise ConfigError(f"sweep axis must name a numeric config field, got {axis!r}")
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    records = []
    rows = []
    columns: list[str] | None = None
    for value in values:
        point_cfg = dict(cfg)
        point_cfg[axis] = value
        point_cfg["out_dir"] = str(out_dir / f"{axis}={value:.6g}")
        try:
            outputs, cols, point_rows, checks = _SCENARIO_FUNCS[scenario](point_cfg)
        except (DomainError, ConfigError) as exc:
            records.append(
                {
                    "axis_value": value,
                    "error": f"{type(exc).__name__}: {exc}",
                    "passed": False,
                }
            )
            continue
        if columns is None:
            columns = [axis] + cols
        for row in point_rows:
            rows.append({axis: value, **row})
        records.append(
            {
                "axis_value": value,
                "outputs": outputs,
                "checks": checks,
                "passed": all(c["passed"] for c in checks),
            }
        )
    summary = {
        "scenario": scenario,
        "axis": axis,
        "values": list(values),
        "config": dict(cfg),
        "records": records,
        "passed": all(r["passed"] for r in records),
        "backend": _kernels.BACKEND,
    }
    if columns is not None:
        write_csv(out_dir / f"sweep-{scenario}.series.csv", columns, rows)
        summary["series_path"] = str(out_dir / f"sweep-{scenario}.series.csv")
    write_json(out_dir / f"sweep-{scenario}.summary.json", summary)
    return summary


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memosc",
        description="Memory-damped oscillator scenarios, sweeps, and verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SCENARIOS:
        sp = sub.add_parser(name, help=f"run the {name} scenario")
        _add_common(sp)
    sp = sub.add_parser("verify", help="run the full invariant suite")
    sp.add_argument("--out", default=None, help="directory for the JSON report")
    sp = sub.add_parser("sweep", help="run a scenario across one numeric axis")
    sp.add_argument("scenario", choices=SCENARIOS)
    sp.add_argument("--axis", required=True, help="numeric config field to vary")
    sp.add_argument("--values", required=True, help="start:stop:step or comma list")
    _add_common(sp)
    return parser


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", default=None, help="path to a JSON config")
    sp.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one config field (repeatable)",
    )
    sp.add_argument("--out", default=None, help="output directory (overrides out_dir)")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            report = run_verification_suite()
            for check in report["checks"]:
                status = "PASS" if check["passed"] else "FAIL"
                print(
                    f"{status} {check['name']}: measured={check['measured']:.6e} "
                    f"{check['comparison']} {check['tolerance']:.6e}"
                )
            if args.out is not None:
                out_dir = Path(args.out)
                out_dir.mkdir(parents=True, exist_ok=True)
                write_json(out_dir / "verify.summary.json", report)
            print("all passed:", report["all_passed"])
            return 0 if report["all_passed"] else 1
        cfg = resolve_config(args.config, args.overrides, args.out)
        if args.command == "sweep":
            values = parse_sweep_values(args.values)
            summary = run_sweep(args.scenario, cfg, args.axis, values)
            for rec in summary["records"]:
                status = "PASS" if rec["passed"] else "FAIL"
                print(f"{status} {summary['axis']}={rec['axis_value']:.6g}")
            return 0 if summary["passed"] else 1
        record = run_scenario(args.command, cfg)
        for check in record.checks:
            status = "PASS" if check["passed"] else "FAIL"
            print(
                f"{status} {check['name']}: value={check['value']:.6e} tol={check['tolerance']:.6e}"
            )
        return 0 if record.passed else 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
