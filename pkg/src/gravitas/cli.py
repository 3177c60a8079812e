"""Command-line entry point: deterministic runs, CSV/JSON outputs, manifests.

Every subcommand resolves its configuration as CLI flags over config-file
values over built-in defaults, echoes the resolved configuration in a
manifest next to the data file, and exits 0 on success, 1 when an internal
tolerance check fails, 2 on configuration errors. Stochastic subcommands
require a seed (flag, config file, or GRAVITAS_SEED).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .entanglement import (FIG1_DEFAULTS, GaussianState, duan_witness,
                           evolve_gaussian, fig1_default_initial,
                           fig1_default_params, log_negativity,
                           quadratize_newton)
from .errors import GravitasError
from .estimators import BendingConfig, estimate_record
from .kinematics import (FourVector, check_invariant_measure_identity, stream,
                         two_body_batch)
from .params import ModelParams
from .semiclassical import FeedbackConfig, compare_channels, run_ensemble
from .unitarity import (TreePoleFamily, optical_tree_check,
                        unitarity_violation_scan)

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)  # RFC-4180 quoting
        w.writerow(header)
        w.writerows(rows)


def _json_default(obj):
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True,
                               default=_json_default) + "\n",
                    encoding="utf-8")


def _manifest(path: Path, command: str, config: dict, outputs: list[Path],
              checks: dict[str, bool], wall_time: float,
              provenance: dict | None = None) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "toolkit_version": __version__,
        "command": command,
        "resolved_config": config,
        "wall_time_s": wall_time,
        "outputs": [p.name for p in outputs],
        "checks": checks,
        "provenance": provenance or {},
    }
    _write_json(path, doc)


def _resolve(args: argparse.Namespace, file_cfg: dict, defaults: dict) -> dict:
    """flag > config file > default, flag considered set when not None."""
    out = dict(defaults)
    for key in defaults:
        if key in file_cfg:
            out[key] = file_cfg[key]
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
    return out


def _load_config_file(args: argparse.Namespace) -> dict:
    if getattr(args, "config", None) is None:
        return {}
    p = Path(args.config)
    if not p.exists():
        raise ConfigError(f"config file {p} not found")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {p} is not valid JSON: {exc}") from exc
    section = getattr(args, "command", None)
    if isinstance(doc, dict) and section in doc and isinstance(doc[section], dict):
        return doc[section]
    return doc if isinstance(doc, dict) else {}


class ConfigError(GravitasError):
    pass


def _need_seed(cfg: dict) -> int:
    seed = cfg.get("seed")
    if seed is None:
        env = os.environ.get("GRAVITAS_SEED")
        if env is not None:
            try:
                seed = int(env)
            except ValueError as exc:
                raise ConfigError(f"GRAVITAS_SEED={env!r} is not an integer") from exc
    if seed is None:
        raise ConfigError("a seed is required (flag --seed, config file, or GRAVITAS_SEED)")
    return int(seed)


def _model_params(cfg: dict) -> ModelParams:
    return ModelParams(g_newton=cfg["g_newton"], m=cfg["m"], mu=cfg["mu"],
                       lambda_probe=cfg.get("lambda_probe", 1.0),
                       alpha_tilde=cfg.get("alpha_tilde", 1.0))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_optical_tree(args: argparse.Namespace) -> int:
    defaults = dict(g_newton=1.0, m=1.0, mu=0.05, lambda_probe=1.0,
                    alpha_tilde=1.0, eps_ladder=[1e-2, 1e-3, 1e-4],
                    tolerance=0.01, out="optical_tree.json", seed=None)
    cfg = _resolve(args, _load_config_file(args), defaults)
    t0 = time.perf_counter()
    params = _model_params(cfg)
    family = TreePoleFamily(params)
    report = optical_tree_check(family, None, params,
                                eps_ladder=cfg["eps_ladder"])
    ok = abs(report.ratio_restored - 1.0) <= cfg["tolerance"]
    out = Path(cfg["out"])
    doc = {
        "schema_version": SCHEMA_VERSION,
        "lhs": report.lhs,
        "extrapolated_lhs": report.extrapolated_lhs,
        "rhs_with_gravitons": report.rhs_with_gravitons,
        "rhs_elastic": report.rhs_elastic,
        "mc_error_rhs": report.mc_error_rhs,
        "eps_ladder": [list(pair) for pair in report.eps_ladder],
        "ratio_restored": report.ratio_restored,
        "ratio_elastic_only": "undefined (no final state at this order)",
        "lhs_provenance": report.lhs_provenance,
        "rhs_provenance": report.rhs_provenance,
    }
    _write_json(out, doc)
    _manifest(out.with_suffix(out.suffix + ".manifest.json"), "optical-tree",
              cfg, [out], {"ratio_restored_within_tolerance": ok},
              time.perf_counter() - t0,
              {"lhs": report.lhs_provenance, "rhs": report.rhs_provenance})
    if not ok:
        print(f"optical-tree: ratio_restored = {report.ratio_restored} "
              f"outside 1 +/- {cfg['tolerance']} "
              "(tolerance unachievable at these settings?)", file=sys.stderr)
        return EXIT_CHECK_FAILED
    print(f"optical-tree: ratio_restored = {report.ratio_restored:.6f}, "
          f"elastic-only ratio undefined/divergent as expected -> {out}")
    return EXIT_OK


def cmd_box_cut(args: argparse.Namespace) -> int:
    defaults = dict(g_newton=1.0, m=1.0, mu=1e-3, lambda_probe=1.0,
                    alpha_tilde=1.0, s_grid=[4.1, 5.575, 7.05, 8.525, 10.0],
                    n_samples=10**6, tolerance=0.0, threads=1,
                    out="box_cut.csv", seed=None)
    cfg = _resolve(args, _load_config_file(args), defaults)
    seed = _need_seed(cfg)
    t0 = time.perf_counter()
    params = _model_params(cfg)
    rows = unitarity_violation_scan(params, cfg["s_grid"], int(cfg["n_samples"]),
                                    seed, n_threads=int(cfg["threads"]))
    out = Path(cfg["out"])
    header = ["s", "im_box", "mc_err", "rhs_annih", "mc_err_annih",
              "rhs_elastic", "ratio_restored", "ratio_elastic", "flag"]
    table = []
    ok = True
    warned = False
    for r in rows:
        if r.flag == "below-threshold":
            warned = True
        elif r.ratio_restored is not None:
            slack = max(2.0 * (r.ratio_restored_err or 0.0), cfg["tolerance"])
            ok = ok and abs(r.ratio_restored - 1.0) <= slack
        table.append([r.s, r.lhs, r.lhs_err, r.rhs_restored, r.rhs_err,
                      r.rhs_elastic, r.ratio_restored, r.ratio_elastic, r.flag])
    _write_csv(out, header, table)
    _manifest(out.with_suffix(out.suffix + ".manifest.json"), "box-cut", cfg,
              [out], {"restored_ratios_within_2sigma": ok},
              time.perf_counter() - t0)
    if warned:
        print("box-cut: some grid points below threshold were flagged",
              file=sys.stderr)
    if not ok:
        print("box-cut: a restored ratio fell outside 2 sigma of 1", file=sys.stderr)
        return EXIT_CHECK_FAILED
    print(f"box-cut: {len(rows)} grid points -> {out}")
    return EXIT_OK


def cmd_entangle(args: argparse.Namespace) -> int:
    defaults = dict(g_newton=10.0, m=1.0, mu=1e-6, d=FIG1_DEFAULTS["d"],
                    mass_1=1.0, mass_2=1.0, var_x=FIG1_DEFAULTS["var_x"],
                    delta_t=30.0, n_grid=300, axis="transverse",
                    out="entangle.csv", seed=None)
    cfg = _resolve(args, _load_config_file(args), defaults)
    t0 = time.perf_counter()
    params = _model_params(cfg)
    vx = cfg["var_x"]
    initial = GaussianState(
        np.zeros(4),
        np.diag([vx, 1.0 / (4.0 * vx), vx, 1.0 / (4.0 * vx)]))
    h = quadratize_newton(cfg["d"], params, (cfg["mass_1"], cfg["mass_2"]),
                          axis=cfg["axis"])
    xm = np.array([1.0, 0.0, -1.0, 0.0])
    pp = np.array([0.0, 1.0, 0.0, 1.0])
    rows = []
    duan_min = math.inf
    for t in np.linspace(0.0, cfg["delta_t"], int(cfg["n_grid"]) + 1):
        st = evolve_gaussian(initial, h, float(t))
        dv = duan_witness(st)
        duan_min = min(duan_min, dv)
        rows.append([float(t), dv, log_negativity(st),
                     float(xm @ st.cov @ xm), float(pp @ st.cov @ pp)])
    out = Path(cfg["out"])
    _write_csv(out, ["t", "duan", "E_N", "var_xminus", "var_pplus"], rows)
    checks = {"final_state_valid": evolve_gaussian(initial, h, cfg["delta_t"]).is_valid()}
    _manifest(out.with_suffix(out.suffix + ".manifest.json"), "entangle", cfg,
              [out], checks, time.perf_counter() - t0)
    print(f"entangle: min duan = {duan_min:.6f} over [0, {cfg['delta_t']}] -> {out}")
    return EXIT_OK if checks["final_state_valid"] else EXIT_CHECK_FAILED


def cmd_semiclassical(args: argparse.Namespace) -> int:
    defaults = dict(g_newton=10.0, m=1.0, mu=1e-6, d=FIG1_DEFAULTS["d"],
                    mass_1=1.0, mass_2=1.0, var_x=FIG1_DEFAULTS["var_x"],
                    gamma=1.0, axis="separation", horizon=20.0, n_steps=2000,
                    n_traj=500, out="semiclassical.csv", seed=None)
    cfg = _resolve(args, _load_config_file(args), defaults)
    seed = _need_seed(cfg)
    t0 = time.perf_counter()
    params = _model_params(cfg)
    vx = cfg["var_x"]
    initial = GaussianState(
        np.zeros(4),
        np.diag([vx, 1.0 / (4.0 * vx), vx, 1.0 / (4.0 * vx)]))
    fb = FeedbackConfig(cfg["gamma"], cfg["d"], (cfg["mass_1"], cfg["mass_2"]),
                        params, axis=cfg["axis"], meas_length=math.sqrt(vx))
    n_traj = int(cfg["n_traj"])
    if n_traj % 2:
        n_traj += 1
    res = run_ensemble(fb, initial, n_traj, int(cfg["n_steps"]),
                       cfg["horizon"] / int(cfg["n_steps"]), seed)
    rows = [[float(t), float(en), float(dv), float(vp), res.n_traj]
            for t, en, dv, vp in zip(res.times, res.log_neg, res.duan,
                                     res.var_p_mean)]
    out = Path(cfg["out"])
    _write_csv(out, ["t", "E_N_unconditional", "duan", "var_p_mean", "n_traj"], rows)
    checks = {
        "no_entanglement": bool(np.all(res.log_neg < 1e-10)),
        "duan_never_below_1": bool(np.all(res.duan >= 1.0 - 1e-9)),
    }
    _manifest(out.with_suffix(out.suffix + ".manifest.json"), "semiclassical",
              cfg, [out], checks, time.perf_counter() - t0)
    print(f"semiclassical: max E_N = {float(np.max(res.log_neg)):.2e}, "
          f"min duan = {float(np.min(res.duan)):.6f} -> {out}")
    return EXIT_OK if all(checks.values()) else EXIT_CHECK_FAILED


def cmd_compare(args: argparse.Namespace) -> int:
    defaults = dict(g_newton=10.0, m=1.0, mu=1e-6, d=FIG1_DEFAULTS["d"],
                    mass_1=1.0, mass_2=1.0, var_x=FIG1_DEFAULTS["var_x"],
                    gamma=1.0, horizon=20.0, n_steps=2000, n_traj=500,
                    out="compare.csv", seed=None)
    cfg = _resolve(args, _load_config_file(args), defaults)
    seed = _need_seed(cfg)
    t0 = time.perf_counter()
    params = _model_params(cfg)
    vx = cfg["var_x"]
    initial = GaussianState(
        np.zeros(4),
        np.diag([vx, 1.0 / (4.0 * vx), vx, 1.0 / (4.0 * vx)]))
    fb = FeedbackConfig(cfg["gamma"], cfg["d"], (cfg["mass_1"], cfg["mass_2"]),
                        params, meas_length=math.sqrt(vx))
    n_traj = int(cfg["n_traj"])
    if n_traj % 2:
        n_traj += 1
    comp = compare_channels(fb, initial, cfg["horizon"], int(cfg["n_steps"]),
                            n_traj, seed)
    rows = [[float(t), float(du), float(eu), float(ds), float(es),
             float(su), float(ss)]
            for t, du, eu, ds, es, su, ss in zip(
                comp.times, comp.duan_unitary, comp.log_neg_unitary,
                comp.duan_semiclassical, comp.log_neg_semiclassical,
                comp.mean_sep_unitary, comp.mean_sep_semiclassical)]
    out = Path(cfg["out"])
    _write_csv(out, ["t", "duan_unitary", "E_N_unitary", "duan_semiclassical",
                     "E_N_semiclassical", "mean_sep_unitary",
                     "mean_sep_semiclassical"], rows)
    checks = {
        "unitary_entangles": bool(np.max(comp.log_neg_unitary) > 0.0
                                  and np.min(comp.duan_unitary) < 1.0),
        "semiclassical_does_not": bool(np.all(comp.log_neg_semiclassical < 1e-10)
                                       and np.all(comp.duan_semiclassical >= 1.0 - 1e-9)),
    }
    _manifest(out.with_suffix(out.suffix + ".manifest.json"), "compare", cfg,
              [out], checks, time.perf_counter() - t0)
    print("compare: unitary entangles={unitary_entangles}, "
          "semiclassical does not={semiclassical_does_not} -> {out}".format(
              out=out, **checks))
    return EXIT_OK if all(checks.values()) else EXIT_CHECK_FAILED


def cmd_deflection(args: argparse.Namespace) -> int:
    defaults = dict(mass_g=1.0, impact_um=100.0, separation_um=10.0,
                    wavelength_nm=1000.0, cavity_m=0.1, target_time_s=1.0,
                    t_integration_s=None, out="deflection.json")
    cfg = _resolve(args, _load_config_file(args), defaults)
    t0 = time.perf_counter()
    bc = BendingConfig(
        mass_kg=cfg["mass_g"] * 1e-3,
        impact_parameter_m=cfg["impact_um"] * 1e-6,
        superposition_separation_m=cfg["separation_um"] * 1e-6,
        wavelength_m=cfg["wavelength_nm"] * 1e-9,
        cavity_length_m=cfg["cavity_m"],
        t_integration_s=cfg["t_integration_s"],
    )
    record = estimate_record(bc, target_time=cfg["target_time_s"])
    record["schema_version"] = SCHEMA_VERSION
    out = Path(cfg["out"])
    _write_json(out, record)
    _manifest(out.with_suffix(out.suffix + ".manifest.json"), "deflection",
              cfg, [out], {"computed": True}, time.perf_counter() - t0)
    print(f"deflection: dtheta = {record['deflection_diff_rad']:.3e} rad -> {out}")
    return EXIT_OK


def cmd_phase_space_check(args: argparse.Namespace) -> int:
    defaults = dict(mu=1.0, n_samples=200000, kmax=6.0, out="phase_space.json",
                    seed=None, sigma_tolerance=3.0)
    cfg = _resolve(args, _load_config_file(args), defaults)
    seed = _need_seed(cfg)
    t0 = time.perf_counter()
    mu = cfg["mu"]

    def gaussian(k4: np.ndarray) -> np.ndarray:
        k2 = np.sum(k4[:, 1:] ** 2, axis=1)
        return np.exp(-k2 / (2.0 * mu * mu))

    def shell(k4: np.ndarray) -> np.ndarray:
        return (np.sum(k4[:, 1:] ** 2, axis=1) < (2.0 * mu) ** 2).astype(float)

    def soft(k4: np.ndarray) -> np.ndarray:
        return 1.0 / (1.0 + np.sum(k4[:, 1:] ** 2, axis=1) / mu**2) ** 3

    results = {}
    ok = True
    for idx, (name, fn) in enumerate((("gaussian", gaussian),
                                      ("shell-indicator", shell),
                                      ("rational", soft))):
        rep = check_invariant_measure_identity(
            fn, mu, stream(seed, idx), int(cfg["n_samples"]),
            kmax=cfg["kmax"] * mu)
        results[name] = {
            "lhs": rep.lhs, "lhs_error": rep.lhs_error,
            "rhs": rep.rhs, "rhs_error": rep.rhs_error,
            "discrepancy_sigmas": rep.discrepancy_sigmas,
            "rhs_per_width": [list(t) for t in rep.rhs_per_width],
        }
        ok = ok and rep.discrepancy_sigmas <= cfg["sigma_tolerance"]
    out = Path(cfg["out"])
    _write_json(out, {"schema_version": SCHEMA_VERSION, "mu": mu,
                      "results": results})
    _manifest(out.with_suffix(out.suffix + ".manifest.json"),
              "phase-space-check", cfg, [out],
              {"within_sigma_tolerance": ok}, time.perf_counter() - t0)
    if not ok:
        print("phase-space-check: a test function disagreed beyond tolerance",
              file=sys.stderr)
        return EXIT_CHECK_FAILED
    print(f"phase-space-check: all test functions within "
          f"{cfg['sigma_tolerance']} sigma -> {out}")
    return EXIT_OK


def cmd_self_test(args: argparse.Namespace) -> int:
    """Determinism check: identical seeds must give bit-identical outputs."""
    defaults = dict(n_samples=20000, out="self_test.json", seed=None, threads=1)
    cfg = _resolve(args, _load_config_file(args), defaults)
    seed = _need_seed(cfg)
    t0 = time.perf_counter()
    params = ModelParams(mu=1e-3)

    def digest(threads: int) -> str:
        rows = unitarity_violation_scan(params, [4.1, 6.0], int(cfg["n_samples"]),
                                        seed, n_threads=threads)
        fb = FeedbackConfig(1.0, 10.0, (1.0, 1.0), fig1_default_params(),
                            meas_length=3.0)
        ens = run_ensemble(fb, fig1_default_initial(), 16, 50, 0.01, seed)
        blob = json.dumps([[r.s, r.lhs, r.rhs_restored] for r in rows]).encode()
        blob += ens.mean_means.tobytes() + ens.cov_unconditional.tobytes()
        return hashlib.sha256(blob).hexdigest()

    base = digest(1)
    rerun = digest(1)
    threaded = digest(int(cfg["threads"]))
    ok = base == rerun == threaded
    out = Path(cfg["out"])
    _write_json(out, {"schema_version": SCHEMA_VERSION, "digest": base,
                      "rerun_identical": base == rerun,
                      "thread_count_invariant": base == threaded})
    _manifest(out.with_suffix(out.suffix + ".manifest.json"), "self-test", cfg,
              [out], {"deterministic": ok}, time.perf_counter() - t0)
    print(f"self-test: deterministic={ok} -> {out}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--g-newton", dest="g_newton", type=float,
                   help="gravitational coupling G_N (natural units, mass^-2)")
    p.add_argument("--m", dest="m", type=float, help="probe mass m (mass units)")
    p.add_argument("--mu", dest="mu", type=float,
                   help="mediator regulator mass mu (mass units)")
    p.add_argument("--lambda", dest="lambda_probe", type=float,
                   help="photon-matter coupling lambda (mass units)")
    p.add_argument("--alpha-tilde", dest="alpha_tilde", type=float,
                   help="particle-antiparticle box coupling alpha~ (dimensionless)")


def _add_common(p: argparse.ArgumentParser, stochastic: bool) -> None:
    p.add_argument("--config", help="JSON config file (values under the "
                   "subcommand key or at top level)")
    p.add_argument("--out", help="output data file path")
    if stochastic:
        p.add_argument("--seed", type=int,
                       help="64-bit master seed (fallback: GRAVITAS_SEED)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gravitas",
        description="Numerical unitarity and entanglement checks for "
                    "Lorentz-invariant Newtonian scattering models")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optical-tree",
                       help="tree-level optical theorem at the mediator pole")
    _add_model_flags(p)
    _add_common(p, stochastic=False)
    p.add_argument("--eps-ladder", dest="eps_ladder", type=float, nargs="+",
                   help="relative epsilon ladder, units of max(m^2, mu^2)")
    p.add_argument("--tolerance", type=float,
                   help="pass/fail tolerance on |ratio_restored - 1|")
    p.set_defaults(func=cmd_optical_tree)

    p = sub.add_parser("box-cut",
                       help="Cutkosky cut of the crossed box vs annihilation sum")
    _add_model_flags(p)
    _add_common(p, stochastic=True)
    p.add_argument("--s-grid", dest="s_grid", type=float, nargs="+",
                   help="s values in units of m^2")
    p.add_argument("--n-samples", dest="n_samples", type=int,
                   help="Monte Carlo samples per estimator")
    p.add_argument("--threads", type=int, help="worker threads (scheduling only)")
    p.add_argument("--tolerance", type=float,
                   help="extra absolute slack on |ratio-1| beyond 2 sigma")
    p.set_defaults(func=cmd_box_cut)

    p = sub.add_parser("entangle", help="unitary Fig.-1 circuit time series")
    _add_model_flags(p)
    _add_common(p, stochastic=False)
    p.add_argument("--d", type=float, help="mean separation (length units)")
    p.add_argument("--delta-t", dest="delta_t", type=float,
                   help="interaction time horizon")
    p.add_argument("--n-grid", dest="n_grid", type=int, help="time grid points")
    p.add_argument("--var-x", dest="var_x", type=float,
                   help="initial per-mass position variance")
    p.add_argument("--axis", choices=["separation", "transverse"],
                   help="displacement axis of the quadratized coupling")
    p.set_defaults(func=cmd_entangle)

    p = sub.add_parser("semiclassical",
                       help="measurement-feedback ensemble time series")
    _add_model_flags(p)
    _add_common(p, stochastic=True)
    p.add_argument("--d", type=float, help="mean separation (length units)")
    p.add_argument("--gamma", type=float, help="measurement rate (1/time)")
    p.add_argument("--horizon", type=float, help="total evolution time")
    p.add_argument("--n-steps", dest="n_steps", type=int, help="time steps")
    p.add_argument("--n-traj", dest="n_traj", type=int, help="trajectories")
    p.add_argument("--var-x", dest="var_x", type=float,
                   help="initial per-mass position variance")
    p.add_argument("--axis", choices=["separation", "transverse"],
                   help="displacement axis of the feedback linearization")
    p.set_defaults(func=cmd_semiclassical)

    p = sub.add_parser("compare",
                       help="unitary vs semiclassical channel comparison")
    _add_model_flags(p)
    _add_common(p, stochastic=True)
    p.add_argument("--d", type=float, help="mean separation (length units)")
    p.add_argument("--gamma", type=float, help="measurement rate (1/time)")
    p.add_argument("--horizon", type=float, help="total evolution time")
    p.add_argument("--n-steps", dest="n_steps", type=int, help="time steps")
    p.add_argument("--n-traj", dest="n_traj", type=int, help="trajectories")
    p.add_argument("--var-x", dest="var_x", type=float,
                   help="initial per-mass position variance")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("deflection", help="SI light-bending design estimates")
    _add_common(p, stochastic=False)
    p.add_argument("--mass-g", dest="mass_g", type=float, help="source mass (grams)")
    p.add_argument("--impact-um", dest="impact_um", type=float,
                   help="impact parameter (micrometers)")
    p.add_argument("--separation-um", dest="separation_um", type=float,
                   help="superposition separation (micrometers)")
    p.add_argument("--wavelength-nm", dest="wavelength_nm", type=float,
                   help="laser wavelength (nanometers)")
    p.add_argument("--cavity-m", dest="cavity_m", type=float,
                   help="cavity length (meters)")
    p.add_argument("--target-time-s", dest="target_time_s", type=float,
                   help="target integration time (seconds)")
    p.add_argument("--t-integration-s", dest="t_integration_s", type=float,
                   help="override the derived single-photon integration time (seconds)")
    p.set_defaults(func=cmd_deflection)

    p = sub.add_parser("phase-space-check",
                       help="Lorentz-invariant measure identity check")
    _add_common(p, stochastic=True)
    p.add_argument("--mu", type=float, help="on-shell mass (mass units)")
    p.add_argument("--n-samples", dest="n_samples", type=int,
                   help="Monte Carlo samples per side")
    p.add_argument("--kmax", type=float, help="sampling radius, units of mu")
    p.add_argument("--sigma-tolerance", dest="sigma_tolerance", type=float,
                   help="allowed discrepancy in combined sigmas")
    p.set_defaults(func=cmd_phase_space_check)

    p = sub.add_parser("self-test",
                       help="bit-identical rerun and thread-invariance check")
    _add_common(p, stochastic=True)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_self_test)

    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors already; normalize help exits to 0
        raise
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GravitasError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
