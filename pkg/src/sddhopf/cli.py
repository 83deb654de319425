"""Command-line front end: config ingestion, analysis commands, CSV/JSON out.

Usage: sdd-hopf COMMAND --config PATH [--set key=value ...] [--out DIR]

Commands: stationary, eigs, crossing, hopf, simulate, orbit, branch, bounds.
Each command writes a CSV artifact and a JSON summary to the output
directory and echoes the CSV to stdout; diagnostics go to stderr.  Exit
status: 0 success, 1 numerical failure, 2 usage or config error.  The JSON
summary embeds the effective config, so it can be re-fed as --config to
reproduce the same outputs.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .errors import ParseError, SchemaError, SddHopfError
from .hopf import find_critical, lipschitz_constants, transversality_report
from .integrator import IntegratorConfig, integrate
from .model import GoodwinParameters, goodwin_model
from .orbit import (OrbitConfig, box_bounds_check, branch_scan, detect_orbit,
                    fourier_residual, period_bounds, sign_det_sum)
from .spectrum import ContourRectangle, crossing_number, goodwin_eigenvalues
from .stationary import goodwin_stationary

PARAM_KEYS = ("mu_m", "mu_p", "mu_e", "alpha_m", "alpha_p", "alpha_e",
              "c", "z_tilde", "h", "eps0")

#: Recognized option keys per config section; unknown keys are rejected.
SECTION_KEYS = {
    "simulate": {"t0", "t_end", "h_step", "perturbation", "x0",
                 "frozen_lag", "tau_sigma"},
    "crossing": {"sigma0", "delta", "alpha_lo", "alpha_hi",
                 "beta_lo", "beta_hi"},
    "orbit": {"t0", "t_end", "h_step", "perturbation", "modes",
              "transient_fraction", "n_returns", "spread_tol",
              "closure_rtol", "n_profile"},
    "branch": {"alpha_lo", "alpha_hi", "n_points", "t_end", "h_step",
               "perturbation", "modes"},
    "bounds": {"tau_sup", "tau_dot_sup", "xdot_sup"},
}

#: Top-level keys tolerated (and ignored) so a JSON summary round-trips
#: as a config file.
PASSTHROUGH_KEYS = {"command", "results", "threads"}


@dataclass
class RunConfig:
    params: GoodwinParameters
    sections: Dict[str, dict] = field(default_factory=dict)

    def section(self, name: str) -> dict:
        return dict(self.sections.get(name, {}))

    def to_dict(self) -> dict:
        out = dict(self.params.to_dict())
        for name, sec in self.sections.items():
            out[name] = dict(sec)
        return out


def _coerce(text: str):
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_config(path, overrides: Optional[List[str]] = None) -> RunConfig:
    """Load and validate a JSON/TOML config, applying key=value overrides.

    Overrides use dotted paths for section options (simulate.t_end=50) and
    bare names for model parameters (alpha_m=7.0); they win over file
    values.  Raises ParseError for unreadable files, SchemaError for
    missing/unknown/invalid fields (naming the field).
    """
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    data = None
    if p.suffix.lower() == ".toml":
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ParseError(f"invalid TOML in {path}: {exc}") from exc
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            if p.suffix.lower() != ".json":
                try:
                    data = tomllib.loads(text)
                except tomllib.TOMLDecodeError:
                    data = None
            if data is None:
                raise ParseError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError("config root must be a table/object")

    for key, value in _parse_overrides(overrides or []):
        parts = key.split(".")
        if len(parts) == 1:
            data[parts[0]] = value
        elif len(parts) == 2:
            data.setdefault(parts[0], {})
            if not isinstance(data[parts[0]], dict):
                raise SchemaError(f"override {key}: {parts[0]} is not a "
                                  "section")
            data[parts[0]][parts[1]] = value
        else:
            raise SchemaError(f"override key too deep: {key}")

    return _validate(data)


def _parse_overrides(pairs):
    for item in pairs:
        if "=" not in item:
            raise SchemaError(f"override must be key=value, got {item!r}")
        key, _, value = item.partition("=")
        yield key.strip(), _coerce(value.strip())


def _validate(data: dict) -> RunConfig:
    params_raw = {}
    sections = {}
    for key, value in data.items():
        if key in PARAM_KEYS:
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise SchemaError(f"parameter {key} must be a number, "
                                  f"got {value!r}")
            params_raw[key] = value
        elif key in SECTION_KEYS:
            if not isinstance(value, dict):
                raise SchemaError(f"section {key} must be a table/object")
            unknown = set(value) - SECTION_KEYS[key]
            if unknown:
                raise SchemaError(
                    f"unknown option {sorted(unknown)[0]} in section {key}")
            sections[key] = dict(value)
        elif key in PASSTHROUGH_KEYS:
            continue
        else:
            raise SchemaError(f"unknown config key {key}")
    missing = [k for k in PARAM_KEYS if k not in params_raw]
    if missing:
        raise SchemaError(f"missing required parameter {missing[0]}")
    try:
        params = GoodwinParameters.from_dict(params_raw)
    except (ValueError, TypeError) as exc:
        raise SchemaError(str(exc)) from exc
    return RunConfig(params=params, sections=sections)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return "nan"
    return format(float(v), ".17g")


def _write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    path.write_text(text)
    sys.stdout.write(text)


def _write_summary(path: Path, command: str, cfg: RunConfig, results: dict):
    doc = cfg.to_dict()
    doc["command"] = command
    doc["threads"] = int(os.environ.get("SDD_HOPF_THREADS", "1"))
    doc["results"] = results
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _cmd_stationary(cfg: RunConfig, out: Path):
    st = goodwin_stationary(cfg.params)
    header = ["x", "y", "z", "tau", "det_sum", "s3_ok", "residual"]
    row = [st.x[0], st.x[1], st.x[2], st.tau, st.det_sum, st.s3_ok,
           st.residual_norm]
    _write_csv(out / "stationary.csv", header, [row])
    return {"s3_ok": bool(st.s3_ok), "residual": st.residual_norm}


def _cmd_eigs(cfg: RunConfig, out: Path):
    st = goodwin_stationary(cfg.params)
    eigs = goodwin_eigenvalues(cfg.params, st)
    rows = [[lam.real, lam.imag] for lam in eigs]
    _write_csv(out / "eigs.csv", ["re", "im"], rows)
    return {"max_real_part": float(eigs[0].real)}


def _cmd_crossing(cfg: RunConfig, out: Path):
    sec = cfg.section("crossing")
    model = goodwin_model(cfg.params)
    if not all(k in sec for k in ("sigma0", "alpha_lo", "alpha_hi",
                                  "beta_lo", "beta_hi")):
        cert = find_critical(cfg.params)
        if not cert.exists:
            raise SddHopfError("no critical point; supply the crossing "
                               "section (sigma0 and rectangle) explicitly")
        sec.setdefault("sigma0", cert.alpha_m_star)
        sec.setdefault("alpha_lo", 0.0)
        sec.setdefault("alpha_hi", 0.5)
        sec.setdefault("beta_lo", cert.v_star - 0.5)
        sec.setdefault("beta_hi", cert.v_star + 0.5)
    rect = ContourRectangle(alpha_lo=float(sec["alpha_lo"]),
                            alpha_hi=float(sec["alpha_hi"]),
                            beta_lo=float(sec["beta_lo"]),
                            beta_hi=float(sec["beta_hi"]),
                            delta=float(sec.get("delta", 1e-3)))
    beta0 = 0.5 * (rect.beta_lo + rect.beta_hi)
    rep = crossing_number(model, float(sec["sigma0"]), beta0, rect)
    header = ["gamma_minus", "gamma_plus", "gamma",
              "boundary_min_modulus", "refinement_depth"]
    row = [rep.gamma_minus, rep.gamma_plus, rep.gamma,
           rep.boundary_min_modulus, rep.refinement_depth]
    _write_csv(out / "crossing.csv", header, [row])
    return {"gamma": rep.gamma}


def _cmd_hopf(cfg: RunConfig, out: Path):
    cert = find_critical(cfg.params)
    header = ["exists", "alpha_m_star", "x_star", "v_star", "c0_star",
              "du_dalpha", "gamma"]
    row = [cert.exists, cert.alpha_m_star, cert.x_star, cert.v_star,
           cert.c0_star, cert.du_dalpha, cert.gamma]
    _write_csv(out / "hopf.csv", header, [row])
    results = {"exists": bool(cert.exists)}
    if cert.exists:
        printed, corrected, fd = transversality_report(cfg.params, cert)
        results["du_dalpha_printed"] = printed
        results["du_dalpha_corrected"] = corrected
        results["du_dalpha_fd"] = fd
    return results


def _simulate_setup(cfg: RunConfig, sec: dict):
    t0 = float(sec.get("t0", 0.0))
    t_end = float(sec.get("t_end", 100.0))
    if not t_end > t0:
        raise SchemaError(f"simulate span must have t_end > t0, got "
                          f"[{t0}, {t_end}]")
    icfg = IntegratorConfig(h_step=float(sec.get("h_step", 0.01)),
                            frozen_lag=bool(sec.get("frozen_lag", False)),
                            tau_sigma=sec.get("tau_sigma"))
    st = goodwin_stationary(cfg.params)
    if "x0" in sec:
        x0 = np.asarray(sec["x0"], dtype=float)
        if x0.shape != (3,):
            raise SchemaError("x0 must be a 3-vector")
    else:
        pert = float(sec.get("perturbation", 1e-3))
        x0 = st.x + pert * np.array([1.0, 0.0, 0.0])
    return t0, t_end, icfg, st, x0


def _cmd_simulate(cfg: RunConfig, out: Path):
    sec = cfg.section("simulate")
    t0, t_end, icfg, _, x0 = _simulate_setup(cfg, sec)
    model = goodwin_model(cfg.params)
    traj = integrate(model, cfg.params.alpha_m, x0, (t0, t_end), icfg)
    header = ["t", "x", "y", "z", "tau", "tau_dot"]
    rows = [[traj.t[i], traj.x[i, 0], traj.x[i, 1], traj.x[i, 2],
             traj.tau[i], traj.tau_dot[i]] for i in range(len(traj.t))]
    _write_csv(out / "simulate.csv", header, rows)
    return {
        "max_delay_residual": float(np.max(traj.delay_residual)),
        "max_tau": float(np.max(traj.tau)),
        "min_tau": float(np.min(traj.tau)),
        "max_inner_used": int(traj.max_inner_used),
        "n_steps": int(len(traj.t) - 1),
    }


def _orbit_config(sec: dict) -> OrbitConfig:
    return OrbitConfig(
        transient_fraction=float(sec.get("transient_fraction", 0.6)),
        n_returns=int(sec.get("n_returns", 5)),
        spread_tol=float(sec.get("spread_tol", 1e-5)),
        closure_rtol=float(sec.get("closure_rtol", 1e-6)),
        n_profile=int(sec.get("n_profile", 256)))


def _orbit_row(alpha_m, orbit, epsilon, bound_ii):
    if orbit is None:
        return [alpha_m, False, math.nan, math.nan, math.nan, math.nan,
                math.nan, math.nan, epsilon]
    return [alpha_m, True, orbit.period, orbit.amplitudes[0],
            orbit.amplitudes[1], orbit.amplitudes[2], bound_ii,
            orbit.fourier_res, epsilon]


ORBIT_HEADER = ["alpha_m", "detected", "period", "amplitude_x",
                "amplitude_y", "amplitude_z", "bound_ii",
                "fourier_residual", "epsilon"]


def _cmd_orbit(cfg: RunConfig, out: Path):
    sec = cfg.section("orbit")
    sim_sec = {k: sec[k] for k in ("t0", "t_end", "h_step", "perturbation")
               if k in sec}
    sim_sec.setdefault("t_end", 900.0)
    sim_sec.setdefault("h_step", 0.02)
    t0, t_end, icfg, st, x0 = _simulate_setup(cfg, sim_sec)
    model = goodwin_model(cfg.params)
    traj = integrate(model, cfg.params.alpha_m, x0, (t0, t_end), icfg)
    orbit, reason = detect_orbit(traj, float(st.x[0]), _orbit_config(sec),
                                 return_diagnostics=True)
    epsilon = sign_det_sum(model, cfg.params.alpha_m)
    results = {"detected": orbit is not None, "diagnostics": reason,
               "epsilon": epsilon}
    bound_ii = math.nan
    if orbit is not None:
        lip = lipschitz_constants(cfg.params)
        pb = period_bounds(lip.L_f, lip.L_g, orbit.tau_sup,
                           orbit.tau_dot_sup, orbit.xdot_sup)
        bound_ii = pb.ii
        orbit.fourier_res = fourier_residual(
            orbit, model, cfg.params.alpha_m, int(sec.get("modes", 64)))
        box = box_bounds_check(orbit, cfg.params)
        results.update({
            "period": orbit.period,
            "box_ok": bool(box.passed),
            "bounds_ok": all(orbit.period >= b - 1e-12
                             for b in pb.applicable()),
            "fourier_residual": orbit.fourier_res,
        })
    _write_csv(out / "orbit.csv", ORBIT_HEADER,
               [_orbit_row(cfg.params.alpha_m, orbit, epsilon, bound_ii)])
    return results


def _cmd_branch(cfg: RunConfig, out: Path):
    sec = cfg.section("branch")
    lo = float(sec.get("alpha_lo", 5.8))
    hi = float(sec.get("alpha_hi", 9.8))
    n = int(sec.get("n_points", 21))
    grid = np.linspace(lo, hi, n)
    icfg = IntegratorConfig(h_step=float(sec.get("h_step", 0.02)))
    scan = branch_scan(cfg.params, grid, integrator_config=icfg,
                       t_end=float(sec.get("t_end", 900.0)),
                       perturbation=float(sec.get("perturbation", 1e-3)),
                       modes=int(sec.get("modes", 64)))
    rows = []
    for pt in scan.points:
        rows.append(_orbit_row(pt.alpha_m, pt.orbit, pt.epsilon,
                               math.nan if pt.bound_ii is None
                               else pt.bound_ii))
    _write_csv(out / "branch.csv", ORBIT_HEADER, rows)
    per_point = [{"alpha_m": pt.alpha_m, "detected": pt.detected,
                  "unstable": pt.unstable, "diagnostics": pt.diagnostics,
                  "error": pt.error} for pt in scan.points]
    return {"classification": scan.classification,
            "n_detected": sum(pt.detected for pt in scan.points),
            "points": per_point}


def _cmd_bounds(cfg: RunConfig, out: Path):
    sec = cfg.section("bounds")
    lip = lipschitz_constants(cfg.params)
    pb = period_bounds(lip.L_f, lip.L_g,
                       float(sec.get("tau_sup", 0.0)),
                       float(sec.get("tau_dot_sup", 0.0)),
                       float(sec.get("xdot_sup", 0.0)))
    header = ["L_f", "L_g", "h0", "printed_i", "rederived_i", "ii", "iii"]
    row = [lip.L_f, lip.L_g, lip.h0, pb.printed_i, pb.rederived_i, pb.ii,
           pb.iii]
    _write_csv(out / "bounds.csv", header, [row])
    return {"applicable": pb.applicable()}


_COMMANDS = {
    "stationary": _cmd_stationary,
    "eigs": _cmd_eigs,
    "crossing": _cmd_crossing,
    "hopf": _cmd_hopf,
    "simulate": _cmd_simulate,
    "orbit": _cmd_orbit,
    "branch": _cmd_branch,
    "bounds": _cmd_bounds,
}


def run(command: str, cfg: RunConfig, out_dir=".") -> int:
    """Execute one command; returns the process exit status."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        results = _COMMANDS[command](cfg, out)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SddHopfError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    _write_summary(out / f"{command}_summary.json", command, cfg, results)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sdd-hopf",
        description="Hopf-bifurcation diagnostics and simulation for "
                    "state-dependent-delay systems")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="JSON or TOML file")
    parser.add_argument("--set", dest="overrides", action="append",
                        default=[], metavar="KEY=VALUE",
                        help="override a config value (repeatable)")
    parser.add_argument("--out", default=".", help="output directory")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        cfg = parse_config(args.config, args.overrides)
    except (ParseError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(args.command, cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
