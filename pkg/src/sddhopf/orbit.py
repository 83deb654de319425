"""Periodic-orbit detection, validation, and parameter branch scans.

Orbits are detected from trajectories via a Poincare section through the
equilibrium, validated against positivity/box bounds and minimal-period
lower bounds, and checked against the averaged fixed-point formulation by
a spectral residual.  A scan over the gain parameter records one branch
point per grid value and classifies the scan outcome.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import ModeOverflow, SingularAtStationary
from .hopf import HopfCertificate, LipschitzBundle, find_critical, \
    lipschitz_constants
from .integrator import IntegratorConfig, Trajectory, integrate
from .model import (GoodwinParameters, ModelDefinition, goodwin_model,
                    jacobians)
from .spectrum import goodwin_eigenvalues
from .stationary import SINGULARITY_RTOL, goodwin_stationary, solve_stationary

Array = np.ndarray

#: Detected period beyond this many linear periods flags PERIOD_GROWTH.
UNBOUNDED_PERIOD_FACTOR = 50.0

PERIOD_GROWTH = "PERIOD_GROWTH"
PARAMETER_EXIT = "PARAMETER_EXIT"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class OrbitConfig:
    transient_fraction: float = 0.6
    n_returns: int = 5
    spread_tol: float = 1e-5
    closure_rtol: float = 1e-6
    n_profile: int = 256
    component: int = 0
    direction: float = +1.0


@dataclass
class PeriodicOrbit:
    period: float
    beta: float
    profile: Array          # (M, N) samples over one period
    tau_profile: Array      # (M,)
    times: Array            # (M,) sample times in the source trajectory
    amplitudes: Array       # (N,) per-component (max - min)/2
    tau_sup: float
    tau_dot_sup: float
    xdot_sup: float
    return_residual: float  # relative spread of the return times
    closure_error: float
    fourier_res: Optional[float] = None


@dataclass(frozen=True)
class PeriodBounds:
    """Minimal-period lower bounds; None when a hypothesis fails.

    printed_i is the bound as printed, 2/(1 - 2*L_f*||tau||); rederived_i
    is 2*(1 - 2*L_f*||tau||)/L_f, which is what the underlying mean-value
    inequality actually yields.  The re-derived variant gates acceptance.
    """

    printed_i: Optional[float]
    rederived_i: Optional[float]
    ii: float
    iii: Optional[float]

    def applicable(self):
        out = []
        if self.rederived_i is not None:
            out.append(self.rederived_i)
        out.append(self.ii)
        if self.iii is not None:
            out.append(self.iii)
        return out


def detect_orbit(traj: Trajectory, section_level: float,
                 cfg: OrbitConfig = OrbitConfig(),
                 return_diagnostics: bool = False):
    """Detect a periodic orbit via section returns.

    The section is the hyperplane x[component] = section_level crossed in
    the `direction` sense; the period is the mean of the last n_returns
    return times, accepted only if their relative spread and the profile
    closure error are below the configured tolerances.  Returns the orbit
    (or None); with return_diagnostics, returns (orbit, reason).
    """
    comp, sgn = cfg.component, cfg.direction

    def done(orbit, reason):
        return (orbit, reason) if return_diagnostics else orbit

    t = traj.t
    cut = t[0] + cfg.transient_fraction * (t[-1] - t[0])
    idx0 = int(np.searchsorted(t, cut))
    vals = sgn * (traj.x[:, comp] - section_level)
    crossings = []
    for i in range(max(idx0, 1), len(t) - 1):
        if vals[i] <= 0.0 < vals[i + 1]:
            tc = brentq(lambda s: sgn * (traj.eval(s)[0][comp]
                                         - section_level),
                        t[i], t[i + 1], xtol=1e-13, rtol=8.9e-16)
            crossings.append(tc)
    if len(crossings) < cfg.n_returns + 1:
        return done(None, f"too_few_returns:{len(crossings)}")

    recent = np.array(crossings[-(cfg.n_returns + 1):])
    periods = np.diff(recent)
    p = float(np.mean(periods))
    spread = float((periods.max() - periods.min()) / p)
    if spread > cfg.spread_tol:
        return done(None, f"return_spread:{spread:.3e}")

    t_end = recent[-1]
    m = cfg.n_profile
    times = t_end - p + np.arange(m) * (p / m)
    profile = np.empty((m, traj.x.shape[1]))
    for j, s in enumerate(times):
        profile[j] = traj.eval(s)[0]
    amplitudes = 0.5 * (profile.max(axis=0) - profile.min(axis=0))
    amp_scale = float(amplitudes.max())
    if amp_scale <= 0.0:
        return done(None, "zero_amplitude")
    closure = float(np.max(np.abs(traj.eval(t_end)[0]
                                  - traj.eval(t_end - p)[0])))
    if closure > cfg.closure_rtol * amp_scale:
        return done(None, f"closure:{closure:.3e}")

    window = (t >= t_end - p) & (t <= t_end)
    tau_profile = np.interp(times, t, traj.tau)
    tau_sup = float(np.max(np.abs(traj.tau[window]))) if window.any() else 0.0
    tau_dot_sup = float(np.max(np.abs(traj.tau_dot[window]))) \
        if window.any() else 0.0
    xdot_sup = float(np.max(np.abs(traj.xdot[window]))) if window.any() else 0.0

    orbit = PeriodicOrbit(period=p, beta=2.0 * math.pi / p, profile=profile,
                          tau_profile=tau_profile, times=times,
                          amplitudes=amplitudes, tau_sup=tau_sup,
                          tau_dot_sup=tau_dot_sup, xdot_sup=xdot_sup,
                          return_residual=spread, closure_error=closure)
    return done(orbit, "ok")


def period_bounds(L_f: float, L_g: float, tau_sup: float,
                  tau_dot_sup: float, xdot_sup: float) -> PeriodBounds:
    """Evaluate the three minimal-period lower bounds.

    Bound (i) applies when ||tau|| < 1/(2 L_f) and is returned both as
    printed and as re-derived (see PeriodBounds); bound (ii) always
    applies for continuously differentiable tau; bound (iii) applies when
    ||xdot|| < 1/L_g.
    """
    printed_i = rederived_i = None
    if tau_sup < 1.0 / (2.0 * L_f):
        printed_i = 2.0 / (1.0 - 2.0 * L_f * tau_sup)
        rederived_i = 2.0 * (1.0 - 2.0 * L_f * tau_sup) / L_f
    ii = 4.0 / (L_f * (2.0 + tau_dot_sup))
    iii = None
    if L_g > 0.0 and xdot_sup < 1.0 / L_g:
        iii = 2.0 * (1.0 - L_g * xdot_sup) / L_f
    elif L_g == 0.0:
        iii = 2.0 / L_f
    return PeriodBounds(printed_i=printed_i, rederived_i=rederived_i,
                        ii=ii, iii=iii)


@dataclass(frozen=True)
class BoxReport:
    passed: bool
    upper_bounds: Array
    min_values: Array
    max_values: Array
    violations: tuple


def box_bounds_check(orbit: PeriodicOrbit, params: GoodwinParameters,
                     slack: float = 1e-9) -> BoxReport:
    """Check strict positivity and the per-component upper box bounds.

    The invariant box is (0, alpha_m/mu_m] x (0, alpha_p*alpha_m/
    (mu_p*mu_m)] x (0, alpha_e*alpha_p*alpha_m/(mu_e*mu_p*mu_m)].
    """
    bx = params.alpha_m / params.mu_m
    by = params.alpha_p * bx / params.mu_p
    bz = params.alpha_e * by / params.mu_e
    upper = np.array([bx, by, bz])
    mins = orbit.profile.min(axis=0)
    maxs = orbit.profile.max(axis=0)
    violations = []
    names = ("x", "y", "z")
    for j in range(3):
        if mins[j] <= 0.0:
            violations.append(f"{names[j]}: min {mins[j]!r} not positive")
        if maxs[j] > upper[j] + slack:
            violations.append(
                f"{names[j]}: max {maxs[j]!r} exceeds bound {upper[j]!r}")
    return BoxReport(passed=not violations, upper_bounds=upper,
                     min_values=mins, max_values=maxs,
                     violations=tuple(violations))


def _trig_interp(coeffs: Array, ks: Array, thetas: Array, m: int) -> Array:
    """Evaluate a truncated Fourier series at arbitrary phases.

    coeffs: (K, N) selected FFT coefficients; ks: (K,) integer wave
    numbers; thetas: (M,) phases in radians.
    """
    phases = np.exp(1j * np.outer(thetas, ks))      # (M, K)
    return (phases @ coeffs).real / m


def fourier_residual(orbit: PeriodicOrbit, model: ModelDefinition,
                     sigma: float, modes: int) -> float:
    """Sup-norm residual of the averaged fixed-point formulation.

    On the M-point grid of one normalized period, computes
    w = (1/beta) f(y, y_delayed, sigma) + mean(y), applies the inverse of
    (d/dt + mean) spectrally (constant mode unchanged, mode k divided by
    i*k), and returns ||y - result||_inf.  Zero for exact solutions.
    The delayed samples are obtained by trigonometric interpolation of y
    truncated to `modes` harmonics.
    """
    y = orbit.profile
    m = y.shape[0]
    if modes > m // 2:
        raise ModeOverflow(f"modes={modes} exceeds Nyquist {m // 2}")
    beta = orbit.beta
    yhat = np.fft.fft(y, axis=0)
    k_all = np.rint(np.fft.fftfreq(m) * m).astype(int)
    keep = np.abs(k_all) <= modes
    s = 2.0 * math.pi * np.arange(m) / m
    thetas = s - beta * orbit.tau_profile
    ydel = _trig_interp(yhat[keep], k_all[keep], thetas, m)

    w = np.empty_like(y)
    for j in range(m):
        w[j] = model.rhs(y[j], ydel[j], sigma) / beta
    w += y.mean(axis=0)

    what = np.fft.fft(w, axis=0)
    out = np.empty_like(what)
    nz = k_all != 0
    out[~nz] = what[~nz]
    out[nz] = what[nz] / (1j * k_all[nz])[:, None]
    result = np.fft.ifft(out, axis=0).real
    return float(np.max(np.abs(y - result)))


def sign_det_sum(model: ModelDefinition, sigma: float,
                 guess: Optional[Array] = None) -> int:
    """Sign of det(d1f + d2f) at the stationary state for sigma."""
    if guess is None:
        if model.stationary_guess is None:
            raise ValueError("sign_det_sum needs a stationary guess")
        guess = model.stationary_guess(sigma)
    st = solve_stationary(model, sigma, np.asarray(guess, dtype=float))
    if not st.s3_ok:
        raise SingularAtStationary(
            f"|det(d1f+d2f)| = {abs(st.det_sum)!r} below threshold")
    return 1 if st.det_sum > 0.0 else -1


@dataclass
class BranchPoint:
    alpha_m: float
    detected: bool
    unstable: bool
    epsilon: int
    period: Optional[float] = None
    amplitudes: Optional[Array] = None
    bound_ii: Optional[float] = None
    bounds_ok: Optional[bool] = None
    box_ok: Optional[bool] = None
    fourier_res: Optional[float] = None
    diagnostics: str = ""
    orbit: Optional[PeriodicOrbit] = None
    error: Optional[str] = None


@dataclass
class BranchScan:
    points: List[BranchPoint]
    classification: str
    certificate: HopfCertificate
    grid: Array


def branch_scan(params_template: GoodwinParameters, alpha_grid: Sequence[float],
                integrator_config: Optional[IntegratorConfig] = None,
                orbit_config: OrbitConfig = OrbitConfig(),
                t_end: float = 900.0, perturbation: float = 1e-3,
                modes: int = 64) -> BranchScan:
    """Simulate and classify orbits over a grid of gain values.

    Each grid point starts at the stationary state perturbed along the
    leading eigen-direction (when unstable) or along the x-axis, runs the
    integrator, attempts orbit detection, and records the orientation sign
    and validity checks.  Classification: PERIOD_GROWTH when a detected
    period exceeds the unbounded-period proxy, PARAMETER_EXIT when orbits
    persist to the last grid point, INCONCLUSIVE otherwise.
    """
    grid = np.asarray(alpha_grid, dtype=float)
    if params_template.c > 0.0 and grid.max() >= 1.0 / params_template.c:
        raise ValueError("alpha_m grid must stay below 1/c")
    if grid.min() <= 0.0:
        raise ValueError("alpha_m grid must be positive")

    cert = find_critical(params_template)
    model = goodwin_model(params_template)
    if integrator_config is None:
        integrator_config = IntegratorConfig(h_step=0.02)

    points: List[BranchPoint] = []
    for a in grid:
        p = params_template.with_alpha_m(float(a))
        st = goodwin_stationary(p)
        eigs = goodwin_eigenvalues(p, st)
        unstable = float(eigs[0].real) > 0.0
        if unstable:
            # Perturb along the leading eigendirection of the sum Jacobian
            # d1f + d2f (delay vanishes at the stationary state).
            bundle = jacobians(model, st.x, st.x, float(a))
            jac = bundle.d1f + bundle.d2f
            w, v = np.linalg.eig(jac)
            lead = int(np.argmax(w.real))
            direction = np.real(v[:, lead])
            direction = direction / np.linalg.norm(direction)
        else:
            direction = np.array([1.0, 0.0, 0.0])
        x_init = st.x + perturbation * direction

        point = BranchPoint(alpha_m=float(a), detected=False,
                            unstable=unstable, epsilon=0)
        try:
            point.epsilon = sign_det_sum(model, float(a))
            traj = integrate(model, float(a), x_init, (0.0, t_end),
                             integrator_config)
            orbit, reason = detect_orbit(traj, float(st.x[0]), orbit_config,
                                         return_diagnostics=True)
            point.diagnostics = reason
            if orbit is not None:
                lip = lipschitz_constants(p)
                pb = period_bounds(lip.L_f, lip.L_g, orbit.tau_sup,
                                   orbit.tau_dot_sup, orbit.xdot_sup)
                box = box_bounds_check(orbit, p)
                orbit.fourier_res = fourier_residual(orbit, model, float(a),
                                                     modes)
                point.detected = True
                point.period = orbit.period
                point.amplitudes = orbit.amplitudes
                point.bound_ii = pb.ii
                point.bounds_ok = all(orbit.period >= b - 1e-12
                                      for b in pb.applicable())
                point.box_ok = box.passed
                point.fourier_res = orbit.fourier_res
                point.orbit = orbit
        except Exception as exc:  # record and continue scanning
            point.error = f"{type(exc).__name__}: {exc}"
        points.append(point)

    detected = [pt for pt in points if pt.detected]
    classification = INCONCLUSIVE
    if detected and cert.exists:
        linear_period = 2.0 * math.pi / cert.v_star
        if max(pt.period for pt in detected) \
                > UNBOUNDED_PERIOD_FACTOR * linear_period:
            classification = PERIOD_GROWTH
        elif points[-1].detected:
            classification = PARAMETER_EXIT
    elif detected and points[-1].detected:
        classification = PARAMETER_EXIT
    return BranchScan(points=points, classification=classification,
                      certificate=cert, grid=grid)
