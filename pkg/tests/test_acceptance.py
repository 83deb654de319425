"""Acceptance suite: derived-oracle reproduction and property checks.

Each item prints a live PASS/FAIL line (bypassing capture) with the key
measured values, then asserts.  Items are sized to run in well under a
minute each on one core.
"""

import dataclasses
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from sddhopf import (ContourRectangle, GoodwinParameters, IntegratorConfig,
                     ModelDefinition, PeriodicOrbit, contraction_margin,
                     crossing_number, find_critical, fourier_residual,
                     goodwin_eigenvalues, goodwin_model, goodwin_stationary,
                     hill_slope_max, integrate, lemma41_paper_solution,
                     lemma41_residual, lipschitz_constants, period_bounds,
                     transversality_report, branch_scan)

EQUAL = GoodwinParameters(mu_m=1.0, mu_p=1.0, mu_e=1.0, alpha_m=2.0,
                          alpha_p=1.0, alpha_e=1.0, c=0.1, z_tilde=1.0,
                          h=10, eps0=0.0)


def emit(capsys, item, ok, detail):
    with capsys.disabled():
        print(f"\n[acceptance {item:02d}] {'PASS' if ok else 'FAIL'}: "
              f"{detail}")
    assert ok, detail


def test_acceptance_01_stationary_exactness(capsys):
    worst = 0.0
    for h in (2, 4, 6, 10):
        st = goodwin_stationary(dataclasses.replace(EQUAL, h=h))
        worst = max(worst, abs(st.x[0] - 1.0), st.residual_norm)
    emit(capsys, 1, worst < 1e-12,
         f"unit equilibrium across even Hill exponents, worst dev {worst:.2e}")


def test_acceptance_02_critical_point(capsys):
    cert = find_critical(EQUAL)
    d_alpha = abs(cert.alpha_m_star - 5.0 * 4.0 ** 0.1)
    d_x = abs(cert.x_star - 4.0 ** 0.1)
    d_v = abs(cert.v_star - math.sqrt(3.0))
    ok = cert.exists and d_alpha < 1e-8 and d_x < 1e-8 and d_v < 1e-10
    emit(capsys, 2, ok,
         f"alpha_m*={cert.alpha_m_star:.9f} (dev {d_alpha:.1e}), "
         f"x*={cert.x_star:.9f} (dev {d_x:.1e}), v* dev {d_v:.1e}")


def test_acceptance_03_spectrum_at_criticality(capsys):
    cert = find_critical(EQUAL)
    p = EQUAL.with_alpha_m(cert.alpha_m_star)
    eigs = goodwin_eigenvalues(p, goodwin_stationary(p))
    v = math.sqrt(3.0)
    dev = max(abs(eigs[0] - 1j * v), abs(eigs[1] + 1j * v),
              abs(eigs[2] + 3.0))
    emit(capsys, 3, dev < 1e-10,
         f"roots {{-3, +/-i sqrt(3)}} reproduced, max dev {dev:.2e}")


def test_acceptance_04_crossing_number(capsys):
    cert = find_critical(EQUAL)
    model = goodwin_model(EQUAL)
    v = math.sqrt(3.0)
    rect = ContourRectangle(0.0, 0.5, v - 0.5, v + 0.5, delta=1e-3)
    reps = [crossing_number(model, cert.alpha_m_star, v, rect, max_depth=d)
            for d in (6, 12)]
    triple = (reps[0].gamma_minus, reps[0].gamma_plus, reps[0].gamma)
    stable = all((r.gamma_minus, r.gamma_plus, r.gamma) == triple
                 for r in reps)
    ok = triple == (0, 1, -1) and stable
    emit(capsys, 4, ok,
         f"gamma-=%d gamma+=%d gamma=%d, stable across depths 6/12: %s"
         % (*triple, stable))


def test_acceptance_05_transversality(capsys):
    cert = find_critical(EQUAL)
    printed, corrected, fd = transversality_report(EQUAL, cert)
    value_ok = abs(printed - 0.0171961) < 1e-6 and printed > 0.0
    rel = abs(printed - fd) / abs(printed)
    match_ok = rel < 1e-5
    emit(capsys, 5, value_ok and match_ok,
         f"printed formula {printed:.7f}, finite difference {fd:.7f} "
         f"(rel diff {rel:.3f}; corrected-denominator value {corrected:.7f} "
         f"matches the finite difference to {abs(corrected-fd)/fd:.1e})")


def test_acceptance_06_no_critical_point_below_secant_threshold(capsys):
    details = []
    ok = True
    grid = np.logspace(-3, 4, 1000)
    for h in (2, 4, 6, 8):
        p = dataclasses.replace(EQUAL, h=h)
        cert = find_critical(p)
        reals = []
        for a in grid:
            pa = p.with_alpha_m(a)
            reals.append(goodwin_eigenvalues(
                pa, goodwin_stationary(pa))[0].real)
        max_real = max(reals)
        x_p, a_p = lemma41_paper_solution(p)
        r1_cert = lemma41_residual(p, x_p, a_p)[0]
        ok = ok and (not cert.exists) and max_real < 0.0
        details.append(f"h={h}: exists={cert.exists}, "
                       f"scan max Re={max_real:.3e}, "
                       f"closed-form-system residual at its own root "
                       f"{r1_cert:.1e}")
    emit(capsys, 6, ok, "; ".join(details))


def test_acceptance_07_hill_slope_closed_form(capsys):
    ts = np.linspace(1e-5, 3.0, 300001)
    worst = 0.0
    for h in (2, 4, 6, 8, 10):
        grid_max = float(np.max(h * ts ** (h - 1) / (1.0 + ts ** h) ** 2))
        worst = max(worst, abs(hill_slope_max(h) - grid_max))
    h10 = hill_slope_max(10)
    ok = worst < 1e-4 and abs(h10 - 2.525171) < 1e-5
    emit(capsys, 7, ok,
         f"closed form vs grid search, worst dev {worst:.2e}; "
         f"h=10 value {h10:.6f}")


def test_acceptance_08_integrator_order(capsys):
    p = dataclasses.replace(EQUAL, alpha_m=7.0, eps0=0.5)
    model = goodwin_model(p)
    st = goodwin_stationary(p)
    x0 = st.x + 0.2 * np.array([1.0, 0.0, 0.0])
    # The warm-up run lets the derivative breaks propagated from the
    # constant pre-history decay, so the study starts from a smooth state.
    warm = integrate(model, 7.0, x0, (0.0, 6.0),
                     IntegratorConfig(h_step=5e-4))
    ends = {}
    for hs in (4e-3, 2e-3, 1e-3, 5e-4):
        tr = integrate(model, 7.0, warm.history, (6.0, 9.0),
                       IntegratorConfig(h_step=hs))
        ends[hs] = tr.x[-1]
    errs = [np.max(np.abs(ends[hs] - ends[5e-4]))
            for hs in (4e-3, 2e-3, 1e-3)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    order = min(orders)

    # undelayed cross-check: c -> 0 limit against a high-accuracy reference
    p0 = dataclasses.replace(EQUAL, alpha_m=7.0)
    m0 = goodwin_model(p0)
    st0 = goodwin_stationary(p0)
    y0 = st0.x + 1e-3 * np.array([1.0, 0.0, 0.0])
    traj = integrate(m0, 7.0, y0, (0.0, 10.0), IntegratorConfig(h_step=0.01))
    sol = solve_ivp(lambda t, u: m0.rhs(u, u, 7.0), (0.0, 10.0), y0,
                    method="DOP853", rtol=1e-13, atol=1e-15)
    ref_err = float(np.max(np.abs(traj.x[-1] - sol.y[:, -1])))
    ok = order >= 3.8 and ref_err < 1e-10
    emit(capsys, 8, ok,
         f"self-convergence orders {[f'{o:.2f}' for o in orders]} "
         f"(min {order:.2f} >= 3.8); undelayed end-state error vs "
         f"reference solve {ref_err:.2e}")


def test_acceptance_09_vanishing_delay_regime(capsys):
    p = dataclasses.replace(EQUAL, alpha_m=7.0)
    model = goodwin_model(p)
    st = goodwin_stationary(p)
    x0 = st.x + 1e-3 * np.array([1.0, 0.0, 0.0])
    traj = integrate(model, 7.0, x0, (0.0, 50.0),
                     IntegratorConfig(h_step=0.01))
    tau_max = float(np.max(np.abs(traj.tau)))
    margin = contraction_margin(model, traj.history, 7.0, (0.0, 50.0))
    ok = tau_max < 1e-12 and margin < 1.0
    emit(capsys, 9, ok,
         f"max |tau| over all steps {tau_max:.2e}, "
         f"uniqueness margin {margin:.4f} < 1")


def test_acceptance_10_branch_scan_validity(capsys):
    p = dataclasses.replace(EQUAL, alpha_m=7.0)
    grid = np.linspace(5.8, 9.8, 21)
    scan = branch_scan(p, grid)
    detected = [pt for pt in scan.points if pt.detected]
    eps_ok = all(pt.epsilon == -1 for pt in scan.points)
    no_errors = all(pt.error is None for pt in scan.points)
    valid = all(pt.box_ok and pt.bounds_ok and pt.fourier_res < 1e-3
                for pt in detected)
    if detected:
        ok = valid and eps_ok and no_errors and scan.classification in (
            "PERIOD_GROWTH", "PARAMETER_EXIT", "INCONCLUSIVE")
        detail = (f"{len(detected)}/21 orbits detected, all pass box bounds, "
                  f"period lower bounds, and spectral residual < 1e-3; "
                  f"epsilon=-1 at all points; "
                  f"classification {scan.classification}")
    else:
        diags = all(pt.diagnostics for pt in scan.points)
        ok = eps_ok and no_errors and diags and \
            scan.classification == "INCONCLUSIVE"
        detail = ("no orbits detected; classification INCONCLUSIVE with "
                  "per-point diagnostics")
    emit(capsys, 10, ok, detail)


def test_acceptance_11_planted_solution_residual(capsys):
    m = 256
    ts = 2.0 * math.pi * np.arange(m) / m
    orbit = PeriodicOrbit(
        period=2.0 * math.pi, beta=1.0, profile=np.cos(ts)[:, None],
        tau_profile=np.full(m, math.pi / 2.0), times=ts,
        amplitudes=np.array([1.0]), tau_sup=math.pi / 2.0,
        tau_dot_sup=0.0, xdot_sup=1.0, return_residual=0.0,
        closure_error=0.0)
    model = ModelDefinition(dimension=1,
                            rhs=lambda t1, t2, s: -np.atleast_1d(t2),
                            delay_map=lambda t1, t2, s: math.pi / 2.0)
    res = fourier_residual(orbit, model, 0.0, 32)
    emit(capsys, 11, res < 1e-10,
         f"cosine solution of the quarter-period-lag equation: "
         f"residual {res:.2e} at 32 modes")


def test_acceptance_12_period_bound_discrepancy(capsys):
    lip = lipschitz_constants(dataclasses.replace(EQUAL, alpha_m=7.0))
    pb = period_bounds(lip.L_f, lip.L_g, 0.0, 0.0, 0.0)
    ok = (pb.printed_i == pytest.approx(2.0)
          and pb.rederived_i == pytest.approx(2.0 / lip.L_f)
          and pb.rederived_i in pb.applicable())
    emit(capsys, 12, ok,
         f"zero-delay limit: printed bound (i) = {pb.printed_i}, "
         f"re-derived = {pb.rederived_i:.6f} = 2/L_f "
         f"(L_f = {lip.L_f:.6f}); the re-derived variant gates item 10")
