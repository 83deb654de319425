"""Critical-point analysis for the Goodwin instance.

Finds the gain alpha_m* at which a conjugate eigenvalue pair of the
characteristic cubic reaches the imaginary axis, the frequency v* there,
the transversal speed du/dalpha_m of the crossing, Lipschitz data for the
period bounds, and a residual diagnostic for the closed-form critical
system as printed in the source analysis (which disagrees with the cubic;
both are reported, the cubic is trusted).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DisagreementError, NoCriticalPoint
from .model import GoodwinParameters
from .spectrum import goodwin_eigenvalues, goodwin_loop_gain
from .stationary import goodwin_stationary

#: Criticality scan range for alpha_m (log-spaced); beyond the upper end the
#: Hill saturation s/(1+s) has converged to 1 in double precision.
SCAN_LO = 1e-3
SCAN_HI = 1e4
SCAN_POINTS = 1000


@dataclass(frozen=True)
class HopfCertificate:
    exists: bool
    alpha_m_star: float
    x_star: float
    v_star: float
    c0_star: float
    s_star: float
    du_dalpha: float
    gamma: int


@dataclass(frozen=True)
class LipschitzBundle:
    L_f: float
    L_g: float
    h0: float


def _k_ratio(params: GoodwinParameters) -> float:
    """z/x ratio at equilibrium: alpha_e*alpha_p/(mu_e*mu_p)."""
    return params.alpha_e * params.alpha_p / (params.mu_e * params.mu_p)


def _c0_crit(params: GoodwinParameters) -> float:
    return ((params.mu_m + params.mu_p)
            * (params.mu_e + params.mu_p)
            * (params.mu_e + params.mu_m))


def gain_c0(params: GoodwinParameters, x: float):
    """Loop gain at equilibrium abscissa x, in two forms.

    c0_direct substitutes z = k*x and the equilibrium relation
    alpha_m = mu_m*x*(1 + s) into the linearization gain (including the
    alpha_p*alpha_e loop factor); it simplifies to
    h*mu_m*mu_p*mu_e * s/(1+s) with s = (k*x/z_tilde)^h.

    c0_paper evaluates the printed closed form
    h*alpha_m^3/(z_tilde^h mu_m^2) * k^(h-1) * x^(h-3); the two disagree
    by the factor alpha_p*alpha_e*(1+s)^(-4)*mu_p*mu_e/(...) and the
    discrepancy is the point of returning both.
    """
    if x <= 0.0:
        raise ValueError("x must be positive")
    h = params.h
    k = _k_ratio(params)
    s = (k * x / params.z_tilde) ** h
    alpha_m_eq = params.mu_m * x * (1.0 + s)
    c0_direct = (params.h * params.mu_m * params.mu_p * params.mu_e
                 * s / (1.0 + s))
    log_c0_paper = (math.log(h) + 3.0 * math.log(alpha_m_eq)
                    - h * math.log(params.z_tilde)
                    - 2.0 * math.log(params.mu_m)
                    + (h - 1) * math.log(k) + (h - 3) * math.log(x))
    c0_paper = math.exp(log_c0_paper)
    return c0_direct, c0_paper


def _max_real_part(params: GoodwinParameters, alpha_m: float) -> float:
    p = params.with_alpha_m(alpha_m)
    st = goodwin_stationary(p)
    eigs = goodwin_eigenvalues(p, st)
    return float(np.max(eigs.real))


def _c0_prime(params: GoodwinParameters, x_star: float,
              s_star: float) -> float:
    """dc0/dalpha_m along the equilibrium branch at criticality.

    c0(x) = h*mu_m*mu_p*mu_e * s/(1+s) with s = (k x / z_tilde)^h, chained
    with dx0/dalpha_m = 1/(mu_m*(1 + (h+1)s)).
    """
    dc0_dx = (params.h ** 2 * params.mu_m * params.mu_p * params.mu_e
              * s_star / (x_star * (1.0 + s_star) ** 2))
    dx_dalpha = 1.0 / (params.mu_m * (1.0 + (params.h + 1) * s_star))
    return dc0_dx * dx_dalpha


def _du_dalpha(params: GoodwinParameters, x_star: float, s_star: float,
               v_sq: float) -> float:
    """Transversal speed, denominator exactly as printed in the source
    analysis: [...]^2 + 4 v^2 (mu_m+mu_p)(mu_m+mu_p+mu_e)."""
    mu_m, mu_p, mu_e = params.mu_m, params.mu_p, params.mu_e
    pair_sum = mu_e * mu_p + mu_e * mu_m + mu_m * mu_p
    c0_prime = _c0_prime(params, x_star, s_star)
    denom = ((pair_sum - 3.0 * v_sq) ** 2
             + 4.0 * v_sq * (mu_m + mu_p) * (mu_m + mu_p + mu_e))
    return 2.0 * c0_prime * pair_sum / denom


def du_dalpha_corrected(params: GoodwinParameters, x_star: float,
                        s_star: float, v_sq: float) -> float:
    """Transversal speed with the denominator |P'(iv)|^2 the cubic implies.

    du/dalpha_m = Re(-c0' / P'(iv)) with P the characteristic cubic; the
    denominator is [pair_sum - 3v^2]^2 + 4 v^2 (mu_m+mu_p+mu_e)^2, which
    differs from the printed form (mu_m+mu_p)(mu_m+mu_p+mu_e) in the last
    factor.  This variant agrees with the finite-difference slope of the
    crossing pair's real part; the printed one does not.
    """
    mu_m, mu_p, mu_e = params.mu_m, params.mu_p, params.mu_e
    pair_sum = mu_e * mu_p + mu_e * mu_m + mu_m * mu_p
    c0_prime = _c0_prime(params, x_star, s_star)
    denom = ((pair_sum - 3.0 * v_sq) ** 2
             + 4.0 * v_sq * (mu_m + mu_p + mu_e) ** 2)
    return c0_prime * (3.0 * v_sq - pair_sum) / denom


def find_critical(params_template: GoodwinParameters) -> HopfCertificate:
    """Critical gain alpha_m* where an eigenvalue pair crosses the axis.

    Primary method: track the max real part of the characteristic cubic's
    roots along a log-spaced alpha_m grid, bracket the sign change and
    bisect.  Cross-check: the closed form s* = c0_crit/(cap - c0_crit)
    with cap = h*mu_m*mu_p*mu_e the supremum of the loop gain, valid when
    cap > c0_crit (the secant condition); otherwise no crossing exists.
    The template's alpha_m field is ignored.
    """
    p = params_template
    c0_crit = _c0_crit(p)
    cap = p.h * p.mu_m * p.mu_p * p.mu_e

    grid = np.logspace(math.log10(SCAN_LO), math.log10(SCAN_HI), SCAN_POINTS)
    reals = np.array([_max_real_part(p, a) for a in grid])
    crossings = np.nonzero(np.diff(np.sign(reals)) > 0)[0]

    if cap <= c0_crit:
        if crossings.size:
            raise DisagreementError(
                "secant condition fails but the eigenvalue scan crosses")
        return HopfCertificate(exists=False, alpha_m_star=math.nan,
                               x_star=math.nan, v_star=math.nan,
                               c0_star=math.nan, s_star=math.nan,
                               du_dalpha=math.nan, gamma=0)
    if not crossings.size:
        raise DisagreementError(
            "secant condition holds but no sign change found in scan")

    lo, hi = grid[crossings[0]], grid[crossings[0] + 1]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _max_real_part(p, mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * max(1.0, hi):
            break
    alpha_star = 0.5 * (lo + hi)
    if abs(_max_real_part(p, alpha_star)) > 1e-12:
        raise DisagreementError("bisection failed to pin Re(lambda) to zero")

    # Closed-form cross-check.
    s_star = c0_crit / (cap - c0_crit)
    k = _k_ratio(p)
    x_star = (p.z_tilde / k) * s_star ** (1.0 / p.h)
    alpha_closed = p.mu_m * x_star * (1.0 + s_star)
    if abs(alpha_closed - alpha_star) > 1e-8 * max(1.0, abs(alpha_closed)):
        raise DisagreementError(
            f"closed form alpha_m*={alpha_closed!r} vs "
            f"bisection {alpha_star!r}")

    mu_m, mu_p, mu_e = p.mu_m, p.mu_p, p.mu_e
    v_sq = mu_m * mu_p + mu_e * (mu_m + mu_p)
    v_star = math.sqrt(v_sq)
    du = _du_dalpha(p, x_star, s_star, v_sq)
    return HopfCertificate(exists=True, alpha_m_star=alpha_star,
                           x_star=x_star, v_star=v_star,
                           c0_star=cap * s_star / (1.0 + s_star),
                           s_star=s_star, du_dalpha=du,
                           gamma=-1 if du > 0.0 else +1)


def transversality(params: GoodwinParameters, cert: HopfCertificate,
                   fd_step: float = 1e-4, rtol: float = 1e-4) -> float:
    """du/dalpha_m at the critical gain, checked against finite differences.

    Evaluates the printed implicit-differentiation formula and compares it
    with a central finite difference of the crossing pair's real part
    across alpha_m*; raises DisagreementError beyond rtol relative
    difference.  Note the printed denominator disagrees with the cubic's
    own |P'(iv)|^2 (see du_dalpha_corrected), so for the flagship
    parameters this check fails by design honesty; transversality_report
    gives all three values without raising.
    """
    if not cert.exists:
        raise NoCriticalPoint("certificate reports no critical point")
    printed, _, fd = transversality_report(params, cert, fd_step)
    if abs(printed - fd) > rtol * abs(printed):
        raise DisagreementError(
            f"transversality formula {printed!r} vs finite diff {fd!r}")
    return printed


def transversality_report(params: GoodwinParameters, cert: HopfCertificate,
                          fd_step: float = 1e-4):
    """(printed formula, corrected formula, finite difference) at alpha_m*."""
    if not cert.exists:
        raise NoCriticalPoint("certificate reports no critical point")
    v_sq = cert.v_star ** 2
    printed = _du_dalpha(params, cert.x_star, cert.s_star, v_sq)
    corrected = du_dalpha_corrected(params, cert.x_star, cert.s_star, v_sq)
    up = _max_real_part(params, cert.alpha_m_star + fd_step)
    dn = _max_real_part(params, cert.alpha_m_star - fd_step)
    fd = (up - dn) / (2.0 * fd_step)
    return printed, corrected, fd


def hill_slope_max(h: int) -> float:
    """Closed form h0: sup over t>0 of h*t^(h-1)/(1+t^h)^2."""
    t_h = 1.0 - 2.0 / (h + 1)
    return h * t_h ** ((h - 1) / h) / (1.0 + (h - 1) / (h + 1)) ** 2


def lipschitz_constants(params: GoodwinParameters) -> LipschitzBundle:
    """Lipschitz constants of (f, g) and the Hill slope bound h0.

    L_f = max{mu_m, mu_p, mu_e, alpha_p, alpha_e, alpha_m*h0/z_tilde};
    L_g = c since the delay map is linear with coefficient c in each
    argument.
    """
    h0 = hill_slope_max(params.h)
    L_f = max(params.mu_m, params.mu_p, params.mu_e,
              params.alpha_p, params.alpha_e,
              params.alpha_m * h0 / params.z_tilde)
    return LipschitzBundle(L_f=L_f, L_g=params.c, h0=h0)


def lemma41_residual(params: GoodwinParameters, x: float, alpha_m: float):
    """Residuals of the printed critical system, exactly as printed.

    r1 = (mu_m+mu_p)(mu_e+mu_p)(mu_e+mu_m)
         - h*alpha_m^3/(z_tilde^h mu_m^2) * k^(h-1) * x^(h-3)
    r2 = mu_m*x - alpha_m/(1 + (k*x/z_tilde)^h)

    Diagnostic only; the critical-point search does not use this system.
    """
    if x <= 0.0 or alpha_m <= 0.0:
        raise ValueError("x and alpha_m must be positive")
    h = params.h
    k = _k_ratio(params)
    rhs1 = (h * alpha_m ** 3 / (params.z_tilde ** h * params.mu_m ** 2)
            * k ** (h - 1) * x ** (h - 3))
    r1 = _c0_crit(params) - rhs1
    r2 = params.mu_m * x - alpha_m / (1.0 + (k * x / params.z_tilde) ** h)
    return r1, r2


def lemma41_paper_solution(params: GoodwinParameters):
    """(x, alpha_m) solving the printed critical system, by bisection.

    The printed system reduces to the monotone scalar equation
    x^h * (1 + (k*x/z_tilde)^h)^3 = c0_crit / ((h*mu_m/z_tilde^h) *
    (k/z_tilde)^(h-1)); alpha_m then follows from the equilibrium
    relation.  Returned so the printed system's residual can be checked
    at its own solution.
    """
    h = params.h
    k = _k_ratio(params)
    zt = params.z_tilde
    target = _c0_crit(params) / (
        (h * params.mu_m / zt ** h) * (k / zt) ** (h - 1))

    def phi(x):
        return x ** h * (1.0 + (k * x / zt) ** h) ** 3 - target

    lo, hi = 1e-12, 1.0
    while phi(hi) < 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise NoCriticalPoint("printed critical system has no root")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if phi(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    s = (k * x / zt) ** h
    alpha_m = params.mu_m * x * (1.0 + s)
    return x, alpha_m
