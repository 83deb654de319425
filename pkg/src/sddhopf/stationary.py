"""Stationary states (x_sigma, tau_sigma) and the nonsingularity check.

A stationary state solves f(x, x, sigma) = 0 with tau = g(x, x, sigma).
The nonsingularity verdict tests det(d1f + d2f) against a scale-aware
threshold; it is the condition under which the stationary branch is a
locally unique C^1 curve in sigma.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, SingularJacobian
from .model import GoodwinParameters, ModelDefinition, goodwin_model, jacobians

Array = np.ndarray

#: |det(d1f + d2f)| must exceed this times (1 + inf-norm of the sum).
SINGULARITY_RTOL = 1e-10


@dataclass(frozen=True)
class StationaryState:
    x: Array
    tau: float
    sigma: float
    residual_norm: float
    s3_ok: bool
    det_sum: float


def _finalize(model: ModelDefinition, x: Array, sigma: float) -> StationaryState:
    tau = float(model.delay_map(x, x, sigma))
    residual = float(np.linalg.norm(model.rhs(x, x, sigma))
                     + abs(tau - model.delay_map(x, x, sigma)))
    bundle = jacobians(model, x, x, sigma)
    jac_sum = bundle.d1f + bundle.d2f
    det_sum = float(np.linalg.det(jac_sum))
    threshold = SINGULARITY_RTOL * (1.0 + np.linalg.norm(jac_sum, np.inf))
    return StationaryState(x=x, tau=tau, sigma=sigma,
                           residual_norm=residual,
                           s3_ok=abs(det_sum) > threshold,
                           det_sum=det_sum)


def solve_stationary(model: ModelDefinition, sigma: float, guess: Array,
                     tol: float = 1e-12, max_iter: int = 60) -> StationaryState:
    """Newton iteration on x -> f(x, x, sigma) with Jacobian d1f + d2f.

    Raises NoConvergence if the residual stays above tol, SingularJacobian
    if a Newton step is undefined.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    x = np.array(guess, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("guess must be finite")
    for _ in range(max_iter):
        r = model.rhs(x, x, sigma)
        if np.linalg.norm(r) <= tol:
            return _finalize(model, x, sigma)
        bundle = jacobians(model, x, x, sigma)
        jac = bundle.d1f + bundle.d2f
        try:
            step = np.linalg.solve(jac, r)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(
                f"singular stationary Jacobian at sigma={sigma!r}") from exc
        x = x - step
    r = model.rhs(x, x, sigma)
    if np.linalg.norm(r) <= tol:
        return _finalize(model, x, sigma)
    raise NoConvergence(
        f"stationary Newton residual {np.linalg.norm(r):.3e} > tol={tol:.3e}")


def goodwin_stationary(params: GoodwinParameters) -> StationaryState:
    """Unique positive stationary state of the regulatory model.

    x0 is the single positive root (Descartes) of

        mu_m * K^h * x^(h+1) + mu_m * x - alpha_m = 0,
        K = alpha_e*alpha_p / (mu_e*mu_p*z_tilde),

    bracketed on [0, alpha_m/mu_m] and polished by Newton; then
    y = (alpha_p/mu_p) x, z = (alpha_e*alpha_p/(mu_e*mu_p)) x, tau = eps0.
    """
    mu_m, alpha_m, h = params.mu_m, params.alpha_m, params.h
    big_k = params.alpha_e * params.alpha_p / (
        params.mu_e * params.mu_p * params.z_tilde)

    def poly(x):
        return mu_m * (big_k * x) ** h * x + mu_m * x - alpha_m

    def dpoly(x):
        return mu_m * (h + 1) * (big_k * x) ** h + mu_m

    lo, hi = 0.0, alpha_m / mu_m
    # poly(lo) = -alpha_m < 0, poly(hi) >= 0: bisect, then Newton polish.
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if poly(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    x0 = 0.5 * (lo + hi)
    tol = 1e-13 * alpha_m
    for _ in range(50):
        p = poly(x0)
        if abs(p) < tol:
            break
        x0 = x0 - p / dpoly(x0)
    x = np.array([
        x0,
        params.alpha_p / params.mu_p * x0,
        params.alpha_e * params.alpha_p / (params.mu_e * params.mu_p) * x0,
    ])
    return _finalize(goodwin_model(params), x, params.alpha_m)
