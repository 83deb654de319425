"""Characteristic matrix, Goodwin eigenvalues, and contour crossing numbers.

The characteristic matrix of the formally linearized system is

    Delta(omega) = omega*I - d1f - d2f * exp(-omega * tau)

evaluated at a stationary state.  Crossing numbers are differences of
winding degrees of det Delta over a rectangle in the right half plane,
computed just below and just above the critical parameter.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import BoundaryZero, NoConvergence
from .model import GoodwinParameters, ModelDefinition, jacobians
from .stationary import StationaryState, solve_stationary

Array = np.ndarray

#: min boundary modulus below this times the max boundary modulus is a zero.
BOUNDARY_ZERO_RTOL = 1e-12


@dataclass(frozen=True)
class CharacteristicContext:
    """Frozen data needed to evaluate det Delta at a stationary state."""

    d1f: Array
    d2f: Array
    tau: float
    sigma: float


@dataclass(frozen=True)
class ContourRectangle:
    """Rectangle (alpha_lo, alpha_hi) x (beta_lo, beta_hi) in the omega plane.

    delta is the parameter offset used when comparing degrees at
    sigma0 - delta and sigma0 + delta.
    """

    alpha_lo: float
    alpha_hi: float
    beta_lo: float
    beta_hi: float
    delta: float = 1e-3

    def __post_init__(self):
        if not (self.alpha_lo < self.alpha_hi and self.beta_lo < self.beta_hi):
            raise ValueError("rectangle must have positive extent")
        if self.delta <= 0.0:
            raise ValueError("delta must be positive")

    def corners(self):
        return [
            complex(self.alpha_lo, self.beta_lo),
            complex(self.alpha_hi, self.beta_lo),
            complex(self.alpha_hi, self.beta_hi),
            complex(self.alpha_lo, self.beta_hi),
        ]


@dataclass(frozen=True)
class CrossingReport:
    gamma_minus: int
    gamma_plus: int
    gamma: int
    boundary_min_modulus: float
    refinement_depth: int


def characteristic_context(model: ModelDefinition,
                           st: StationaryState) -> CharacteristicContext:
    bundle = jacobians(model, st.x, st.x, st.sigma)
    return CharacteristicContext(d1f=bundle.d1f, d2f=bundle.d2f,
                                 tau=st.tau, sigma=st.sigma)


def char_det(ctx: CharacteristicContext, omega: complex) -> complex:
    """det(omega*I - d1f - d2f*exp(-omega*tau)) via complex LU."""
    n = ctx.d1f.shape[0]
    mat = (omega * np.eye(n, dtype=complex)
           - ctx.d1f
           - ctx.d2f * cmath.exp(-omega * ctx.tau))
    return complex(np.linalg.det(mat))


def goodwin_loop_gain(params: GoodwinParameters, z: float) -> float:
    """Constant term added to the cubic: alpha_p*alpha_e*|Hill'(z)|.

    This is the full negative-feedback loop gain of the linearization;
    it reduces to the bare Hill derivative when alpha_p = alpha_e = 1.
    """
    h, zt = params.h, params.z_tilde
    if z == 0.0:
        return 0.0
    s = (z / zt) ** h
    return params.alpha_p * params.alpha_e * h * params.alpha_m * s / (
        z * (1.0 + s) ** 2)


def goodwin_eigenvalues(params: GoodwinParameters,
                        st: StationaryState) -> Array:
    """Roots of (lam+mu_m)(lam+mu_p)(lam+mu_e) + c0 = 0, c0 the loop gain.

    Computed from the companion eigenproblem; sorted by descending real
    part (ties by descending imaginary part).
    """
    mu = (params.mu_m, params.mu_p, params.mu_e)
    c0 = goodwin_loop_gain(params, float(st.x[2]))
    coeffs = [
        1.0,
        mu[0] + mu[1] + mu[2],
        mu[0] * mu[1] + mu[0] * mu[2] + mu[1] * mu[2],
        mu[0] * mu[1] * mu[2] + c0,
    ]
    roots = np.roots(coeffs)
    order = np.lexsort((-roots.imag, -roots.real))
    return roots[order]


def _edge_arg_change(f: Callable[[complex], complex], z0: complex, z1: complex,
                     f0: complex, f1: complex, depth: int, max_depth: int,
                     stats: dict) -> float:
    stats["min_mod"] = min(stats["min_mod"], abs(f0), abs(f1))
    stats["max_mod"] = max(stats["max_mod"], abs(f0), abs(f1))
    if f0 == 0 or f1 == 0:
        raise BoundaryZero(f"det vanishes on contour at {z0} or {z1}")
    d = cmath.phase(f1 / f0)
    if abs(d) < 0.5 * math.pi:
        stats["depth"] = max(stats["depth"], depth)
        return d
    if depth >= max_depth:
        raise NoConvergence(
            f"argument increment {d:.3f} >= pi/2 at max depth {max_depth}")
    zm = 0.5 * (z0 + z1)
    fm = f(zm)
    return (_edge_arg_change(f, z0, zm, f0, fm, depth + 1, max_depth, stats)
            + _edge_arg_change(f, zm, z1, fm, f1, depth + 1, max_depth, stats))


#: Uniform boundary subdivision per edge before adaptive refinement; fine
#: enough that near-boundary zeros at the default parameter offset need only
#: a few extra halvings.
INITIAL_SPLITS = 1024


def _winding(detfn: Callable[[complex], complex], rect: ContourRectangle,
             max_depth: int):
    """Winding degree plus boundary diagnostics (min modulus, depth used)."""
    corners = rect.corners()
    stats = {"min_mod": math.inf, "max_mod": 0.0, "depth": 0}
    total = 0.0
    initial_splits = INITIAL_SPLITS
    for i in range(4):
        z0, z1 = corners[i], corners[(i + 1) % 4]
        pts = [z0 + (z1 - z0) * k / initial_splits
               for k in range(initial_splits + 1)]
        vals = [detfn(z) for z in pts]
        for k in range(initial_splits):
            total += _edge_arg_change(detfn, pts[k], pts[k + 1],
                                      vals[k], vals[k + 1],
                                      0, max_depth, stats)
    if stats["min_mod"] < BOUNDARY_ZERO_RTOL * stats["max_mod"]:
        raise BoundaryZero(
            f"boundary modulus {stats['min_mod']:.3e} below threshold")
    turns = total / (2.0 * math.pi)
    degree = int(round(turns))
    if abs(turns - degree) > 1e-6:
        raise NoConvergence(f"winding total {turns!r} is not an integer")
    return degree, stats["min_mod"], stats["depth"]


def winding_degree(detfn: Callable[[complex], complex],
                   rect: ContourRectangle, max_depth: int = 12) -> int:
    """Zero count of an analytic function inside the rectangle.

    Total argument change of detfn along the positively oriented boundary
    divided by 2*pi, with adaptive segment refinement until every
    argument increment is below pi/2.
    """
    degree, _, _ = _winding(detfn, rect, max_depth)
    return degree


def crossing_number(model: ModelDefinition, sigma0: float, beta0: float,
                    rect: ContourRectangle, guess: Optional[Array] = None,
                    max_depth: int = 12, tol: float = 1e-12) -> CrossingReport:
    """gamma = gamma_minus - gamma_plus over the rectangle.

    gamma_pm is the winding degree of det Delta at the stationary state for
    sigma0 +/- rect.delta.  beta0 documents the imaginary-axis candidate
    the rectangle brackets; the rectangle itself fixes the contour.
    """
    degrees = {}
    min_mod = math.inf
    depth = 0
    for sign in (-1.0, +1.0):
        sigma = sigma0 + sign * rect.delta
        if guess is not None:
            g = np.asarray(guess, dtype=float)
        elif model.stationary_guess is not None:
            g = np.asarray(model.stationary_guess(sigma), dtype=float)
        else:
            raise ValueError("crossing_number needs a stationary guess")
        st = solve_stationary(model, sigma, g, tol=tol)
        ctx = characteristic_context(model, st)
        deg, mm, dep = _winding(lambda w: char_det(ctx, w), rect, max_depth)
        degrees[sign] = deg
        min_mod = min(min_mod, mm)
        depth = max(depth, dep)
    return CrossingReport(gamma_minus=degrees[-1.0], gamma_plus=degrees[+1.0],
                          gamma=degrees[-1.0] - degrees[+1.0],
                          boundary_min_modulus=min_mod,
                          refinement_depth=depth)


def default_delta(sigma0: float) -> float:
    """Scale-aware default parameter offset for crossing numbers."""
    return 1e-3 * max(1.0, abs(sigma0))
