"""Scalar algebraic delay solver against a dense trajectory history.

Solves tau = g(x(t), x(t - tau), sigma) for tau at a fixed time t, using
damped Newton with the implicit derivative 1 + d2g . xdot(t - tau) and a
bracketing-bisection fallback, and differentiates the relation to obtain
tau_dot.  A contraction diagnostic certifies uniqueness of the root.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import (AmbiguousRoot, NoConvergence, NoRootInWindow,
                     SingularImplicitDerivative)
from .model import ModelDefinition, jacobians

Array = np.ndarray

#: Relative residual tolerance for an accepted delay root.
RESIDUAL_RTOL = 1e-12
#: |F'| below this triggers the bisection fallback.
DERIVATIVE_FLOOR = 1e-8
#: Window scan resolution for root counting / bracketing.
SCAN_POINTS = 1000


class HistoryFunction:
    """Piecewise cubic-Hermite record of x(t) and xdot(t).

    Segments are appended in time order; evaluation below t_min follows the
    pre-history rule (constant extension of the earliest value by default,
    or a user-supplied callable t -> (x, xdot)).
    """

    def __init__(self, t0: float, x0: Array, xdot0: Array,
                 prehistory: Optional[Callable[[float],
                                               Tuple[Array, Array]]] = None):
        self._t = [float(t0)]
        self._x = [np.array(x0, dtype=float)]
        self._xd = [np.array(xdot0, dtype=float)]
        self.prehistory = prehistory

    @property
    def t_min(self) -> float:
        return self._t[0]

    @property
    def t_current(self) -> float:
        return self._t[-1]

    def append(self, t: float, x: Array, xdot: Array) -> None:
        if t <= self._t[-1]:
            raise ValueError("history times must be strictly increasing")
        self._t.append(float(t))
        self._x.append(np.array(x, dtype=float))
        self._xd.append(np.array(xdot, dtype=float))

    def eval(self, t: float) -> Tuple[Array, Array]:
        """(x(t), xdot(t)); cubic Hermite inside, pre-history rule below."""
        ts = self._t
        if t < ts[0]:
            if self.prehistory is not None:
                x, xd = self.prehistory(t)
                return np.asarray(x, dtype=float), np.asarray(xd, dtype=float)
            return self._x[0].copy(), np.zeros_like(self._x[0])
        if t >= ts[-1]:
            if t == ts[-1]:
                return self._x[-1].copy(), self._xd[-1].copy()
            raise ValueError(f"t={t!r} beyond history end {ts[-1]!r}")
        i = bisect.bisect_right(ts, t) - 1
        return _hermite(ts[i], ts[i + 1], self._x[i], self._xd[i],
                        self._x[i + 1], self._xd[i + 1], t)

    def node_times(self) -> Array:
        return np.array(self._t)


def _hermite(t0, t1, x0, xd0, x1, xd1, t):
    h = t1 - t0
    s = (t - t0) / h
    s2 = s * s
    s3 = s2 * s
    h00 = 2.0 * s3 - 3.0 * s2 + 1.0
    h10 = s3 - 2.0 * s2 + s
    h01 = -2.0 * s3 + 3.0 * s2
    h11 = s3 - s2
    x = h00 * x0 + (h10 * h) * xd0 + h01 * x1 + (h11 * h) * xd1
    d00 = (6.0 * s2 - 6.0 * s) / h
    d10 = 3.0 * s2 - 4.0 * s + 1.0
    d01 = (-6.0 * s2 + 6.0 * s) / h
    d11 = 3.0 * s2 - 2.0 * s
    xd = d00 * x0 + d10 * xd0 + d01 * x1 + d11 * xd1
    return x, xd


class CallableHistory:
    """Adapter exposing (x(t), xdot(t)) from plain callables, for tests
    and synthetic histories."""

    def __init__(self, x_fn: Callable[[float], Array],
                 xdot_fn: Callable[[float], Array],
                 t_min: float = -np.inf, t_current: float = np.inf):
        self.x_fn = x_fn
        self.xdot_fn = xdot_fn
        self.t_min = t_min
        self.t_current = t_current

    def eval(self, t: float) -> Tuple[Array, Array]:
        return (np.atleast_1d(np.asarray(self.x_fn(t), dtype=float)),
                np.atleast_1d(np.asarray(self.xdot_fn(t), dtype=float)))


@dataclass(frozen=True)
class DelaySample:
    t: float
    tau: float
    tau_dot: float
    residual: float
    root_count_in_window: Optional[int] = None


def _resolve_current(history, t, current_state):
    if current_state is not None:
        return np.asarray(current_state, dtype=float)
    return history.eval(t)[0]


def delay_derivative(model: ModelDefinition, history, t: float, tau: float,
                     sigma: float, current_state: Optional[Array] = None,
                     current_deriv: Optional[Array] = None) -> float:
    """tau_dot from implicit differentiation of tau = g(x(t), x(t-tau)).

    tau_dot = (d1g.xdot(t) + d2g.xdot(t-tau)) / (1 + d2g.xdot(t-tau)).
    The numerator keeps the delayed term that the chain rule produces.
    """
    cur = _resolve_current(history, t, current_state)
    if current_deriv is not None:
        cur_dot = np.asarray(current_deriv, dtype=float)
    else:
        cur_dot = history.eval(t)[1]
    xd, xd_dot = history.eval(t - tau)
    bundle = jacobians(model, cur, xd, sigma)
    inner = float(bundle.d2g @ xd_dot)
    denom = 1.0 + inner
    if abs(denom) < 1e-10:
        raise SingularImplicitDerivative(
            f"1 + d2g.xdot(t-tau) = {denom!r} at t={t!r}")
    return (float(bundle.d1g @ cur_dot) + inner) / denom


def _count_roots(F, lo, hi, n=SCAN_POINTS):
    taus = np.linspace(lo, hi, n + 1)
    vals = np.array([F(t) for t in taus])
    signs = np.sign(vals)
    count = 0
    for i in range(n):
        if signs[i] == 0.0:
            if i == 0 or signs[i - 1] != 0.0:
                count += 1
        elif signs[i] * signs[i + 1] < 0.0:
            count += 1
    if signs[-1] == 0.0 and (n == 0 or signs[-2] != 0.0):
        count += 1
    return count, taus, vals


def solve_delay(model: ModelDefinition, history, t: float, sigma: float,
                window: Sequence[float], guess: float,
                current_state: Optional[Array] = None,
                current_deriv: Optional[Array] = None,
                count_roots: bool = False,
                compute_derivative: bool = True,
                max_iter: int = 60) -> DelaySample:
    """Root of F(tau) = tau - g(x(t), x(t-tau), sigma) in the window.

    Damped Newton from the guess with derivative 1 + d2g.xdot(t-tau);
    bisection on a bracketing sub-interval when the Newton step leaves the
    window or the derivative is tiny.  With count_roots, the window is
    scanned at SCAN_POINTS resolution and the sign-change count reported.
    """
    lo, hi = float(window[0]), float(window[1])
    if not (np.isfinite(lo) and np.isfinite(hi) and lo <= guess <= hi):
        raise ValueError("window must be finite with lo <= guess <= hi")
    cur = _resolve_current(history, t, current_state)

    def F(tau):
        xd, _ = history.eval(t - tau)
        return tau - float(model.delay_map(cur, xd, sigma))

    def tol(tau):
        return RESIDUAL_RTOL * (1.0 + abs(tau))

    tau = float(guess)
    newton_ok = True
    converged = False
    for _ in range(max_iter):
        Fv = F(tau)
        if abs(Fv) <= tol(tau):
            converged = True
            break
        xd, xd_dot = history.eval(t - tau)
        bundle = jacobians(model, cur, xd, sigma)
        Fp = 1.0 + float(bundle.d2g @ xd_dot)
        if abs(Fp) < DERIVATIVE_FLOOR:
            newton_ok = False
            break
        tau_new = tau - Fv / Fp
        if not (lo <= tau_new <= hi):
            newton_ok = False
            break
        tau = tau_new

    if not converged:
        if newton_ok:
            # Newton ran out of iterations without leaving the window.
            raise NoConvergence(f"delay Newton stalled at tau={tau!r}")
        tau = _bisect_fallback(F, lo, hi, tol)

    count = None
    if count_roots:
        count, _, _ = _count_roots(F, lo, hi)
        if count > 1 and not converged:
            raise AmbiguousRoot(
                f"{count} roots in window and the guess does not select one")

    residual = abs(F(tau))
    if compute_derivative:
        tau_dot = delay_derivative(model, history, t, tau, sigma,
                                   current_state=cur,
                                   current_deriv=current_deriv)
    else:
        tau_dot = float("nan")
    return DelaySample(t=t, tau=tau, tau_dot=tau_dot, residual=residual,
                       root_count_in_window=count)


def _bisect_fallback(F, lo, hi, tol, n=256):
    taus = np.linspace(lo, hi, n + 1)
    vals = [F(x) for x in taus]
    bracket = None
    for i in range(n):
        if vals[i] == 0.0:
            return taus[i]
        if vals[i] * vals[i + 1] < 0.0:
            bracket = (taus[i], taus[i + 1], vals[i])
            break
    if bracket is None:
        if vals[-1] == 0.0:
            return taus[-1]
        raise NoRootInWindow(
            f"F has constant sign on window [{lo!r}, {hi!r}]")
    a, b, fa = bracket
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = F(mid)
        if abs(fm) <= tol(mid):
            return mid
        if fa * fm < 0.0:
            b = mid
        else:
            a, fa = mid, fm
    mid = 0.5 * (a + b)
    if abs(F(mid)) <= 10.0 * tol(mid):
        return mid
    raise NoConvergence("bisection fallback did not meet the delay tolerance")


def contraction_margin(model: ModelDefinition, history, sigma: float,
                       window: Sequence[float], samples: int = 512) -> float:
    """Uniqueness margin sup|d2g| . sup|xdot| over the time window.

    Componentwise Hoelder pairing: sum_j sup_t|d2g_j| * sup_t|xdot_j(t)|.
    Values below 1 certify a unique delay root and the differentiability
    regime of the delay function (for the Goodwin map: c * sup|xdot_1|).
    """
    lo, hi = float(window[0]), float(window[1])
    ts = np.linspace(lo, hi, samples)
    n = model.dimension
    sup_d2g = np.zeros(n)
    sup_xd = np.zeros(n)
    for t in ts:
        x, xd = history.eval(t)
        bundle = jacobians(model, x, x, sigma)
        sup_d2g = np.maximum(sup_d2g, np.abs(np.ravel(bundle.d2g)))
        sup_xd = np.maximum(sup_xd, np.abs(xd))
    return float(np.dot(sup_d2g, sup_xd))
