"""Fixed-step RK4 integration of the delay DAE with per-step delay solving.

Each step advances with classical 4th-order Runge-Kutta; at every stage the
algebraic delay equation is solved against the committed history extended
by the current step's provisional cubic.  When a delayed argument lands
inside the current step, the whole step is iterated to a fixed point of the
dense-output prediction.  In-step lookups are anchored at the stage state,
so a delay that resolves to exactly zero reproduces the classical RK4 update
for the undelayed system bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .delay import (DelaySample, HistoryFunction, _hermite, delay_derivative,
                    solve_delay)
from .errors import InnerIterationDivergence
from .model import ModelDefinition, jacobians

Array = np.ndarray


@dataclass(frozen=True)
class IntegratorConfig:
    """Stepping parameters.

    frozen_lag selects the variant in which the delay equation is explicit,
    tau(t) = g(x(t), x(t - tau_sigma), sigma); tau_sigma must then be set.
    The per-step delay window is [0, tau_prev + window_pad_steps * h_step].
    """

    h_step: float
    inner_tol: float = 1e-12
    max_inner: int = 25
    window_pad_steps: float = 10.0
    frozen_lag: bool = False
    tau_sigma: Optional[float] = None

    def __post_init__(self):
        if self.h_step <= 0.0:
            raise ValueError("h_step must be positive")
        if self.inner_tol <= 0.0:
            raise ValueError("inner_tol must be positive")
        if self.max_inner < 1:
            raise ValueError("max_inner must be >= 1")


@dataclass
class Trajectory:
    """Dense trajectory record with per-node delay samples."""

    t: Array
    x: Array
    xdot: Array
    tau: Array
    tau_dot: Array
    delay_residual: Array
    sigma: float
    config: IntegratorConfig
    history: HistoryFunction
    max_abs_xdot: Array
    max_inner_used: int = 1

    def eval(self, t: float):
        """(x(t), xdot(t)) via the dense cubic record."""
        return self.history.eval(t)

    def delay_samples(self):
        return [DelaySample(t=float(self.t[i]), tau=float(self.tau[i]),
                            tau_dot=float(self.tau_dot[i]),
                            residual=float(self.delay_residual[i]))
                for i in range(len(self.t))]


class _StageView:
    """History extended over the current step, anchored at a stage state.

    For query times a <= step start the committed history answers.  For
    a in the current step the value is anchor + (dense(a) - dense(s_stage)),
    which is exactly the anchor when a == s_stage; the `used` flag records
    whether any answer actually depended on the provisional cubic.
    """

    __slots__ = ("hist", "t0", "t1", "x0", "xd0", "x1", "xd1",
                 "s_stage", "anchor", "used")

    def __init__(self, hist, t0, t1, x0, xd0, x1, xd1):
        self.hist = hist
        self.t0 = t0
        self.t1 = t1
        self.x0 = x0
        self.xd0 = xd0
        self.x1 = x1
        self.xd1 = xd1
        self.s_stage = t0
        self.anchor = x0
        self.used = False

    def set_stage(self, s, state):
        self.s_stage = s
        self.anchor = state

    def _dense(self, a):
        return _hermite(self.t0, self.t1, self.x0, self.xd0,
                        self.x1, self.xd1, a)

    def eval(self, a):
        if a <= self.t0:
            return self.hist.eval(a)
        if a > self.t1:
            raise ValueError(
                f"advanced argument t={a!r} beyond current step end "
                f"{self.t1!r} (negative delay)")
        if a == self.s_stage:
            _, xd = self._dense(a)
            return self.anchor, xd
        self.used = True
        xa, xda = self._dense(a)
        xs, _ = self._dense(self.s_stage)
        return self.anchor + (xa - xs), xda


def _as_prehistory(initial_history, t0: float, dim: int):
    """Normalize the initial-history argument to (x0, prehistory_callable)."""
    if isinstance(initial_history, np.ndarray) or isinstance(
            initial_history, (list, tuple)):
        x0 = np.array(initial_history, dtype=float)
        zeros = np.zeros_like(x0)

        def pre(t):
            return x0, zeros

        return x0, pre
    if hasattr(initial_history, "eval"):
        x0 = np.asarray(initial_history.eval(t0)[0], dtype=float)

        def pre(t):
            return initial_history.eval(t)

        return x0, pre
    if callable(initial_history):
        fn = initial_history
        x0 = np.asarray(fn(t0), dtype=float)

        def pre(t, _h=1e-6):
            xt = np.asarray(fn(t), dtype=float)
            xd = (np.asarray(fn(t + _h), dtype=float)
                  - np.asarray(fn(t - _h), dtype=float)) / (2.0 * _h)
            return xt, xd

        return x0, pre
    raise TypeError("initial_history must be an array, callable, or "
                    "object with .eval")


def integrate(model: ModelDefinition, sigma: float, initial_history,
              span: Sequence[float], config: IntegratorConfig) -> Trajectory:
    """Integrate the delay DAE over the span with fixed-step RK4.

    initial_history supplies x(t) for t <= span[0]: a constant vector, a
    callable t -> x, or an object with .eval(t) -> (x, xdot).
    """
    t0, t1 = float(span[0]), float(span[1])
    if not t1 > t0:
        raise ValueError("span must satisfy t1 > t0")
    frozen = config.frozen_lag
    if frozen and config.tau_sigma is None:
        raise ValueError("frozen_lag requires tau_sigma in the config")
    tau_sigma = config.tau_sigma if frozen else None

    x0, pre = _as_prehistory(initial_history, t0, model.dimension)
    n_steps = max(1, int(round((t1 - t0) / config.h_step)))
    h = (t1 - t0) / n_steps
    pad = config.window_pad_steps * h

    hist = HistoryFunction(t0, x0, np.zeros_like(x0), prehistory=pre)

    g0 = abs(float(model.delay_map(x0, x0, sigma)))
    w_init = max(pad, 4.0 * g0 + pad)

    def node_tau(view_or_hist, t, state, tau_guess, window_hi):
        if frozen:
            xd, _ = view_or_hist.eval(t - tau_sigma)
            tau = float(model.delay_map(state, xd, sigma))
            return tau, 0.0
        if tau_guess == 0.0 and float(
                model.delay_map(state, state, sigma)) == 0.0:
            # x(t - 0) = x(t), so F(0) = -g(x(t), x(t)) = 0 exactly: the
            # tracked root stays at zero (the vanishing-delay regime).
            return 0.0, 0.0
        s = solve_delay(model, view_or_hist, t, sigma, (0.0, window_hi),
                        min(max(tau_guess, 0.0), window_hi),
                        current_state=state, compute_derivative=False)
        return s.tau, s.residual

    def delayed_state(view_or_hist, t, tau, state):
        if tau == 0.0:
            return state
        xd, _ = view_or_hist.eval(t - tau)
        return xd

    def tau_rate(h_view, t, tau, state, deriv):
        if frozen:
            xd, xd_dot = h_view.eval(t - tau_sigma)
            bundle = jacobians(model, state, xd, sigma)
            return float(bundle.d1g @ deriv + bundle.d2g @ xd_dot)
        return delay_derivative(model, h_view, t, tau, sigma,
                                current_state=state, current_deriv=deriv)

    # Initial node: resolve tau(t0) against the pre-history, then the
    # initial derivative.
    tau0, res0 = node_tau(hist, t0, x0, g0, w_init)
    xd0_state = delayed_state(hist, t0, tau0, x0)
    f0 = model.rhs(x0, xd0_state, sigma)
    hist = HistoryFunction(t0, x0, f0, prehistory=pre)
    taud0 = tau_rate(hist, t0, tau0, x0, f0)

    nt = n_steps + 1
    T = np.empty(nt)
    X = np.empty((nt, model.dimension))
    XD = np.empty((nt, model.dimension))
    TAU = np.empty(nt)
    TAUD = np.empty(nt)
    RES = np.empty(nt)
    T[0], X[0], XD[0] = t0, x0, f0
    TAU[0], TAUD[0], RES[0] = tau0, taud0, res0

    max_abs_xdot = np.abs(f0)
    max_inner_used = 1
    tau_prev = tau0
    x, xdot = x0, f0
    t = t0

    for istep in range(n_steps):
        # Constant stage width: keeps the stage arithmetic identical to a
        # classical fixed-step scheme (node times may differ from t + hh
        # by rounding, which only shifts history lookups by ulps).
        tn = t0 + (istep + 1) * h if istep + 1 < n_steps else t1
        hh = h
        window_hi = tau_prev + pad

        x1g = x + hh * xdot      # provisional endpoint (Euler predictor)
        f1g = xdot
        x1_new = x1g
        accepted = False
        for inner in range(config.max_inner):
            view = _StageView(hist, t, tn, x, xdot, x1g, f1g)

            # Stage 1 reuses the node derivative: the stage state equals
            # the node value and tau(t) is already resolved.
            k1 = xdot

            def stage(s, state):
                view.set_stage(s, state)
                tau_s, _ = node_tau(view, s, state, tau_prev, window_hi)
                return model.rhs(state, delayed_state(view, s, tau_s, state),
                                 sigma)

            k2 = stage(t + 0.5 * hh, x + (0.5 * hh) * k1)
            k3 = stage(t + 0.5 * hh, x + (0.5 * hh) * k2)
            k4 = stage(tn, x + hh * k3)
            x1_new = x + (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

            # Endpoint derivative and delay for the dense record.
            view.set_stage(tn, x1_new)
            tau_end, res_end = node_tau(view, tn, x1_new, tau_prev,
                                        window_hi)
            f1_new = model.rhs(x1_new,
                               delayed_state(view, tn, tau_end, x1_new),
                               sigma)

            if not view.used:
                accepted = True
                break
            if (np.max(np.abs(x1_new - x1g))
                    <= config.inner_tol * (1.0 + np.max(np.abs(x1_new)))):
                accepted = True
                break
            x1g, f1g = x1_new, f1_new
        if not accepted:
            raise InnerIterationDivergence(
                f"step at t={t!r} did not reach a dense-output fixed point "
                f"in {config.max_inner} iterations")
        max_inner_used = max(max_inner_used, inner + 1)

        x, xdot, t = x1_new, f1_new, tn
        tau_prev = tau_end
        hist.append(t, x, xdot)
        taud = tau_rate(hist, t, tau_end, x, xdot)
        i = istep + 1
        T[i], X[i], XD[i] = t, x, xdot
        TAU[i], TAUD[i], RES[i] = tau_end, taud, res_end
        max_abs_xdot = np.maximum(max_abs_xdot, np.abs(xdot))

    return Trajectory(t=T, x=X, xdot=XD, tau=TAU, tau_dot=TAUD,
                      delay_residual=RES, sigma=sigma, config=config,
                      history=hist, max_abs_xdot=max_abs_xdot,
                      max_inner_used=max_inner_used)


def integrate_frozen(model: ModelDefinition, sigma: float, initial_history,
                     span: Sequence[float], config: IntegratorConfig,
                     tau_sigma: Optional[float] = None) -> Trajectory:
    """Integrate the frozen-lag variant: tau(t) = g(x(t), x(t - tau_sigma)).

    tau_sigma may be given here or in the config.
    """
    if tau_sigma is None:
        tau_sigma = config.tau_sigma
    if tau_sigma is None:
        raise ValueError("integrate_frozen needs tau_sigma")
    cfg = IntegratorConfig(h_step=config.h_step, inner_tol=config.inner_tol,
                           max_inner=config.max_inner,
                           window_pad_steps=config.window_pad_steps,
                           frozen_lag=True, tau_sigma=tau_sigma)
    return integrate(model, sigma, initial_history, span, cfg)
