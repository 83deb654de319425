"""Model definitions: a generic state-dependent-delay DAE and the Goodwin instance.

The abstract object is the pair of maps

    xdot(t) = f(x(t), x(t - tau(t)), sigma)
    tau(t)  = g(x(t), x(t - tau(t)), sigma)

together with Jacobian access.  The concrete instance is a three-state
negative-feedback (Goodwin-type) regulatory model whose delay is of
threshold type, tau = eps0 + c*(x(t) - x(t - tau)).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import NonFiniteJacobian

Array = np.ndarray


@dataclass(frozen=True)
class JacobianBundle:
    """Partial derivatives of (f, g) at one evaluation point.

    d1f, d2f are N x N; d1g, d2g are length-N row vectors.
    """

    d1f: Array
    d2f: Array
    d1g: Array
    d2g: Array
    theta1: Array
    theta2: Array
    sigma: float


@dataclass(frozen=True)
class ModelDefinition:
    """A state-dependent-delay DAE given by rhs f and delay map g.

    Parameters
    ----------
    dimension : int
        State dimension N >= 1.
    rhs : callable
        f(theta1, theta2, sigma) -> ndarray of shape (N,).
    delay_map : callable
        g(theta1, theta2, sigma) -> float (time units).
    jacobian : callable, optional
        Analytic Jacobian provider with the same signature as `jacobians`;
        when absent, central finite differences are used.
    fd_step : float
        Relative step for the finite-difference fallback.
    stationary_guess : callable, optional
        sigma -> initial guess for the stationary solver.  Used by routines
        that must solve stationary states at shifted parameter values.
    """

    dimension: int
    rhs: Callable[[Array, Array, float], Array]
    delay_map: Callable[[Array, Array, float], float]
    jacobian: Optional[Callable[[Array, Array, float], JacobianBundle]] = None
    fd_step: float = 1e-6
    stationary_guess: Optional[Callable[[float], Array]] = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("model dimension must be >= 1")


def jacobians(model: ModelDefinition, theta1: Array, theta2: Array,
              sigma: float) -> JacobianBundle:
    """Evaluate d1f, d2f, d1g, d2g at (theta1, theta2, sigma).

    Uses the model's analytic callback when present, otherwise central
    finite differences with step max(fd_step, fd_step*|component|).
    Raises NonFiniteJacobian if any entry is not finite.
    """
    theta1 = np.asarray(theta1, dtype=float)
    theta2 = np.asarray(theta2, dtype=float)
    if model.jacobian is not None:
        bundle = model.jacobian(theta1, theta2, sigma)
    else:
        bundle = _fd_jacobians(model, theta1, theta2, sigma)
    for mat in (bundle.d1f, bundle.d2f, bundle.d1g, bundle.d2g):
        if not np.all(np.isfinite(mat)):
            raise NonFiniteJacobian(
                f"non-finite Jacobian entry at sigma={sigma!r}")
    return bundle


def _fd_jacobians(model: ModelDefinition, theta1: Array, theta2: Array,
                  sigma: float) -> JacobianBundle:
    n = model.dimension
    d1f = np.empty((n, n))
    d2f = np.empty((n, n))
    d1g = np.empty(n)
    d2g = np.empty(n)
    for j in range(n):
        h1 = max(model.fd_step, model.fd_step * abs(theta1[j]))
        e = np.zeros(n)
        e[j] = h1
        d1f[:, j] = (model.rhs(theta1 + e, theta2, sigma)
                     - model.rhs(theta1 - e, theta2, sigma)) / (2.0 * h1)
        d1g[j] = (model.delay_map(theta1 + e, theta2, sigma)
                  - model.delay_map(theta1 - e, theta2, sigma)) / (2.0 * h1)
        h2 = max(model.fd_step, model.fd_step * abs(theta2[j]))
        e[j] = h2
        d2f[:, j] = (model.rhs(theta1, theta2 + e, sigma)
                     - model.rhs(theta1, theta2 - e, sigma)) / (2.0 * h2)
        d2g[j] = (model.delay_map(theta1, theta2 + e, sigma)
                  - model.delay_map(theta1, theta2 - e, sigma)) / (2.0 * h2)
    return JacobianBundle(d1f=d1f, d2f=d2f, d1g=d1g, d2g=d2g,
                          theta1=theta1, theta2=theta2, sigma=sigma)


# ---------------------------------------------------------------------------
# Goodwin instance
# ---------------------------------------------------------------------------

_PARAM_KEYS = ("mu_m", "mu_p", "mu_e", "alpha_m", "alpha_p", "alpha_e",
               "c", "z_tilde", "h", "eps0")


@dataclass(frozen=True)
class GoodwinParameters:
    """Parameters of the three-state regulatory model with threshold delay.

    mu_* are nonnegative degradation rates (1/time); alpha_* are positive
    gains; c (time per concentration) and z_tilde (concentration) are
    positive; h is a positive even integer; eps0 >= 0 is the constant part
    of the delay (eps0 = 0 gives a delay that vanishes at stationary states).
    """

    mu_m: float
    mu_p: float
    mu_e: float
    alpha_m: float
    alpha_p: float
    alpha_e: float
    c: float
    z_tilde: float
    h: int
    eps0: float = 0.0

    def __post_init__(self):
        for name in ("mu_m", "mu_p", "mu_e"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")
        for name in ("alpha_m", "alpha_p", "alpha_e", "c", "z_tilde"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.eps0 < 0.0:
            raise ValueError("eps0 must be nonnegative")
        if int(self.h) != self.h or self.h <= 0 or self.h % 2 != 0:
            raise ValueError("h must be a positive even integer")

    @classmethod
    def from_dict(cls, d: dict) -> "GoodwinParameters":
        return cls(**{k: d[k] for k in _PARAM_KEYS})

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in _PARAM_KEYS}

    def with_alpha_m(self, alpha_m: float) -> "GoodwinParameters":
        return replace(self, alpha_m=alpha_m)


def hill_derivative(params: GoodwinParameters, z: float) -> float:
    """|d/dz of alpha_m / (1 + (z/z_tilde)^h)| at z >= 0."""
    h = params.h
    zt = params.z_tilde
    s = (z / zt) ** h
    if z == 0.0:
        return 0.0
    return h * params.alpha_m * s / (z * (1.0 + s) ** 2)


def goodwin_rhs(state: Array, delayed_state: Array,
                params: GoodwinParameters) -> Array:
    """Right-hand side of the regulatory model."""
    x, y, z = state
    xd, yd, zd = delayed_state
    return np.array([
        -params.mu_m * x
        + params.alpha_m / (1.0 + (zd / params.z_tilde) ** params.h),
        -params.mu_p * y + params.alpha_p * xd,
        -params.mu_e * z + params.alpha_e * yd,
    ])


def goodwin_delay_map(state: Array, delayed_state: Array,
                      params: GoodwinParameters) -> float:
    """Threshold delay eps0 + c*(x - x_delayed)."""
    return params.eps0 + params.c * (state[0] - delayed_state[0])


def goodwin_jacobians(params: GoodwinParameters, theta1: Array, theta2: Array,
                      sigma: Optional[float] = None) -> JacobianBundle:
    """Analytic Jacobian bundle of the regulatory model.

    If sigma is given it overrides params.alpha_m (the bifurcation
    parameter of the flagship analysis).
    """
    p = params if sigma is None else params.with_alpha_m(sigma)
    zd = theta2[2]
    if zd == 0.0:
        hp = 0.0
    else:
        s = (zd / p.z_tilde) ** p.h
        hp = p.h * p.alpha_m * s / (zd * (1.0 + s) ** 2)
    d1f = np.diag([-p.mu_m, -p.mu_p, -p.mu_e]).astype(float)
    d2f = np.array([
        [0.0, 0.0, -hp],
        [p.alpha_p, 0.0, 0.0],
        [0.0, p.alpha_e, 0.0],
    ])
    d1g = np.array([p.c, 0.0, 0.0])
    d2g = np.array([-p.c, 0.0, 0.0])
    return JacobianBundle(d1f=d1f, d2f=d2f, d1g=d1g, d2g=d2g,
                          theta1=np.asarray(theta1, dtype=float),
                          theta2=np.asarray(theta2, dtype=float),
                          sigma=p.alpha_m)


def goodwin_model(params: GoodwinParameters) -> ModelDefinition:
    """Wrap the Goodwin instance as a ModelDefinition with sigma = alpha_m.

    The scalar parameter sigma of the generic interface is identified with
    the gain alpha_m, the bifurcation parameter of the flagship analysis.
    """
    mu_m, mu_p, mu_e = params.mu_m, params.mu_p, params.mu_e
    alpha_p, alpha_e = params.alpha_p, params.alpha_e
    c, z_tilde, h, eps0 = params.c, params.z_tilde, params.h, params.eps0

    def rhs(theta1, theta2, sigma):
        return np.array([
            -mu_m * theta1[0] + sigma / (1.0 + (theta2[2] / z_tilde) ** h),
            -mu_p * theta1[1] + alpha_p * theta2[0],
            -mu_e * theta1[2] + alpha_e * theta2[1],
        ])

    def delay_map(theta1, theta2, sigma):
        return eps0 + c * (theta1[0] - theta2[0])

    def jacobian(theta1, theta2, sigma):
        return goodwin_jacobians(params, theta1, theta2, sigma=sigma)

    def stationary_guess(sigma):
        from .stationary import goodwin_stationary
        st = goodwin_stationary(params.with_alpha_m(sigma))
        return st.x

    return ModelDefinition(dimension=3, rhs=rhs, delay_map=delay_map,
                           jacobian=jacobian,
                           stationary_guess=stationary_guess)
