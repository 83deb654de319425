import math

import numpy as np
import pytest

from sddhopf import (CallableHistory, HistoryFunction, ModelDefinition,
                     NoRootInWindow, contraction_margin, delay_derivative,
                     goodwin_model, solve_delay)


def scalar_threshold_model(c=0.5, eps0=0.3):
    return ModelDefinition(
        dimension=1,
        rhs=lambda t1, t2, s: -t1,
        delay_map=lambda t1, t2, s: eps0 + c * (t1[0] - t2[0]))


def test_history_hermite_reproduces_cubics():
    # A cubic is represented exactly by cubic Hermite segments.
    def f(t):
        return np.array([2.0 + t - 0.5 * t ** 2 + 0.25 * t ** 3])

    def fd(t):
        return np.array([1.0 - t + 0.75 * t ** 2])

    hist = HistoryFunction(0.0, f(0.0), fd(0.0))
    for t in (0.5, 1.0, 1.5, 2.0):
        hist.append(t, f(t), fd(t))
    for t in (0.12, 0.77, 1.31, 1.99):
        x, xd = hist.eval(t)
        assert x[0] == pytest.approx(f(t)[0], abs=1e-14)
        assert xd[0] == pytest.approx(fd(t)[0], abs=1e-13)


def test_history_prehistory_and_bounds():
    hist = HistoryFunction(0.0, np.array([2.0]), np.array([0.0]))
    hist.append(1.0, np.array([3.0]), np.array([0.0]))
    x, xd = hist.eval(-5.0)         # constant extension below the record
    assert x[0] == 2.0 and xd[0] == 0.0
    with pytest.raises(ValueError):
        hist.eval(1.5)
    with pytest.raises(ValueError):
        hist.append(0.5, np.array([0.0]), np.array([0.0]))


def test_solve_delay_constant_history():
    model = scalar_threshold_model(c=0.5, eps0=0.3)
    hist = CallableHistory(lambda t: [1.0], lambda t: [0.0])
    s = solve_delay(model, hist, 0.0, 0.0, (0.0, 5.0), 0.1)
    # constant history: g = eps0 exactly.
    assert s.tau == pytest.approx(0.3, abs=1e-12)
    assert s.residual < 1e-12
    assert s.tau_dot == pytest.approx(0.0, abs=1e-12)


def test_solve_delay_linear_history():
    # x(t) = t: tau = eps0 + c*tau implies tau = eps0/(1-c).
    model = scalar_threshold_model(c=0.5, eps0=0.3)
    hist = CallableHistory(lambda t: [t], lambda t: [1.0])
    s = solve_delay(model, hist, 2.0, 0.0, (0.0, 5.0), 0.0)
    assert s.tau == pytest.approx(0.6, rel=1e-12)
    # tau_dot = (c*1 - c*1)/(1 - c) = 0 for a uniform slope; the Jacobians
    # here come from finite differences, hence the loose zero tolerance.
    assert s.tau_dot == pytest.approx(0.0, abs=1e-9)


def test_delay_derivative_formula():
    # x(t) = sin t, g = eps0 + c(x(t) - x(t-tau)); compare the implicit
    # derivative against a finite difference of the solved delay path.
    model = scalar_threshold_model(c=0.4, eps0=0.2)
    hist = CallableHistory(lambda t: [math.sin(t)],
                           lambda t: [math.cos(t)])

    def tau_at(t):
        return solve_delay(model, hist, t, 0.0, (0.0, 3.0), 0.2).tau

    t0, dt = 1.3, 1e-6
    fd = (tau_at(t0 + dt) - tau_at(t0 - dt)) / (2.0 * dt)
    s = solve_delay(model, hist, t0, 0.0, (0.0, 3.0), 0.2)
    td = delay_derivative(model, hist, t0, s.tau, 0.0)
    assert td == pytest.approx(fd, rel=1e-7)
    assert td == pytest.approx(s.tau_dot, rel=1e-12)


def test_root_counting_multiple_roots():
    # Steep delayed dependence produces three sign changes in the window.
    model = ModelDefinition(dimension=1,
                            rhs=lambda t1, t2, s: -t1,
                            delay_map=lambda t1, t2, s: t2[0])
    hist = CallableHistory(lambda t: [1.0 + 0.5 * math.sin(3.0 * t)],
                           lambda t: [1.5 * math.cos(3.0 * t)])
    s = solve_delay(model, hist, 0.0, 0.0, (0.0, 3.0), 0.4,
                    count_roots=True)
    assert s.root_count_in_window == 3
    assert s.residual < 1e-12


def test_no_root_in_window():
    model = scalar_threshold_model(c=0.0, eps0=2.0)  # tau = 2 always
    hist = CallableHistory(lambda t: [1.0], lambda t: [0.0])
    with pytest.raises(NoRootInWindow):
        solve_delay(model, hist, 0.0, 0.0, (0.0, 1.0), 0.5)


def test_window_validation():
    model = scalar_threshold_model()
    hist = CallableHistory(lambda t: [1.0], lambda t: [0.0])
    with pytest.raises(ValueError):
        solve_delay(model, hist, 0.0, 0.0, (0.0, 1.0), 2.0)


def test_contraction_margin_goodwin(equal_rates):
    model = goodwin_model(equal_rates)
    hist = CallableHistory(lambda t: [1.0, 1.0, 1.0],
                           lambda t: [0.2, 0.1, 0.0])
    margin = contraction_margin(model, hist, 2.0, (0.0, 1.0))
    # |d2g| = (c, 0, 0) pairs only with the first derivative component.
    assert margin == pytest.approx(equal_rates.c * 0.2, rel=1e-12)
    assert margin < 1.0
