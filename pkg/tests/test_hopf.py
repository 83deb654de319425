import dataclasses
import math

import numpy as np
import pytest

from sddhopf import (ContourRectangle, DisagreementError, NoCriticalPoint,
                     crossing_number, du_dalpha_corrected, find_critical,
                     gain_c0, goodwin_model, hill_slope_max,
                     lemma41_paper_solution, lemma41_residual,
                     lipschitz_constants, transversality,
                     transversality_report)


def test_gain_direct_values(equal_rates, equal_rates_h2):
    c0, _ = gain_c0(equal_rates, 4.0 ** 0.1)
    assert c0 == pytest.approx(8.0, rel=1e-12)
    c0_h2, _ = gain_c0(equal_rates_h2, 1.0)
    assert c0_h2 == pytest.approx(1.0, rel=1e-12)
    tiny, _ = gain_c0(equal_rates, 1e-8)
    assert tiny < 1e-70


def test_critical_point_equal_rates(equal_rates):
    cert = find_critical(equal_rates)
    assert cert.exists
    assert cert.s_star == pytest.approx(4.0, rel=1e-12)
    assert cert.alpha_m_star == pytest.approx(5.0 * 4.0 ** 0.1, abs=1e-8)
    assert cert.x_star == pytest.approx(4.0 ** 0.1, abs=1e-8)
    assert cert.v_star == pytest.approx(math.sqrt(3.0), abs=1e-10)
    assert cert.c0_star == pytest.approx(8.0, rel=1e-10)
    assert cert.du_dalpha > 0.0
    assert cert.gamma == -1


def test_no_critical_point_below_threshold(equal_rates):
    for h in (2, 4, 6, 8):
        cert = find_critical(dataclasses.replace(equal_rates, h=h))
        assert not cert.exists
        assert cert.gamma == 0


def test_transversality_report_values(equal_rates):
    cert = find_critical(equal_rates)
    printed, corrected, fd = transversality_report(equal_rates, cert)
    assert printed == pytest.approx(0.0171961, abs=1e-6)
    assert printed > 0.0
    # The corrected denominator reproduces the slope of the crossing pair;
    # the printed one does not.
    assert corrected == pytest.approx(fd, rel=1e-6)
    assert abs(printed - fd) > 0.2 * abs(fd)


def test_transversality_strict_check_raises(equal_rates):
    cert = find_critical(equal_rates)
    with pytest.raises(DisagreementError):
        transversality(equal_rates, cert)


def test_transversality_requires_certificate(equal_rates_h2):
    cert = find_critical(equal_rates_h2)
    with pytest.raises(NoCriticalPoint):
        transversality(equal_rates_h2, cert)
    with pytest.raises(NoCriticalPoint):
        transversality_report(equal_rates_h2, cert)


def test_crossing_sign_link_random_parameters(equal_rates):
    rng = np.random.default_rng(11)
    for h in (10, 12, 14):
        for _ in (0, 1):
            p = dataclasses.replace(
                equal_rates, h=h,
                mu_m=1.0 + 0.05 * rng.uniform(-1, 1),
                mu_p=1.0 + 0.05 * rng.uniform(-1, 1),
                mu_e=1.0 + 0.05 * rng.uniform(-1, 1),
                alpha_p=1.0 + 0.05 * rng.uniform(-1, 1),
                alpha_e=1.0 + 0.05 * rng.uniform(-1, 1))
            cert = find_critical(p)
            assert cert.exists
            _, corrected, fd = transversality_report(p, cert)
            assert corrected == pytest.approx(fd, rel=1e-4)
            assert corrected > 0.0
            rect = ContourRectangle(0.0, 0.5, cert.v_star - 0.5,
                                    cert.v_star + 0.5, delta=1e-3)
            rep = crossing_number(goodwin_model(p), cert.alpha_m_star,
                                  cert.v_star, rect)
            assert rep.gamma == -1


def test_hill_slope_closed_form_vs_grid():
    ts = np.linspace(1e-5, 3.0, 300001)
    for h in (2, 4, 6, 8, 10):
        grid_max = np.max(h * ts ** (h - 1) / (1.0 + ts ** h) ** 2)
        assert hill_slope_max(h) == pytest.approx(grid_max, abs=1e-4)
    assert hill_slope_max(2) == pytest.approx(9.0 / (8.0 * math.sqrt(3.0)),
                                              rel=1e-12)
    assert hill_slope_max(10) == pytest.approx(2.525171, abs=1e-5)


def test_lipschitz_constants(equal_rates_h2):
    lip = lipschitz_constants(equal_rates_h2)
    assert lip.L_g == equal_rates_h2.c
    assert lip.L_f == pytest.approx(2.0 * hill_slope_max(2), rel=1e-12)
    assert lip.L_f == pytest.approx(1.299038, abs=1e-6)


def test_closed_form_system_residuals(equal_rates):
    cert = find_critical(equal_rates)
    r1, r2 = lemma41_residual(equal_rates, cert.x_star, cert.alpha_m_star)
    assert abs(r2) < 1e-12          # equilibrium relation holds
    assert abs(r1) > 1.0            # the printed first equation does not
    x_p, a_p = lemma41_paper_solution(equal_rates)
    r1p, r2p = lemma41_residual(equal_rates, x_p, a_p)
    assert abs(r1p) < 1e-10
    assert abs(r2p) < 1e-12
