import numpy as np
import pytest

from sddhopf import GoodwinParameters


@pytest.fixture
def equal_rates():
    """Equal-rate parameter set: all rates 1, gain 2, Hill exponent 10."""
    return GoodwinParameters(mu_m=1.0, mu_p=1.0, mu_e=1.0, alpha_m=2.0,
                             alpha_p=1.0, alpha_e=1.0, c=0.1, z_tilde=1.0,
                             h=10, eps0=0.0)


@pytest.fixture
def equal_rates_h2(equal_rates):
    import dataclasses
    return dataclasses.replace(equal_rates, h=2)
