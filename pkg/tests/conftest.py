import math

import numpy as np
import pytest

from latmon.core.config import settings
from latmon.services.lattice import get_shell_table
from latmon.services.orthofam import FourierField, orthonormalize


@pytest.fixture(autouse=True)
def setup_test_env(monkeypatch):
    """Run every test without an on-disk cache and with sequential fuzzing"""
    monkeypatch.setattr(settings, "CACHE_DIR", None)
    monkeypatch.setattr(settings, "FUZZ_WORKERS", 1)
    monkeypatch.setattr(settings, "DEFAULT_TOL", 1e-10)


@pytest.fixture
def shells_2d():
    """r_2(k) for k <= 400"""
    return get_shell_table(2, 400)


@pytest.fixture
def shells_3d():
    """r_3(k) for k <= 400"""
    return get_shell_table(3, 400)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def cosine_field():
    """phi(x) = 2 cos x_1"""
    return FourierField(np.array([[1, 0], [-1, 0]]), np.array([1.0, 1.0]), real_valued=True)


@pytest.fixture
def single_mode_family(cosine_field):
    """n = 1, m = 1 family spanned by cos x_1; its coefficient is 1/(4 pi)"""
    return orthonormalize([cosine_field], m=1.0)


def _bessel_oracle(p: float, m: float, shells) -> float:
    """2D I_p(m) from the Bessel series with scipy's K_nu"""
    from scipy import special

    k = np.flatnonzero(shells.counts)
    t = 2.0 * math.pi * m * np.sqrt(k.astype(float))
    terms = shells.counts[k] * t ** (p - 1.0) * special.kv(p - 1.0, t)
    coefficient = 4.0 * (p - 1.0) / (2.0**p * math.gamma(p))
    return 1.0 - (p - 1.0) / (math.pi * m * m) + coefficient * float(np.sum(terms))


def _cubic_p2_oracle(m: float, shells) -> float:
    """
    3D I_2(m) = pi^2 (1 + sum_{k != 0} e^{-2 pi m |k|}) - m^{-3}, from Poisson summation
    of (m^2 + |x|^2)^{-2}, whose Fourier transform is pi^2 e^{-2 pi m |xi|} / m.
    """
    k = np.flatnonzero(shells.counts)
    series = float(np.sum(shells.counts[k] * np.exp(-2.0 * math.pi * m * np.sqrt(k.astype(float)))))
    return math.pi**2 * (1.0 + series) - m**-3


@pytest.fixture
def bessel_oracle():
    return _bessel_oracle


@pytest.fixture
def cubic_p2_oracle():
    return _cubic_p2_oracle
