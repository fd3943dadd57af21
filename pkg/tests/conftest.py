import numpy as np
import pytest

from tls_spectro import SystemParams


@pytest.fixture
def generic_params():
    """A representative coupled, dissipative, driven parameter set."""
    return SystemParams(
        nu_q=7.0,
        nu_tls=7.15,
        U=0.2,
        g=0.02,
        T1_q=5000.0,
        Tphi_q=2000.0,
        T1_tls=3000.0,
        Tphi_tls=10000.0,
        A=0.02,
    )


@pytest.fixture
def lossless_params():
    """Coupled but effectively dissipation-free (huge T times)."""
    return SystemParams(
        nu_q=7.0,
        nu_tls=7.0,
        U=0.2,
        g=0.01,
        T1_q=1e12,
        Tphi_q=1e12,
        T1_tls=1e12,
        Tphi_tls=1e12,
        A=0.0,
    )


def random_params(rng: np.random.Generator, A: float = 0.02) -> SystemParams:
    """Independent draw over the sampling ranges, for property tests."""
    return SystemParams(
        nu_q=7.0,
        nu_tls=rng.uniform(6.75, 7.25),
        U=rng.uniform(0.15, 0.3),
        g=rng.uniform(0.005, 0.05),
        T1_q=rng.uniform(1000, 10000),
        Tphi_q=rng.uniform(500, 5000),
        T1_tls=rng.uniform(500, 10000),
        Tphi_tls=rng.uniform(500, 20000),
        A=A,
    )
