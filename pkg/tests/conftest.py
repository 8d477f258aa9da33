import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from goodbsq.spectral_core import SpectralField

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def smooth_field(N, seed, mean=0.0, decay=4.0):
    """Real field with exponentially decaying random coefficients."""
    rng = np.random.default_rng(seed)
    n = np.arange(-N, N + 1)
    c = np.exp(-np.abs(n) / decay) * (rng.normal(size=n.size) + 1j * rng.normal(size=n.size))
    c = 0.5 * (c + np.conj(c[::-1]))
    c[N] = mean
    return SpectralField(N, c, True)


def random_complex(N, seed, mean_zero=False):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=2 * N + 1) + 1j * rng.normal(size=2 * N + 1)
    if mean_zero:
        c[N] = 0.0
    return SpectralField(N, c, False)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
