import numpy as np
import pytest

from cvteleport import _backend


@pytest.fixture(params=_backend.available_backends())
def backend(request):
    """Run the test once per kernel backend, restoring the default afterwards."""
    previous = _backend.active_backend()
    _backend.use_backend(request.param)
    yield request.param
    _backend.use_backend(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(rng, N, support):
    amps = np.zeros(N, dtype=np.complex128)
    amps[:support] = rng.normal(size=support) + 1j * rng.normal(size=support)
    return amps / np.linalg.norm(amps)
