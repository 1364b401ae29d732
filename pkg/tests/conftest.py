import pytest

from toda_hydro.kernels import KernelSet


@pytest.fixture(scope="session")
def kern():
    """Shared kernel set at the default operating point (beta, theta) = (1, 0.25)."""
    return KernelSet.build(1.0, 0.25)
