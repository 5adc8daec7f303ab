import pytest

from magspec.core import BoundaryCondition
from magspec.oscillator import OscillatorGrid, SpectrumCache


@pytest.fixture(scope="session")
def grid():
    return OscillatorGrid()


@pytest.fixture(scope="session")
def caches(grid):
    """Shared eigensolver caches so tests reuse each other's solves."""
    store = {}

    def get(bc: BoundaryCondition) -> SpectrumCache:
        c = store.get(bc.label)
        if c is None:
            c = SpectrumCache(bc, grid)
            store[bc.label] = c
        return c

    return get


@pytest.fixture(scope="session")
def bc_d():
    return BoundaryCondition.dirichlet()


@pytest.fixture(scope="session")
def bc_n():
    return BoundaryCondition.neumann()
