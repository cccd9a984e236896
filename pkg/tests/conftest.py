import numpy as np
import pytest

from assouadlab.harness import SuiteContext


@pytest.fixture(scope="session")
def ctx():
    """One shared estimate cache for the whole run.

    Count tables on the 1e4-point suite sets cost seconds each; everything
    cached here is a pure function of the suite tables, so sharing across
    test modules cannot change any result.
    """
    return SuiteContext()


@pytest.fixture
def rng():
    return np.random.default_rng(0)
