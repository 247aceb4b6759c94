import numpy as np
import pytest

from trizero import locus

SQRT2 = np.sqrt(2.0)


@pytest.fixture(scope="session")
def ref1():
    """First reference parameter point: tau0 = sqrt(2)."""
    return locus(1.0, 0.0)


@pytest.fixture(scope="session")
def ref2():
    """Second reference parameter point: tau0 = (1 + sqrt(5)) / 2."""
    return locus(2.0, 1.0)


@pytest.fixture(scope="session")
def both_refs(ref1, ref2):
    return (ref1, ref2)
