import cmath

import numpy as np
import pytest

from sparsedft.experiments import example16_signal, iterative64_signal


def direct_dft(x):
    """Double-loop DFT, independent of the package's vectorized path."""
    n_len = len(x)
    return np.array(
        [sum(x[n] * cmath.exp(-2j * cmath.pi * n * k / n_len) for n in range(n_len)) for k in range(n_len)]
    )


def direct_idft(X):
    n_len = len(X)
    return np.array(
        [sum(X[k] * cmath.exp(2j * cmath.pi * n * k / n_len) for k in range(n_len)) / n_len for n in range(n_len)]
    )


@pytest.fixture
def example16():
    return example16_signal()


@pytest.fixture
def iterative64():
    return iterative64_signal(0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
