"""DFT conventions and partial DFT measurement matrices.

Convention used throughout the package::

    synthesis  psi_k(n) = exp(+j 2 pi n k / N) / N
    analysis   phi_k(n) = exp(-j 2 pi n k / N)

so ``X(k) = sum_n x(n) phi_k(n)`` and a component of amplitude ``A`` at bin
``k`` has full-data coefficient ``N * A``. Spectra are complex ``numpy``
arrays of length N.

All products are direct matrix-vector sums; N is small enough (and often
prime, e.g. 257) that an FFT buys nothing here.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .signals import SamplingMask


@lru_cache(maxsize=64)
def _roots(n_len: int) -> np.ndarray:
    roots = np.exp(2j * np.pi * np.arange(n_len) / n_len)
    roots.setflags(write=False)
    return roots


def _phase(n: np.ndarray, k: np.ndarray, n_len: int, sign: int) -> np.ndarray:
    """``exp(sign * j 2 pi n k / N)`` as an outer product table."""
    # n*k is reduced mod N in integers, so the phase stays exact for large indices
    prod = np.remainder(np.multiply.outer(np.asarray(n, dtype=np.int64), np.asarray(k, dtype=np.int64)), n_len)
    table = _roots(n_len)[prod]
    return table if sign > 0 else table.conj()


@dataclass(frozen=True, eq=False)
class MeasurementMatrix:
    """Rows of the synthesis basis at the available instants.

    ``entries[i, c] = exp(j 2 pi n_i k_c / N) / N``.
    """

    entries: np.ndarray
    row_instants: np.ndarray
    column_frequencies: np.ndarray
    n_len: int

    @property
    def shape(self):
        return self.entries.shape

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


def full_dft(signal: np.ndarray) -> np.ndarray:
    """``X(k) = sum_n x(n) exp(-j 2 pi n k / N)``."""
    x = np.asarray(signal, dtype=complex)
    n = np.arange(x.size)
    return _phase(n, n, x.size, -1).T @ x


def inverse_dft(spectrum: np.ndarray) -> np.ndarray:
    """``x(n) = (1/N) sum_k X(k) exp(j 2 pi n k / N)``."""
    X = np.asarray(spectrum, dtype=complex)
    k = np.arange(X.size)
    return _phase(k, k, X.size, +1) @ X / X.size


def _check_frequencies(frequencies: Sequence[int], n_len: int) -> np.ndarray:
    ks = np.asarray(list(frequencies), dtype=np.int64).reshape(-1)
    if np.unique(ks).size != ks.size:
        raise ValueError(f"duplicate frequency index in {ks.tolist()}")
    if ks.size and (ks.min() < 0 or ks.max() >= n_len):
        raise ValueError(f"frequency index out of range [0, {n_len})")
    return ks


def partial_matrix(mask: SamplingMask, frequencies: Sequence[int]) -> MeasurementMatrix:
    """Measurement matrix restricted to ``mask`` rows and ``frequencies`` columns."""
    ks = _check_frequencies(frequencies, mask.n_len)
    entries = _phase(mask.indices, ks, mask.n_len, +1) / mask.n_len
    entries.setflags(write=False)
    return MeasurementMatrix(entries, mask.indices, ks, mask.n_len)


def initial_estimate(y: np.ndarray, mask: SamplingMask, frequencies: Optional[Sequence[int]] = None) -> np.ndarray:
    """DFT of the available samples with the missing ones taken as zero.

    Equal to ``N * A^H y`` for the full partial matrix ``A``. Pass
    ``frequencies`` to evaluate only those bins.
    """
    y = np.asarray(y, dtype=complex)
    if y.shape != (mask.m,):
        raise ValueError(f"got {y.size} samples for a mask of size {mask.m}")
    k = np.arange(mask.n_len) if frequencies is None else np.asarray(frequencies, dtype=np.int64)
    return _phase(mask.indices, k, mask.n_len, -1).T @ y


def synthesize_at(spectrum: np.ndarray, mask: SamplingMask) -> np.ndarray:
    """Inverse DFT of ``spectrum`` evaluated only at the mask instants."""
    X = np.asarray(spectrum, dtype=complex)
    nz = np.flatnonzero(X)
    if nz.size == 0:
        return np.zeros(mask.m, dtype=complex)
    return _phase(mask.indices, nz, mask.n_len, +1) @ X[nz] / mask.n_len
