"""Sparse multicomponent signals, additive complex noise and random sampling masks.

Time signals are plain complex ``numpy`` arrays of length N. Randomness is
always driven by an explicit integer seed (or a ``numpy.random.Generator``)
so that every draw is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

SeedLike = Union[int, np.random.Generator]


@dataclass(frozen=True)
class ComponentSpec:
    """One complex exponential ``amplitude * exp(j 2 pi n k / N)``."""

    frequency_index: int
    amplitude: complex


@dataclass(frozen=True)
class NoiseSpec:
    """Circular complex Gaussian noise; ``variance`` is the total complex variance."""

    variance: float

    def __post_init__(self):
        if not np.isfinite(self.variance) or self.variance < 0:
            raise ValueError(f"noise variance must be a finite value >= 0, got {self.variance}")


@dataclass(frozen=True, eq=False)
class SamplingMask:
    """Sorted, distinct indices of the available samples out of ``n_len``."""

    indices: np.ndarray
    n_len: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        if self.n_len < 1:
            raise ValueError("ambient length must be >= 1")
        if idx.size < 1 or idx.size > self.n_len:
            raise ValueError(f"mask size must be in [1, {self.n_len}], got {idx.size}")
        if idx.min() < 0 or idx.max() >= self.n_len:
            raise ValueError(f"mask indices must lie in [0, {self.n_len})")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("mask indices must be strictly increasing")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @property
    def m(self) -> int:
        return int(self.indices.size)

    def __len__(self) -> int:
        return self.m

    def __eq__(self, other):
        if not isinstance(other, SamplingMask):
            return NotImplemented
        return self.n_len == other.n_len and np.array_equal(self.indices, other.indices)

    def __hash__(self):
        return hash((self.n_len, self.indices.tobytes()))

    @property
    def missing(self) -> np.ndarray:
        """Indices of the unavailable samples."""
        return np.setdiff1d(np.arange(self.n_len), self.indices)

    @classmethod
    def from_indices(cls, indices: Iterable[int], n_len: int) -> "SamplingMask":
        idx = np.asarray(list(indices), dtype=np.int64)
        if np.unique(idx).size != idx.size:
            raise ValueError("mask indices must be distinct")
        return cls(np.sort(idx), n_len)

    @classmethod
    def from_missing(cls, missing: Iterable[int], n_len: int) -> "SamplingMask":
        """Build the mask of the complement of ``missing``."""
        miss = np.asarray(list(missing), dtype=np.int64)
        if miss.size and (miss.min() < 0 or miss.max() >= n_len):
            raise ValueError(f"missing indices must lie in [0, {n_len})")
        if np.unique(miss).size != miss.size:
            raise ValueError("missing indices must be distinct")
        return cls(np.setdiff1d(np.arange(n_len), miss), n_len)

    @classmethod
    def full(cls, n_len: int) -> "SamplingMask":
        return cls(np.arange(n_len), n_len)


def make_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def trial_rng(master_seed: int, trial: int, *stream: int) -> np.random.Generator:
    """Independent generator for one Monte Carlo trial.

    Depends only on ``(master_seed, trial, *stream)``, never on the order in
    which trials are executed. ``stream`` separates e.g. the cells of a sweep.
    """
    key = [int(master_seed), int(trial), *(int(s) for s in stream)]
    return np.random.default_rng(np.random.SeedSequence(key))


def synthesize_sparse_signal(components: Sequence[ComponentSpec], n_len: int) -> np.ndarray:
    """Sum of complex exponentials sampled at ``n = 0..N-1``.

    A component with amplitude ``A`` at bin ``k`` has full DFT coefficient
    ``N * A`` at ``k``.
    """
    if n_len < 1:
        raise ValueError("signal length must be >= 1")
    ks = [int(c.frequency_index) for c in components]
    if len(set(ks)) != len(ks):
        raise ValueError(f"duplicate frequency index in {ks}")
    for k in ks:
        if not 0 <= k < n_len:
            raise ValueError(f"frequency index {k} out of range [0, {n_len})")
    n = np.arange(n_len)
    x = np.zeros(n_len, dtype=complex)
    for c in components:
        x += complex(c.amplitude) * np.exp(2j * np.pi * np.remainder(n * c.frequency_index, n_len) / n_len)
    return x


def complex_noise(n_len: int, variance: float, seed: SeedLike) -> np.ndarray:
    """Circular complex Gaussian samples with total variance ``variance``."""
    NoiseSpec(variance)
    rng = make_rng(seed)
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(n_len) + 1j * rng.standard_normal(n_len))


def add_noise(signal: np.ndarray, spec: NoiseSpec, rng_seed: SeedLike) -> np.ndarray:
    x = np.asarray(signal, dtype=complex)
    if spec.variance == 0:
        return x.copy()
    return x + complex_noise(x.size, spec.variance, rng_seed)


def random_mask(n_len: int, m: int, rng_seed: SeedLike) -> SamplingMask:
    """Draw ``m`` distinct indices uniformly from ``range(n_len)``."""
    if m < 1:
        raise ValueError(f"mask size must be >= 1, got {m}")
    if m > n_len:
        raise ValueError(f"mask size {m} exceeds signal length {n_len}")
    rng = make_rng(rng_seed)
    idx = rng.choice(n_len, size=m, replace=False)
    return SamplingMask(np.sort(idx), n_len)


def apply_mask(signal: np.ndarray, mask: SamplingMask) -> np.ndarray:
    """Available samples ``y = [x(n_1), ..., x(n_M)]``."""
    x = np.asarray(signal)
    if x.shape != (mask.n_len,):
        raise ValueError(f"signal length {x.size} does not match mask ambient length {mask.n_len}")
    return x[mask.indices].astype(complex)


def geometric_tail_amplitudes(
    leading=(1.0, 0.8, 0.77, 0.75), tail_terms: int = 251, ratio: float = 1 / 3, spread: float = 50.0
) -> np.ndarray:
    """Amplitudes of a nonsparse test signal: a few strong components plus a
    slowly decaying tail ``ratio ** (1 + i / spread)``, ``i = 0..tail_terms-1``.
    """
    tail = ratio ** (1.0 + np.arange(tail_terms) / spread)
    return np.concatenate([np.asarray(leading, dtype=float), tail])
