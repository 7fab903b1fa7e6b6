"""Closed-form theory for partial-DFT reconstruction.

Covers the statistics of the zero-filled DFT under random sample removal,
coherence / spark / restricted-isometry diagnostics of the partial DFT
matrix, the output SNR of sparse reconstruction with additive noise, and
the error of K-sparse reconstruction applied to a nonsparse signal.

Energies of DFT coefficients are in the standard convention (a component of
amplitude A has coefficient N*A), unless stated otherwise.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .linalg import batched_cholesky_solve, hermitian_eigen_extremes
from .recovery import InstanceTooLargeError, ranked_bins
from .signals import SamplingMask
from .transform import partial_matrix

SPARK_MAX_COLS = 20
RIP_GUARD = 10**5


def _check_m(n_len: int, m_avail: int) -> None:
    if not 1 <= m_avail <= n_len:
        raise ValueError(f"number of available samples must be in [1, {n_len}], got {m_avail}")


def _spread(n_len: int, m_avail: int) -> float:
    # variance of a sum of M unit phasors drawn without replacement from N
    return m_avail * (n_len - m_avail) / (n_len - 1) if n_len > 1 else 0.0


def missing_noise_variance(
    amplitudes: Sequence[float], n_len: int, m_avail: int, at_component: Optional[int] = None
) -> float:
    """Variance of the zero-filled DFT value caused by the missing samples.

    With ``at_component=None`` this is the variance at a bin carrying no
    component, ``sum_p |A_p|^2 M (N-M)/(N-1)``. At the bin of component ``p``
    that component's own term drops out.
    """
    _check_m(n_len, m_avail)
    a2 = np.abs(np.asarray(amplitudes, dtype=complex)) ** 2
    total = float(np.sum(a2))
    if at_component is not None:
        total -= float(a2[at_component])
    return max(total, 0.0) * _spread(n_len, m_avail)


@dataclass(frozen=True)
class MissingNoiseModel:
    n_len: int
    m_avail: int
    amplitudes: tuple
    mean_at_component: tuple
    var_noise_bin: float
    var_component_bin: tuple

    def as_dict(self) -> dict:
        return {
            "n_len": self.n_len,
            "m_avail": self.m_avail,
            "amplitudes": list(self.amplitudes),
            "mean_at_component": list(self.mean_at_component),
            "var_noise_bin": self.var_noise_bin,
            "var_component_bin": list(self.var_component_bin),
        }


def missing_noise_model(amplitudes: Sequence[float], n_len: int, m_avail: int) -> MissingNoiseModel:
    """Gaussian model of the zero-filled DFT: means ``M A_p`` and the variances above."""
    amps = tuple(float(abs(a)) for a in amplitudes)
    return MissingNoiseModel(
        n_len=n_len,
        m_avail=m_avail,
        amplitudes=amps,
        mean_at_component=tuple(m_avail * a for a in amps),
        var_noise_bin=missing_noise_variance(amps, n_len, m_avail),
        var_component_bin=tuple(missing_noise_variance(amps, n_len, m_avail, p) for p in range(len(amps))),
    )


def welch_ratio(n_len: int, m_avail: int) -> float:
    """Noise standard deviation over a unit component's peak, ``sqrt((N-M)/(M(N-1)))``."""
    _check_m(n_len, m_avail)
    if m_avail == n_len:
        return 0.0
    return math.sqrt((n_len - m_avail) / (m_avail * (n_len - 1)))


def coherence(mask: SamplingMask) -> float:
    """Largest normalized inner product between two columns of the partial DFT matrix.

    Only frequency differences matter, so it is the max over ``d = 1..N-1``
    of ``|sum_{n in mask} exp(-j 2 pi n d / N)| / M``.
    """
    n_len, m = mask.n_len, mask.m
    if m == n_len:
        return 0.0  # columns of the full DFT are exactly orthogonal
    d = np.arange(1, n_len)
    prod = np.remainder(np.multiply.outer(mask.indices, d), n_len)
    sums = np.exp(-2j * np.pi * prod / n_len).sum(axis=0)
    return float(np.max(np.abs(sums)) / m)


def spark_brute_force(a, max_cols: int = SPARK_MAX_COLS) -> int:
    """Smallest number of linearly dependent columns; ``cols + 1`` if none are."""
    a = np.asarray(a, dtype=complex)
    rows, cols = a.shape
    if cols > max_cols:
        raise InstanceTooLargeError(f"spark brute force is limited to {max_cols} columns, got {cols}")
    gram = a.conj().T @ a
    for s in range(1, cols + 1):
        if s > rows:
            return s
        block = np.array(list(itertools.combinations(range(cols), s)), dtype=np.int64)
        g = gram[block[:, :, None], block[:, None, :]]
        norms = np.diagonal(g, axis1=1, axis2=2).real
        if np.any(norms.min(axis=1) == 0):
            return s
        _, ok = batched_cholesky_solve(g, np.zeros(g.shape[:2], dtype=complex))
        if not ok.all():
            return s
    return cols + 1


def spark_sparsity_bound(mu: float) -> float:
    """``(1 + 1/mu) / 2``: sparsity K must stay below this for guaranteed detection."""
    if not mu >= 0:
        raise ValueError(f"coherence must be >= 0, got {mu}")
    if mu == 0:
        return math.inf
    return 0.5 * (1.0 + 1.0 / mu)


def rip_constant_brute_force(mask: SamplingMask, s: int, guard: int = RIP_GUARD) -> float:
    """Restricted isometry constant of order ``s`` by scanning all s-column subsets.

    Columns use unit-magnitude entries and are normalized by their energy M.
    """
    n_len, m = mask.n_len, mask.m
    if not 1 <= s <= m:
        raise ValueError(f"order s must be in [1, {m}], got {s}")
    count = math.comb(n_len, s)
    if count > guard:
        raise InstanceTooLargeError(f"C({n_len}, {s}) = {count} subsets exceeds the guard of {guard}")
    if m == n_len:
        return 0.0
    unit = partial_matrix(mask, range(n_len)).entries * n_len
    gram = (unit.conj().T @ unit) / m
    np.fill_diagonal(gram, 1.0)  # every entry has unit magnitude, so column energy is exactly M
    delta = 0.0
    for subset in itertools.combinations(range(n_len), s):
        idx = np.array(subset)
        lo, hi = hermitian_eigen_extremes(gram[np.ix_(idx, idx)])
        delta = max(delta, hi - 1.0, 1.0 - lo)
    return delta


def snr_output_theory(snr_in_db: float, k: int, m_avail: int) -> float:
    """Output SNR of K-sparse reconstruction from M noisy samples: ``SNR_i + 10 log10(M/K)``."""
    if not 1 <= k <= m_avail:
        raise ValueError(f"need 1 <= K <= M, got K={k}, M={m_avail}")
    return snr_in_db + 10.0 * math.log10(m_avail / k)


@dataclass(frozen=True)
class TheoremPrediction:
    error_energy: float
    snr_db: float
    delta_snr_db: float
    missing_term: float = 0.0
    noise_term: float = 0.0
    top_energy: float = 0.0


def _db(num: float, den: float) -> float:
    if den == 0:
        return math.inf if num > 0 else 0.0
    if num == 0:
        return -math.inf
    return 10.0 * math.log10(num / den)


def nonsparse_error_theory(spectrum, k: int, m_avail: int, noise_var: float) -> TheoremPrediction:
    """Predicted error of a K-sparse reconstruction applied to an arbitrary spectrum.

    ``spectrum`` is the full-data DFT. With ``A_i = |X(i)|/N`` and the sum over
    the coefficients outside the K largest,
    ``error = K N (N-M)/M sum A_i^2 + (K/M) N^2 sigma^2``. ``snr_db`` compares
    it to the energy of the K largest coefficients; ``delta_snr_db`` is the
    change relative to the noise-free prediction.
    """
    X = np.asarray(spectrum, dtype=complex)
    n_len = X.size
    if not 1 <= k <= m_avail <= n_len:
        raise ValueError(f"need 1 <= K <= M <= N, got K={k}, M={m_avail}, N={n_len}")
    if noise_var < 0:
        raise ValueError("noise variance must be >= 0")
    order = ranked_bins(X)
    top, tail = order[:k], order[k:]
    amp_tail = np.abs(X[tail]) / n_len
    missing = k * n_len * (n_len - m_avail) / m_avail * float(np.sum(amp_tail**2))
    noise = k / m_avail * n_len**2 * noise_var
    error = missing + noise
    top_energy = float(np.sum(np.abs(X[top]) ** 2))
    return TheoremPrediction(
        error_energy=error,
        snr_db=_db(top_energy, error),
        delta_snr_db=_db(missing, error) if error > 0 else 0.0,
        missing_term=missing,
        noise_term=noise,
        top_energy=top_energy,
    )


def schwartz_error_bound(spectrum, k: int, m_avail: int) -> tuple[float, float]:
    """Noise-free error norm and its l1 upper bound, ``(predicted, bound)``.

    The predicted norm is ``sqrt(K (N-M)/M * N sum A_i^2)`` over the tail
    amplitudes; the bound is ``sqrt((N-M)/M * K/(N-K)) * sum |X(i)|`` over
    the tail coefficients.
    """
    X = np.asarray(spectrum, dtype=complex)
    n_len = X.size
    if not 1 <= k < n_len or not 1 <= m_avail <= n_len:
        raise ValueError("need 1 <= K < N and 1 <= M <= N")
    tail = ranked_bins(X)[k:]
    amp = np.abs(X[tail]) / n_len
    ratio = (n_len - m_avail) / m_avail
    predicted = math.sqrt(k * ratio * n_len * float(np.sum(amp**2)))
    bound = math.sqrt(ratio * k / (n_len - k)) * float(np.sum(np.abs(X[tail])))
    return predicted, bound


def snr_between(reference, estimate, support: Sequence[int]) -> float:
    """``10 log10(sum |ref|^2 / sum |ref - est|^2)`` over ``support``; +inf on a perfect match."""
    ref = np.asarray(reference, dtype=complex)
    est = np.asarray(estimate, dtype=complex)
    if ref.shape != est.shape:
        raise ValueError("reference and estimate must have equal lengths")
    idx = np.asarray(list(support), dtype=np.int64)
    sig = float(np.sum(np.abs(ref[idx]) ** 2))
    err = float(np.sum(np.abs(ref[idx] - est[idx]) ** 2))
    return _db(sig, err)
