"""Reconstruction of DFT-sparse signals from a subset of their samples.

Four procedures share the same least-squares core:

* :func:`recover_known_support` - LS fit on a given set of frequency bins.
* :func:`recover_one_step` - pick bins from the zero-filled DFT, then LS.
* :func:`recover_iterative` - detect the strongest bin of the residual,
  refit over all detected bins, repeat until the residual ratio drops
  below ``epsilon``.
* :func:`recover_exhaustive` - try every K-subset of bins (reference oracle,
  only for small N).

Ties in bin magnitude are broken in favour of the smaller frequency index.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .linalg import SingularSystemError, batched_cholesky_solve, hermitian_product, least_squares_solve
from .signals import SamplingMask
from .transform import initial_estimate, partial_matrix, synthesize_at

DEFAULT_EPSILON = 1e-5
EXHAUSTIVE_GUARD = 10**6


class RecoveryError(ValueError):
    """Base class for recovery precondition failures."""


class OversizedSupportError(RecoveryError):
    pass


class EmptySupportError(RecoveryError):
    pass


class InstanceTooLargeError(RecoveryError):
    pass


@dataclass(frozen=True)
class SupportSelection:
    """How the one-step algorithm picks candidate bins from the initial estimate.

    ``mode`` is ``"threshold"`` (keep ``|X(k)| > value``), ``"top_k"`` (keep the
    ``value`` largest) or ``"top_m"`` (keep as many bins as there are samples).
    """

    mode: str
    value: Optional[float] = None

    def __post_init__(self):
        if self.mode == "threshold":
            if self.value is None or not self.value > 0:
                raise ValueError("threshold must be > 0")
        elif self.mode == "top_k":
            if self.value is None or int(self.value) != self.value or self.value < 1:
                raise ValueError("top_k count must be an integer >= 1")
        elif self.mode != "top_m":
            raise ValueError(f"unknown selection mode {self.mode!r}")

    @classmethod
    def threshold(cls, level: float) -> "SupportSelection":
        return cls("threshold", float(level))

    @classmethod
    def top_k(cls, count: int) -> "SupportSelection":
        return cls("top_k", int(count))

    @classmethod
    def top_m(cls) -> "SupportSelection":
        return cls("top_m")


@dataclass
class RecoveryResult:
    support: list[int]
    spectrum: np.ndarray
    iterations: int
    residual_ratio: float
    converged: bool
    method: str = ""
    residual_trace: list[float] = field(default_factory=list)
    detection_order: list[int] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "method": self.method,
            "support": [int(k) for k in self.support],
            "detection_order": [int(k) for k in self.detection_order],
            "iterations": int(self.iterations),
            "residual_ratio": float(self.residual_ratio),
            "residual_trace": [float(r) for r in self.residual_trace],
            "converged": bool(self.converged),
        }


def _check_y(y, mask: SamplingMask) -> np.ndarray:
    y = np.asarray(y, dtype=complex).reshape(-1)
    if y.size != mask.m:
        raise ValueError(f"got {y.size} samples for a mask of size {mask.m}")
    return y


def ranked_bins(values: np.ndarray) -> np.ndarray:
    """Bin indices by decreasing magnitude, smaller index first on ties."""
    mag = np.abs(values)
    return np.lexsort((np.arange(mag.size), -mag))


def residual_ratio(y, mask: SamplingMask, spectrum: np.ndarray) -> float:
    """Fraction of the available-sample energy not explained by ``spectrum``."""
    y = _check_y(y, mask)
    energy = float(np.sum(np.abs(y) ** 2))
    if energy == 0:
        raise ValueError("available samples have zero energy")
    xhat = synthesize_at(spectrum, mask)
    return float(np.sum(np.abs(y - xhat) ** 2)) / energy


def recover_known_support(y, mask: SamplingMask, support: Sequence[int]) -> np.ndarray:
    """Least-squares DFT coefficients on ``support``; zeros elsewhere."""
    y = _check_y(y, mask)
    support = [int(k) for k in support]
    if len(support) > mask.m:
        raise OversizedSupportError(f"support of size {len(support)} exceeds the {mask.m} available samples")
    a = partial_matrix(mask, support).entries
    X = np.zeros(mask.n_len, dtype=complex)
    if support:
        X[support] = least_squares_solve(a, y)
    return X


def select_support(estimate: np.ndarray, selection: SupportSelection, m: int) -> list[int]:
    if selection.mode == "threshold":
        chosen = np.flatnonzero(np.abs(estimate) > selection.value)
    else:
        count = m if selection.mode == "top_m" else int(selection.value)
        chosen = ranked_bins(estimate)[: min(count, estimate.size)]
    if chosen.size == 0:
        raise EmptySupportError("selection rule picked no frequency bins")
    if chosen.size > m:
        raise OversizedSupportError(f"selection picked {chosen.size} bins but only {m} samples are available")
    return sorted(int(k) for k in chosen)


def recover_one_step(
    y, mask: SamplingMask, selection: SupportSelection, epsilon: float = DEFAULT_EPSILON
) -> RecoveryResult:
    """Zero-filled DFT, bin selection, then one LS solve.

    ``converged`` reports whether the residual ratio is below ``epsilon``.
    """
    y = _check_y(y, mask)
    support = select_support(initial_estimate(y, mask), selection, mask.m)
    X = recover_known_support(y, mask, support)
    eps = residual_ratio(y, mask, X)
    return RecoveryResult(
        support=support,
        spectrum=X,
        iterations=1,
        residual_ratio=eps,
        converged=eps < epsilon,
        method=f"onestep:{selection.mode}",
        residual_trace=[eps],
        detection_order=list(support),
    )


def recover_iterative(
    y, mask: SamplingMask, epsilon: float = DEFAULT_EPSILON, max_iter: Optional[int] = None
) -> RecoveryResult:
    """Detect-estimate-subtract loop.

    Each pass takes the DFT of the residual on the available samples, adds
    its strongest bin not yet in the support, and refits all detected bins
    jointly by least squares. Stops once the residual ratio is below
    ``epsilon`` or after ``max_iter`` passes (default: M). Running out of
    passes, or of new bins, returns ``converged=False``.
    """
    y = _check_y(y, mask)
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    if max_iter is None:
        max_iter = mask.m
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    energy = float(np.sum(np.abs(y) ** 2))
    if energy == 0:
        raise ValueError("available samples have zero energy")

    support: list[int] = []
    X = np.zeros(mask.n_len, dtype=complex)
    xhat = np.zeros(mask.m, dtype=complex)
    trace: list[float] = []
    converged = False
    for _ in range(max_iter):
        if len(support) >= mask.m:
            break
        E = initial_estimate(y - xhat, mask)
        taken = set(support)
        new = next((int(k) for k in ranked_bins(E) if int(k) not in taken), None)
        if new is None:
            break
        support.append(new)
        X = recover_known_support(y, mask, support)
        xhat = synthesize_at(X, mask)
        eps = float(np.sum(np.abs(y - xhat) ** 2)) / energy
        trace.append(eps)
        if eps < epsilon:
            converged = True
            break
    return RecoveryResult(
        support=sorted(support),
        spectrum=X,
        iterations=len(trace),
        residual_ratio=trace[-1] if trace else 1.0,
        converged=converged,
        method="iterative",
        residual_trace=trace,
        detection_order=list(support),
    )


def recover_exhaustive(
    y, mask: SamplingMask, k: int, chunk: int = 20000, tie_rtol: float = 1e-12
) -> RecoveryResult:
    """Best k-subset of bins by LS residual, over all ``C(N, k)`` subsets.

    Subsets whose normal matrix is singular are skipped. Residuals within
    ``tie_rtol * ||y||^2`` of the best are ties, resolved toward the
    lexicographically smallest support.
    """
    y = _check_y(y, mask)
    n = mask.n_len
    if k < 1 or k > mask.m:
        raise ValueError(f"k must be in [1, {mask.m}], got {k}")
    count = math.comb(n, k)
    if count > EXHAUSTIVE_GUARD:
        raise InstanceTooLargeError(f"C({n}, {k}) = {count} subsets exceeds the guard of {EXHAUSTIVE_GUARD}")
    energy = float(np.sum(np.abs(y) ** 2))
    if energy == 0:
        raise ValueError("available samples have zero energy")

    a = partial_matrix(mask, range(n)).entries
    gram = hermitian_product(a)
    corr = a.conj().T @ y
    residuals = np.empty(count)
    subsets = itertools.combinations(range(n), k)
    pos = 0
    while pos < count:
        block = np.array(list(itertools.islice(subsets, chunk)), dtype=np.int64)
        g = gram[block[:, :, None], block[:, None, :]]
        b = corr[block]
        x, ok = batched_cholesky_solve(g, b)
        fit = np.einsum("sk,sk->s", b.conj(), np.nan_to_num(x)).real
        res = np.where(ok, np.maximum(energy - fit, 0.0), np.inf)
        residuals[pos : pos + block.shape[0]] = res
        pos += block.shape[0]

    if not np.isfinite(residuals).any():
        raise SingularSystemError(f"every {k}-subset gives a singular system")
    best = residuals.min()
    # subsets are enumerated in lexicographic order, so the first tie wins
    winner = int(np.flatnonzero(residuals <= best + tie_rtol * energy)[0])
    support = list(next(itertools.islice(itertools.combinations(range(n), k), winner, None)))
    X = recover_known_support(y, mask, support)
    eps = residual_ratio(y, mask, X)
    return RecoveryResult(
        support=support,
        spectrum=X,
        iterations=count,
        residual_ratio=eps,
        converged=True,
        method="exhaustive",
        residual_trace=[eps],
        detection_order=list(support),
    )
