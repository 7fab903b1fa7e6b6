"""Small dense complex linear algebra.

Matrices are 2-D complex ``numpy`` arrays. Least squares goes through the
normal equations and a hand-rolled Cholesky factorization; the only
numpy calls are elementwise and matrix-product primitives. A singular
normal matrix raises :class:`SingularSystemError` instead of being
regularized.
"""

from __future__ import annotations

import numpy as np

PIVOT_RTOL = 1e-10
RANK_RTOL = 1e-5  # on the square-rooted (singular value) scale, matches PIVOT_RTOL


class SingularSystemError(np.linalg.LinAlgError):
    """Normal matrix has a pivot below tolerance."""


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def hermitian_product(a) -> np.ndarray:
    """Gram matrix ``A^H A``, symmetrized so it is exactly Hermitian."""
    a = _as_matrix(a)
    g = a.conj().T @ a
    g = 0.5 * (g + g.conj().T)
    g[np.diag_indices_from(g)] = g.diagonal().real
    return g


def cholesky(g: np.ndarray, rtol: float = PIVOT_RTOL) -> np.ndarray:
    """Lower-triangular ``L`` with ``g = L L^H``.

    Raises SingularSystemError when a pivot drops below
    ``rtol * max|diag(g)|``.
    """
    g = np.asarray(g, dtype=complex)
    n = g.shape[0]
    scale = np.max(np.abs(g.diagonal())) if n else 0.0
    tol = rtol * scale
    L = np.zeros_like(g)
    for j in range(n):
        d = g[j, j].real - np.sum(np.abs(L[j, :j]) ** 2)
        if not d > tol:
            raise SingularSystemError(
                f"normal matrix is singular to working tolerance (pivot {d:.3e} at column {j}, tol {tol:.3e})"
            )
        L[j, j] = np.sqrt(d)
        if j + 1 < n:
            L[j + 1 :, j] = (g[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j].conj()) / L[j, j]
    return L


def _forward(L: np.ndarray, b: np.ndarray) -> np.ndarray:
    z = np.array(b, dtype=complex)
    for i in range(z.size):
        z[i] = (z[i] - L[i, :i] @ z[:i]) / L[i, i]
    return z


def _backward_h(L: np.ndarray, z: np.ndarray) -> np.ndarray:
    # solves L^H x = z
    x = np.array(z, dtype=complex)
    n = x.size
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - L[i + 1 :, i].conj() @ x[i + 1 :]) / L[i, i].real
    return x


def least_squares_solve(a, y) -> np.ndarray:
    """Minimize ``||y - A x||_2`` via ``A^H A x = A^H y``.

    Parameters
    ----------
    a : (M, C) complex array, M >= C
    y : (M,) complex array

    Returns
    -------
    x : (C,) complex array
    """
    a = _as_matrix(a)
    y = np.asarray(y, dtype=complex).reshape(-1)
    m, c = a.shape
    if y.size != m:
        raise ValueError(f"right-hand side has {y.size} entries, matrix has {m} rows")
    if m < c:
        raise SingularSystemError(f"underdetermined system: {m} rows < {c} columns")
    if c == 0:
        return np.zeros(0, dtype=complex)
    L = cholesky(hermitian_product(a))
    return _backward_h(L, _forward(L, a.conj().T @ y))


def numeric_rank(a, tol: float = RANK_RTOL) -> int:
    """Rank from a diagonally pivoted elimination of ``A^H A``.

    A pivot ``d`` counts when ``sqrt(d) > tol * sqrt(max diag)``, i.e. ``tol``
    is relative on the singular-value scale.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    g = hermitian_product(a).copy()
    n = g.shape[0]
    if n == 0:
        return 0
    scale = np.sqrt(np.max(g.diagonal().real))
    if scale == 0:
        return 0
    rank = 0
    active = list(range(n))
    while active:
        diag = np.array([g[i, i].real for i in active])
        j = int(np.argmax(diag))
        p = active.pop(j)
        d = diag[j]
        if not np.sqrt(max(d, 0.0)) > tol * scale:
            break
        rank += 1
        if active:
            rest = np.array(active)
            col = g[rest, p]
            g[np.ix_(rest, rest)] -= np.outer(col, col.conj()) / d
    return rank


def is_hermitian(h: np.ndarray, atol: float = 1e-10) -> bool:
    h = np.asarray(h)
    return h.ndim == 2 and h.shape[0] == h.shape[1] and np.allclose(h, h.conj().T, rtol=0, atol=atol)


def jacobi_eigenvalues(h, tol: float = 1e-14, max_sweeps: int = 100) -> np.ndarray:
    """All eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations."""
    h = _as_matrix(h)
    if not is_hermitian(h):
        raise ValueError("matrix is not Hermitian")
    a = 0.5 * (h + h.conj().T)
    n = a.shape[0]
    total = np.linalg.norm(a)
    # entries this small are already converged; rotating them would divide by ~0
    negligible = 1e-300 + 1e-20 * total
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.linalg.norm(a) ** 2 - np.sum(np.abs(a.diagonal()) ** 2), 0.0))
        if off <= tol * max(total, 1e-300):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= negligible:
                    continue
                phase = apq / mag
                app, aqq = a[p, p].real, a[q, q].real
                zeta = (aqq - app) / (2.0 * mag)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                u = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                cols = [p, q]
                a[:, cols] = a[:, cols] @ u
                a[cols, :] = u.conj().T @ a[cols, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    return np.sort(a.diagonal().real)


def hermitian_eigen_extremes(h) -> tuple[float, float]:
    """Smallest and largest eigenvalue of a Hermitian matrix."""
    ev = jacobi_eigenvalues(h)
    return float(ev[0]), float(ev[-1])


def batched_cholesky_solve(g: np.ndarray, b: np.ndarray, rtol: float = PIVOT_RTOL):
    """Solve a stack of Hermitian systems ``g[s] x[s] = b[s]``.

    Returns ``(x, ok)``; ``ok[s]`` is False where the factorization hit a
    pivot below ``rtol * max|diag(g[s])|`` (those rows of ``x`` are NaN).
    """
    g = np.asarray(g, dtype=complex)
    b = np.asarray(b, dtype=complex)
    s, n, _ = g.shape
    tol = rtol * np.max(np.abs(np.diagonal(g, axis1=1, axis2=2)), axis=1)
    L = np.zeros_like(g)
    ok = np.ones(s, dtype=bool)
    for j in range(n):
        d = g[:, j, j].real - np.sum(np.abs(L[:, j, :j]) ** 2, axis=1)
        ok &= d > tol
        root = np.sqrt(np.where(ok, d, 1.0))
        L[:, j, j] = root
        if j + 1 < n:
            inner = np.einsum("sik,sk->si", L[:, j + 1 :, :j], L[:, j, :j].conj())
            L[:, j + 1 :, j] = (g[:, j + 1 :, j] - inner) / root[:, None]
    z = np.zeros_like(b)
    for i in range(n):
        z[:, i] = (b[:, i] - np.einsum("sk,sk->s", L[:, i, :i], z[:, :i])) / L[:, i, i]
    x = np.zeros_like(b)
    for i in range(n - 1, -1, -1):
        x[:, i] = (z[:, i] - np.einsum("sk,sk->s", L[:, i + 1 :, i].conj(), x[:, i + 1 :])) / L[:, i, i].real
    x[~ok] = np.nan
    return x, ok
