"""Dense complex linear algebra shared by the rest of the package.

Matrices are plain ``numpy`` arrays. Multipartite operators carry a ``dims``
sequence of local dimensions; subsystem 0 is the leftmost tensor factor and
its index varies slowest (big-endian basis order).
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np

#: Eigenvalues at or below this are treated as outside the support.
CLIP_THRESHOLD = 1e-12
#: Maximum absolute deviation from Hermiticity accepted on input.
HERMITIAN_TOL = 1e-9
#: Eigenvalues down to ``-PSD_TOL`` are accepted as round-off.
PSD_TOL = 1e-9

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def kron(*mats: np.ndarray) -> np.ndarray:
    """Kronecker product of the arguments, left to right."""
    if not mats:
        raise ValueError("kron needs at least one operand")
    return reduce(np.kron, mats)


def max_abs_diff(a: np.ndarray, b: np.ndarray) -> float:
    """Largest entrywise absolute difference between two arrays."""
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> None:
    total = int(np.prod(dims))
    if m.shape[-2:] != (total, total):
        raise ValueError(f"matrix shape {m.shape[-2:]} does not match dims {tuple(dims)}")


def _check_indices(indices: Iterable[int], n: int) -> list[int]:
    out = sorted(set(int(i) for i in indices))
    for i in out:
        if not 0 <= i < n:
            raise IndexError(f"subsystem index {i} out of range for {n} subsystems")
    return out


def permute_subsystems(m: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors so that new factor ``k`` is old factor ``order[k]``."""
    n = len(dims)
    _check_dims(m, dims)
    if sorted(order) != list(range(n)):
        raise ValueError(f"order {order} is not a permutation of {n} subsystems")
    t = m.reshape(tuple(dims) * 2)
    t = t.transpose(tuple(order) + tuple(n + o for o in order))
    total = m.shape[-1]
    return t.reshape(total, total)


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Kept factors stay in their original relative order.

    >>> bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    >>> partial_trace(np.outer(bell, bell), [2, 2], keep=[0]).real
    array([[0.5, 0. ],
           [0. , 0.5]])
    """
    n = len(dims)
    _check_dims(m, dims)
    kept = _check_indices(keep, n)
    if n > len(_LETTERS) // 2:
        raise ValueError("too many subsystems")
    row = list(_LETTERS[:n])
    col = list(_LETTERS[n : 2 * n])
    for i in range(n):
        if i not in kept:
            col[i] = row[i]
    out = "".join(row[i] for i in kept) + "".join(col[i] for i in kept)
    t = np.einsum("".join(row) + "".join(col) + "->" + out, m.reshape(tuple(dims) * 2))
    dk = int(np.prod([dims[i] for i in kept])) if kept else 1
    return t.reshape(dk, dk)


def partial_transpose(m: np.ndarray, dims: Sequence[int], sys: Iterable[int]) -> np.ndarray:
    """Transpose the listed subsystems. Leading batch axes are allowed."""
    n = len(dims)
    _check_dims(m, dims)
    syss = _check_indices(sys, n)
    batch = m.shape[:-2]
    nb = len(batch)
    t = m.reshape(batch + tuple(dims) * 2)
    axes = list(range(nb + 2 * n))
    for i in syss:
        axes[nb + i], axes[nb + n + i] = axes[nb + n + i], axes[nb + i]
    return t.transpose(axes).reshape(m.shape)


def hermitian_deviation(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def eig_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Args:
        m: Square matrix, Hermitian to within ``tol`` (max-abs deviation).
        tol: Hermiticity tolerance. The input is symmetrized after the check.

    Returns:
        Ascending real eigenvalues and the matrix whose columns are the
        orthonormal eigenvectors. ``V @ diag(w) @ V^H`` reproduces ``m`` to
        roughly ``1e-13 * max|w|`` for the dimensions used here (<= 100).

    Raises:
        ValueError: If ``m`` is not square or deviates from Hermiticity.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    dev = hermitian_deviation(m)
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3e} > {tol:.1e})")
    return np.linalg.eigh((m + m.conj().T) / 2)


def matrix_log2_on_support(
    m: np.ndarray, threshold: float = CLIP_THRESHOLD, psd_tol: float = PSD_TOL
) -> tuple[np.ndarray, np.ndarray]:
    """Base-2 logarithm of a PSD matrix restricted to its support.

    Eigenvalues ``<= threshold`` are dropped: their eigenspace contributes
    zero to the logarithm and is excluded from the returned support projector.

    Returns:
        ``(log2_m, support_projector)``.

    Raises:
        ValueError: If an eigenvalue is below ``-psd_tol``.
    """
    w, v = eig_hermitian(m)
    if w.size and w[0] < -psd_tol:
        raise ValueError(f"matrix is not positive semidefinite (eigenvalue {w[0]:.3e})")
    on = w > threshold
    vs = v[:, on]
    log_m = (vs * np.log2(w[on])) @ vs.conj().T
    return log_m, vs @ vs.conj().T


def haar_random_pure(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Unit vector drawn from the unitarily invariant measure on ``C^dim``."""
    return haar_random_pure_batch(dim, 1, rng)[0]


def haar_random_pure_batch(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` Haar-random unit vectors as the rows of a ``(count, dim)`` array.

    The generator is consumed as ``count * dim * 2`` standard normals, so
    drawing in consecutive chunks gives the same vectors as one large draw.
    """
    if dim < 2:
        raise ValueError("dim must be at least 2")
    g = rng.standard_normal((count, dim, 2))
    z = g[..., 0] + 1j * g[..., 1]
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from a ``dim x rank`` Ginibre matrix.

    ``rank=None`` gives full rank (the Hilbert-Schmidt ensemble).
    """
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must be in [1, {dim}]")
    g = rng.standard_normal((dim, rank, 2))
    a = g[..., 0] + 1j * g[..., 1]
    rho = a @ a.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real
