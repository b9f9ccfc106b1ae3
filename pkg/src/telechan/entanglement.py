"""Two-qubit entanglement measures and partial-transpose separability tests."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .channel import ChannelSpec, apply_to_half
from .states import DensityMatrix, bell_diagonal, pauli
from .tensor_core import CLIP_THRESHOLD, partial_transpose

PPT_TOL = 1e-10
_YY = np.kron(pauli(2), pauli(2))


def _require_two_qubits(state: DensityMatrix) -> None:
    if state.dims != (2, 2):
        raise ValueError(f"expected a two-qubit state, got dims {state.dims}")


def concurrence(state: DensityMatrix) -> float:
    """Wootters concurrence ``max(0, l1 - l2 - l3 - l4)``.

    With ``rho = W W^H`` over its support, the ``l_i`` are the singular values
    of the symmetric matrix ``W^T (Y x Y) W``. Taking singular values directly
    avoids square roots of eigenvalue noise, which would otherwise cost about
    ``sqrt(eps)`` accuracy on rank-deficient states.
    """
    _require_two_qubits(state)
    w, v = np.linalg.eigh(state.matrix)
    keep = w > CLIP_THRESHOLD
    factor = v[:, keep] * np.sqrt(w[keep])
    lam = np.zeros(4)
    sv = np.linalg.svd(factor.T @ _YY @ factor, compute_uv=False)
    lam[: sv.size] = sv
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-x * np.log2(x) - (1 - x) * np.log2(1 - x))


def entanglement_of_formation(state: DensityMatrix) -> float:
    """Entanglement of formation in bits, from the concurrence."""
    c = min(concurrence(state), 1.0)
    return binary_entropy((1 + np.sqrt(1 - c * c)) / 2)


def min_pt_eigenvalue(
    matrix: np.ndarray, dims: Sequence[int], cut: Iterable[int] = (1,)
) -> np.ndarray | float:
    """Smallest eigenvalue of the partial transpose over ``cut``.

    Accepts a stack of matrices (leading batch axes) and returns one value per
    matrix in that case.
    """
    pt = partial_transpose(np.asarray(matrix), dims, cut)
    pt = (pt + np.swapaxes(pt, -1, -2).conj()) / 2
    low = np.linalg.eigvalsh(pt)[..., 0]
    return float(low) if np.ndim(low) == 0 else low


def negativity(
    state: DensityMatrix, dims: Sequence[int] | None = None, cut: Iterable[int] = (1,)
) -> float:
    """``(||rho^{T_cut}||_1 - 1) / 2``."""
    dims = tuple(dims or state.dims)
    if len(dims) < 2:
        raise ValueError("negativity needs a multipartite state")
    pt = partial_transpose(state.matrix, dims, cut)
    w = np.linalg.eigvalsh((pt + pt.conj().T) / 2)
    return float(max(0.0, (np.sum(np.abs(w)) - 1) / 2))


def is_ppt(
    state: DensityMatrix,
    dims: Sequence[int] | None = None,
    cut: Iterable[int] = (1,),
    tol: float = PPT_TOL,
) -> bool:
    """True when the partial transpose has no eigenvalue below ``-tol``.

    For two qubits (and qubit-qutrit) this is equivalent to separability.
    """
    dims = tuple(dims or state.dims)
    if len(dims) < 2:
        raise ValueError("the PPT test needs a multipartite state")
    return min_pt_eigenvalue(state.matrix, dims, cut) >= -tol


def bell_diagonal_concurrence(probs: Sequence[float]) -> float:
    """Closed form ``max(0, 2 max p - 1)`` for Bell-diagonal states."""
    return float(max(0.0, 2 * float(np.max(probs)) - 1))


def entanglement_bound_check(
    gamma: DensityMatrix, spec: ChannelSpec, which: int = 1, tol: float = 1e-9
) -> dict:
    """Compare the entanglement of ``gamma`` after the channel on one half
    with that of the Bell-diagonal state carrying the channel's spectrum.

    Since the output is obtainable by LOCC from either input, its
    entanglement of formation cannot exceed the comparator's.
    """
    _require_two_qubits(gamma)
    if spec.dim != 2:
        raise ValueError("the bound check is defined for qubit channels")
    out = apply_to_half(spec, gamma, which)
    comparator = bell_diagonal(np.sort(spec.probs)[::-1])
    eof_out = entanglement_of_formation(out)
    eof_ref = entanglement_of_formation(comparator)
    return {
        "eof_output": eof_out,
        "eof_comparator": eof_ref,
        "concurrence_output": concurrence(out),
        "concurrence_comparator": concurrence(comparator),
        "margin": eof_ref - eof_out,
        "passed": eof_out <= eof_ref + tol,
    }
