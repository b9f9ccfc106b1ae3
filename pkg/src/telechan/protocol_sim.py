"""Literal density-matrix simulation of standard teleportation and swapping.

Subsystem numbering follows the protocol: the teleported system is 1 (with
an optional partner 2), the resource occupies 3 and 4. Alice measures 1 and 3
in the generalized Bell basis and Bob corrects 4. The simulator never uses
the closed-form channel, so it serves as an independent check on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .states import DensityMatrix, OperatorBasis, bell_basis, bell_state, pauli
from .tensor_core import kron, max_abs_diff, partial_trace, permute_subsystems

ZERO_BRANCH = 1e-15


@dataclass(frozen=True, eq=False)
class OutcomeRecord:
    """One Bell-measurement branch.

    ``conditional_state`` is Bob's post-correction state; it is ``None`` for a
    flagged zero-probability branch.
    """

    outcome_index: int
    label: object
    probability: float
    conditional_state: DensityMatrix | None

    @property
    def flagged(self) -> bool:
        return self.conditional_state is None


@dataclass(frozen=True, eq=False)
class TeleportResult:
    branches: tuple[OutcomeRecord, ...]
    averaged_output: DensityMatrix

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([b.probability for b in self.branches])


def _embed(op: np.ndarray, pos: int, dims: Sequence[int]) -> np.ndarray:
    left = np.eye(int(np.prod(dims[:pos])))
    right = np.eye(int(np.prod(dims[pos + 1 :])))
    return kron(left, op, right)


def _run(
    joint: np.ndarray,
    dims: tuple[int, ...],
    measured: tuple[int, int],
    corrected: int,
    basis: OperatorBasis,
    corrections: Sequence[np.ndarray | None],
    projectors: Sequence[np.ndarray] | None = None,
    output_order: Sequence[int] | None = None,
) -> TeleportResult:
    n = len(dims)
    rest = [k for k in range(n) if k not in measured]
    order = list(measured) + rest
    joint = permute_subsystems(joint, dims, order)
    pdims = tuple(dims[k] for k in order)
    out_dims = tuple(dims[k] for k in rest)
    fix_pos = rest.index(corrected)
    reorder = output_order is not None and list(output_order) != list(range(len(rest)))
    final_dims = tuple(out_dims[k] for k in output_order) if reorder else out_dims
    eye_rest = np.eye(int(np.prod(out_dims)))
    projectors = basis.bell_projectors if projectors is None else projectors

    branches = []
    for i, e in enumerate(projectors):
        proj = kron(e, eye_rest)
        post = proj @ joint @ proj
        bob = partial_trace(post, pdims, keep=range(2, n))
        prob = float(np.trace(bob).real)
        label = basis.labels[i] if i < len(basis.labels) else i
        if prob <= ZERO_BRANCH:
            branches.append(OutcomeRecord(i, label, 0.0, None))
            continue
        v = corrections[i]
        if v is not None:
            g = _embed(v, fix_pos, out_dims)
            bob = g @ bob @ g.conj().T
        if reorder:
            bob = permute_subsystems(bob, out_dims, output_order)
        branches.append(
            OutcomeRecord(i, label, prob, DensityMatrix(bob / prob, final_dims))
        )

    total = sum(b.probability for b in branches)
    avg = np.zeros_like(eye_rest, dtype=complex)
    for b in branches:
        if not b.flagged:
            avg += b.probability * b.conditional_state.matrix
    return TeleportResult(tuple(branches), DensityMatrix(avg / total, final_dims))


_CORRECTIONS: dict[tuple[int, str], tuple[np.ndarray, ...]] = {}


def correction_unitaries(basis: OperatorBasis) -> tuple[np.ndarray, ...]:
    """Per-outcome corrections that make a perfect resource teleport exactly.

    Derived rather than assumed: one uncorrected swap of a maximally entangled
    pair through the principal state leaves, in each branch, a pure state
    ``(I (x) K_i)|Psi+>``. The correction is ``K_i^{-1}`` rescaled to a unitary,
    with its global phase fixed so the largest entry is real and positive.
    """
    cached = _CORRECTIONS.get(basis.key)
    if cached is not None:
        return cached
    d = basis.dim
    e0 = bell_state(d).matrix
    raw = _run(kron(e0, e0), (d, d, d, d), (1, 2), 3, basis, [None] * basis.size)
    out = []
    for b in raw.branches:
        w, vecs = np.linalg.eigh(b.conditional_state.matrix)
        if abs(w[-1] - 1.0) > 1e-10:
            raise RuntimeError(f"branch {b.label} of the perfect swap is not pure")
        # psi[j*d + k] = K[k, j] / sqrt(d), up to phase
        k_op = vecs[:, -1].reshape(d, d).T
        v = np.linalg.inv(k_op)
        v /= np.sqrt(np.trace(v @ v.conj().T).real / d)
        flat = v.reshape(-1)
        # first entry of maximal magnitude
        big = flat[np.argmax(np.abs(flat) > np.abs(flat).max() - 1e-12)]
        v *= abs(big) / big
        if max_abs_diff(v @ v.conj().T, np.eye(d)) > 1e-10:
            raise RuntimeError(f"correction for branch {b.label} is not unitary")
        v.setflags(write=False)
        out.append(v)
    _CORRECTIONS[basis.key] = tuple(out)
    return _CORRECTIONS[basis.key]


def _prepare(basis: OperatorBasis | None, d: int, corrections) -> tuple[OperatorBasis, Sequence]:
    basis = basis or bell_basis(d)
    if basis.dim != d:
        raise ValueError(f"basis dimension {basis.dim} does not match resource dimension {d}")
    if corrections is None:
        corrections = correction_unitaries(basis)
    elif len(corrections) != basis.size:
        raise ValueError(f"need {basis.size} corrections, got {len(corrections)}")
    return basis, corrections


def _resource_dim(resource: DensityMatrix) -> int:
    if len(resource.dims) != 2 or resource.dims[0] != resource.dims[1]:
        raise ValueError(f"resource must be a d x d pair, got dims {resource.dims}")
    return resource.dims[0]


def teleport(
    state: DensityMatrix,
    resource: DensityMatrix,
    basis: OperatorBasis | None = None,
    *,
    corrections: Sequence[np.ndarray] | None = None,
    projectors: Sequence[np.ndarray] | None = None,
) -> TeleportResult:
    """Teleport a single ``d``-level state through ``resource``.

    Args:
        state: Input on subsystem 1, dims ``(d,)``.
        resource: Shared pair on subsystems 3 and 4, dims ``(d, d)``.
        basis: Measurement basis; defaults to ``bell_basis(d)``.
        corrections: Override for Bob's per-outcome unitaries (test hook).
        projectors: Override for the measurement projectors on (1, 3). Branches
            with zero probability are flagged and get weight zero; the average
            is normalized by the probability actually recorded.
    """
    d = _resource_dim(resource)
    if state.dims != (d,):
        raise ValueError(f"input dims {state.dims} do not match resource dimension {d}")
    basis, corrections = _prepare(basis, d, corrections)
    return _run(
        kron(state.matrix, resource.matrix), (d, d, d), (0, 1), 2, basis, corrections, projectors
    )


def swap(
    pair: DensityMatrix,
    resource: DensityMatrix,
    basis: OperatorBasis | None = None,
    *,
    half: int = 1,
    corrections: Sequence[np.ndarray] | None = None,
    projectors: Sequence[np.ndarray] | None = None,
) -> TeleportResult:
    """Entanglement swapping: teleport factor ``half`` of ``pair`` through ``resource``.

    The teleported factor plays the role of subsystem 1 and the retained one
    of subsystem 2. The output keeps the pair's factor order, with Bob's
    system 4 in slot ``half``; the default ``half=1`` orders it as (2, 4).
    """
    d = _resource_dim(resource)
    if pair.dims != (d, d):
        raise ValueError(f"input pair dims {pair.dims} do not match resource dimension {d}")
    if half not in (0, 1):
        raise IndexError(f"half must be 0 or 1, got {half}")
    basis, corrections = _prepare(basis, d, corrections)
    return _run(
        kron(pair.matrix, resource.matrix),
        (d, d, d, d),
        (half, 2),
        3,
        basis,
        corrections,
        projectors,
        output_order=(1, 0) if half == 0 else None,
    )


def teleport_per_branch_check(resource: DensityMatrix, tol: float = 1e-10) -> dict:
    """Compare every swap branch against ``s4 s2 chi_24 s2 s4`` for qubits.

    Swaps the principal Bell pair through ``resource`` and checks each
    post-correction branch state against the resource conjugated by the
    outcome's Pauli on both output qubits.
    """
    if resource.dims != (2, 2):
        raise ValueError("the per-branch check is defined for two-qubit resources")
    result = swap(bell_state(2), resource)
    deviations = []
    for b in result.branches:
        s = pauli(b.outcome_index)
        g = kron(s, s)
        expected = g @ resource.matrix @ g.conj().T
        got = b.conditional_state.matrix if not b.flagged else np.zeros((4, 4))
        deviations.append(max_abs_diff(got, expected))
    return {
        "deviations": deviations,
        "probabilities": result.probabilities.tolist(),
        "max_deviation": max(deviations),
        "passed": max(deviations) < tol,
    }
