"""Closed-form teleportation channel.

Standard teleportation through a resource ``chi`` acts on the teleported
system as ``rho -> sum_i Tr[E^i chi] W_i rho W_i^H``, where ``E^i`` are the
generalized Bell projectors and ``W_i`` the matching channel unitaries of the
operator basis. The channel is stored as its probability vector only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .states import POSITIVITY_TOL, DensityMatrix, OperatorBasis, bell_basis, check_probabilities
from .tensor_core import kron

ZERO_CLIP = 1e-12
RENORM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """Probability vector over the conjugations of a ``dim``-level basis."""

    dim: int
    probs: np.ndarray

    def __post_init__(self):
        p = check_probabilities(self.probs, self.dim**2).copy()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "probs": self.probs.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ChannelSpec":
        raw = json.loads(text)
        return cls(int(raw["dim"]), raw["probs"])

    @classmethod
    def identity(cls, dim: int = 2) -> "ChannelSpec":
        p = np.zeros(dim * dim)
        p[0] = 1.0
        return cls(dim, p)


def _basis_for(dim: int, basis: OperatorBasis | None) -> OperatorBasis:
    basis = basis or bell_basis(dim)
    if basis.dim != dim:
        raise ValueError(f"basis dimension {basis.dim} does not match {dim}")
    return basis


def spectrum_of(resource: DensityMatrix, basis: OperatorBasis | None = None) -> ChannelSpec:
    """Bell-projection spectrum ``p_i = Tr[E^i chi]`` of a bipartite resource.

    Entries within ``1e-12`` of zero are set to zero. A sum off by less than
    ``1e-9`` is renormalized; anything larger raises, since it means the
    resource itself is invalid.
    """
    if len(resource.dims) != 2 or resource.dims[0] != resource.dims[1]:
        raise ValueError(f"resource must be a d x d pair, got dims {resource.dims}")
    d = resource.dims[0]
    basis = _basis_for(d, basis)
    # Tr[E chi] for Hermitian E is the Frobenius inner product of E^T and chi.
    p = np.array([np.sum(e.T * resource.matrix).real for e in basis.bell_projectors])
    if p.min() < -POSITIVITY_TOL:
        raise ValueError(f"negative Bell projection {p.min():.3e}")
    p[np.abs(p) < ZERO_CLIP] = 0.0
    p = np.clip(p, 0.0, 1.0)
    total = p.sum()
    if abs(total - 1.0) > RENORM_TOL:
        raise ValueError(f"Bell projections sum to {total:.12g}")
    return ChannelSpec(d, p / total)


def _conjugation_sum(probs, ops, m: np.ndarray) -> np.ndarray:
    out = np.zeros_like(m, dtype=complex)
    for p, w in zip(probs, ops):
        if p != 0.0:
            out += p * (w @ m @ w.conj().T)
    return out


def apply(spec: ChannelSpec, state: DensityMatrix, basis: OperatorBasis | None = None) -> DensityMatrix:
    """Apply the depolarizing channel to a single ``d``-level state."""
    basis = _basis_for(spec.dim, basis)
    if state.dims != (spec.dim,):
        raise ValueError(f"state dims {state.dims} do not match channel dimension {spec.dim}")
    return DensityMatrix(_conjugation_sum(spec.probs, basis.channel_unitaries, state.matrix), state.dims)


def apply_to_half(
    spec: ChannelSpec,
    pair: DensityMatrix,
    which: int = 1,
    basis: OperatorBasis | None = None,
) -> DensityMatrix:
    """Apply the channel to factor ``which`` (0-based) of a multipartite state.

    With ``which=1`` on a pair this is the entanglement-swapping output: the
    teleported half carries the channel, the retained half is untouched.
    """
    basis = _basis_for(spec.dim, basis)
    dims = pair.dims
    if not 0 <= which < len(dims):
        raise IndexError(f"subsystem {which} out of range for dims {dims}")
    if dims[which] != spec.dim:
        raise ValueError(f"subsystem {which} has dimension {dims[which]}, channel acts on {spec.dim}")
    left = np.eye(int(np.prod(dims[:which])))
    right = np.eye(int(np.prod(dims[which + 1 :])))
    ops = [kron(left, w, right) for w in basis.channel_unitaries]
    return DensityMatrix(_conjugation_sum(spec.probs, ops, pair.matrix), dims)


@lru_cache(maxsize=None)
def _product_table(key: tuple[int, str]) -> np.ndarray:
    basis = bell_basis(*key)
    ws = basis.channel_unitaries
    n, d = len(ws), basis.dim
    table = np.full((n, n), -1, dtype=int)
    for i, wi in enumerate(ws):
        for j, wj in enumerate(ws):
            prod = wi @ wj
            overlaps = [abs(np.trace(wk.conj().T @ prod)) for wk in ws]
            k = int(np.argmax(overlaps))
            if abs(overlaps[k] - d) > 1e-9:
                raise RuntimeError("channel unitaries do not close under multiplication")
            table[i, j] = k
    table.setflags(write=False)
    return table


def product_table(basis: OperatorBasis) -> np.ndarray:
    """``table[i, j] = k`` where ``W_i W_j`` equals ``W_k`` up to a phase."""
    return _product_table(basis.key)


def compose(a: ChannelSpec, b: ChannelSpec, basis: OperatorBasis | None = None) -> ChannelSpec:
    """Spectrum of applying ``b`` first and then ``a``."""
    if a.dim != b.dim:
        raise ValueError(f"cannot compose channels of dimension {a.dim} and {b.dim}")
    table = product_table(_basis_for(a.dim, basis))
    out = np.zeros(a.dim**2)
    np.add.at(out, table, np.outer(a.probs, b.probs))
    return ChannelSpec(a.dim, out)
