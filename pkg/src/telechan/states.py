"""State carriers, Pauli/Weyl operator families and the resource presets."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from .tensor_core import (
    HERMITIAN_TOL,
    haar_random_pure,
    hermitian_deviation,
    kron,
    random_density,
)

TRACE_TOL = 1e-9
POSITIVITY_TOL = 1e-9
NORM_TOL = 1e-9


class StateError(ValueError):
    """A state failed validation.

    ``invariant`` names the violated property (``"shape"``, ``"hermiticity"``,
    ``"trace"``, ``"positivity"``, ``"norm"``, ``"parse"``) and ``deviation``
    carries the measured violation when there is one.
    """

    def __init__(self, invariant: str, message: str, deviation: float | None = None):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant
        self.deviation = deviation


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Trace-one PSD matrix over the tensor factorization ``dims``."""

    matrix: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "matrix", _freeze(m))
        object.__setattr__(self, "dims", dims)
        self._validate()

    def _validate(self) -> None:
        m = self.matrix
        total = int(np.prod(self.dims)) if self.dims else 0
        if m.ndim != 2 or m.shape != (total, total) or any(d < 1 for d in self.dims):
            raise StateError("shape", f"matrix shape {m.shape} does not match dims {self.dims}")
        dev = hermitian_deviation(m)
        if dev > HERMITIAN_TOL:
            raise StateError("hermiticity", f"max deviation {dev:.3e}", dev)
        tr = np.trace(m)
        dev = abs(tr - 1.0)
        if dev > TRACE_TOL:
            raise StateError("trace", f"trace is {tr.real:.12g} (deviation {dev:.3e})", dev)
        low = float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])
        if low < -POSITIVITY_TOL:
            raise StateError("positivity", f"minimum eigenvalue {low:.3e}", -low)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self) -> str:
        return f"DensityMatrix(dims={self.dims})"


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector over ``dims``."""

    vector: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        v = np.array(self.vector, dtype=complex).reshape(-1)
        dims = tuple(int(d) for d in self.dims)
        if v.size != int(np.prod(dims)):
            raise StateError("shape", f"vector length {v.size} does not match dims {dims}")
        dev = abs(np.linalg.norm(v) - 1.0)
        if dev > NORM_TOL:
            raise StateError("norm", f"norm deviates from 1 by {dev:.3e}", dev)
        object.__setattr__(self, "vector", _freeze(v))
        object.__setattr__(self, "dims", dims)

    def density(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.vector, self.vector.conj()), self.dims)


# -- operator families -------------------------------------------------------

_PAULIS = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def pauli(index: int) -> np.ndarray:
    """Pauli matrix ``index`` in the order I, X, Y, Z."""
    if not 0 <= index <= 3:
        raise IndexError(f"Pauli index {index} out of range 0..3")
    return _PAULIS[index].copy()


def weyl(d: int, n: int, m: int) -> np.ndarray:
    """Weyl operator ``sum_k exp(2 pi i k n / d) |k><k+m mod d|``."""
    if d < 2:
        raise ValueError("d must be at least 2")
    if not (0 <= n < d and 0 <= m < d):
        raise IndexError(f"Weyl indices ({n}, {m}) out of range for d={d}")
    u = np.zeros((d, d), dtype=complex)
    k = np.arange(d)
    u[k, (k + m) % d] = np.exp(2j * np.pi * k * n / d)
    return u


def maximally_entangled(d: int) -> np.ndarray:
    """The principal state ``sum_j |jj> / sqrt(d)``."""
    v = np.zeros(d * d, dtype=complex)
    v[np.arange(d) * (d + 1)] = 1 / np.sqrt(d)
    return v


@dataclass(frozen=True, eq=False)
class OperatorBasis:
    """Unitary family with its generalized Bell basis.

    ``unitaries[i]`` generates ``bell_projectors[i]`` by acting on the first
    factor of the principal state. ``channel_unitaries[i]`` is the conjugation
    the teleportation channel applies with weight ``Tr[E^i chi]``: the Pauli
    itself for qubits, ``U^{n,-m}`` for the Weyl family.
    """

    dim: int
    family: str
    labels: tuple
    unitaries: tuple[np.ndarray, ...]
    bell_projectors: tuple[np.ndarray, ...]
    channel_unitaries: tuple[np.ndarray, ...]
    principal: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.unitaries)

    @property
    def key(self) -> tuple[int, str]:
        return (self.dim, self.family)


@lru_cache(maxsize=None)
def bell_basis(d: int, family: str | None = None) -> OperatorBasis:
    """Generalized Bell basis for ``d``-level pairs.

    ``family`` defaults to ``"pauli"`` for qubits (order I, X, Y, Z) and to
    ``"weyl"`` otherwise (labels ``(n, m)`` in lexicographic order).
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    family = family or ("pauli" if d == 2 else "weyl")
    if family == "pauli":
        if d != 2:
            raise ValueError("the Pauli family is only defined for d=2")
        labels = tuple(range(4))
        us = [pauli(i) for i in labels]
        chans = [pauli(i) for i in labels]
    elif family == "weyl":
        labels = tuple((n, m) for n in range(d) for m in range(d))
        us = [weyl(d, n, m) for n, m in labels]
        chans = [weyl(d, n, (-m) % d) for n, m in labels]
    else:
        raise ValueError(f"unknown operator family {family!r}")
    psi = maximally_entangled(d)
    e0 = np.outer(psi, psi.conj())
    eye = np.eye(d)
    projs = []
    for u in us:
        g = kron(u, eye)
        projs.append(_freeze(g @ e0 @ g.conj().T))
    return OperatorBasis(
        dim=d,
        family=family,
        labels=labels,
        unitaries=tuple(_freeze(u) for u in us),
        bell_projectors=tuple(projs),
        channel_unitaries=tuple(_freeze(u) for u in chans),
        principal=_freeze(psi),
    )


# -- resource families -------------------------------------------------------


def bell_state(d: int = 2) -> DensityMatrix:
    psi = maximally_entangled(d)
    return DensityMatrix(np.outer(psi, psi.conj()), (d, d))


def werner_state(p: float) -> DensityMatrix:
    """``p E0 + (1 - p) I/4`` on two qubits."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Werner parameter {p} outside [0, 1]")
    e0 = bell_basis(2).bell_projectors[0]
    return DensityMatrix(p * e0 + (1 - p) * np.eye(4) / 4, (2, 2))


def isotropic_state(d: int, f: float) -> DensityMatrix:
    """State with singlet fraction ``f`` that is invariant under ``U (x) U*``."""
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"singlet fraction {f} outside [0, 1]")
    e0 = bell_basis(d).bell_projectors[0]
    rest = (np.eye(d * d) - e0) / (d * d - 1)
    return DensityMatrix(f * e0 + (1 - f) * rest, (d, d))


def check_probabilities(probs: Sequence[float], size: int, tol: float = 1e-9) -> np.ndarray:
    p = np.asarray(probs, dtype=float).reshape(-1)
    if p.size != size:
        raise ValueError(f"expected {size} probabilities, got {p.size}")
    if np.any(~np.isfinite(p)) or np.any(p < -tol) or np.any(p > 1 + tol):
        raise ValueError(f"probabilities must lie in [0, 1]: {p.tolist()}")
    if abs(p.sum() - 1.0) > tol:
        raise ValueError(f"probabilities sum to {p.sum():.12g}, not 1")
    return p


def bell_diagonal(probs: Sequence[float], basis: OperatorBasis | None = None) -> DensityMatrix:
    """``sum_i probs[i] E^i`` in the given (default qubit) Bell basis."""
    basis = basis or bell_basis(2)
    p = check_probabilities(probs, basis.size)
    m = sum(pi * e for pi, e in zip(p, basis.bell_projectors))
    return DensityMatrix(m, (basis.dim, basis.dim))


def random_state(
    dims: Sequence[int], rng: np.random.Generator, rank: int | None = None
) -> DensityMatrix:
    return DensityMatrix(random_density(int(np.prod(dims)), rng, rank), tuple(dims))


def random_pure(dims: Sequence[int], rng: np.random.Generator) -> PureState:
    return PureState(haar_random_pure(int(np.prod(dims)), rng), tuple(dims))


def random_separable(
    rng: np.random.Generator, terms: int = 10, dims: Sequence[int] = (2, 2)
) -> DensityMatrix:
    """Random convex mixture of ``terms`` Haar-random product pure states."""
    weights = rng.dirichlet(np.ones(terms))
    m = np.zeros((int(np.prod(dims)),) * 2, dtype=complex)
    for w in weights:
        v = kron(*[haar_random_pure(d, rng) for d in dims])
        m += w * np.outer(v, v.conj())
    return DensityMatrix(m, tuple(dims))


# -- serialization -----------------------------------------------------------


def _encode(a: np.ndarray) -> list:
    return np.stack([a.real, a.imag], axis=-1).tolist()


def _decode(raw, ndim: int, what: str) -> np.ndarray:
    try:
        a = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise StateError("parse", f"{what} entries must be [real, imaginary] pairs") from exc
    if a.ndim != ndim + 1 or a.shape[-1] != 2:
        raise StateError("parse", f"{what} must be nested lists of [real, imaginary] pairs")
    return a[..., 0] + 1j * a[..., 1]


def state_to_dict(state: DensityMatrix | PureState) -> dict:
    if isinstance(state, PureState):
        return {"dims": list(state.dims), "vector": _encode(state.vector)}
    return {"dims": list(state.dims), "matrix": _encode(state.matrix)}


def save_state(state: DensityMatrix | PureState) -> str:
    """Serialize to the JSON state-file format."""
    return json.dumps(state_to_dict(state))


def load_state(text: str) -> DensityMatrix:
    """Parse the JSON state-file format; pure states are promoted.

    Raises:
        StateError: On malformed input or when the decoded state violates a
            density-matrix invariant (the error names which one).
    """
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateError("parse", f"invalid JSON: {exc}") from exc
    if not isinstance(payload, dict) or "dims" not in payload:
        raise StateError("parse", "state file needs a 'dims' field")
    try:
        dims = tuple(int(d) for d in payload["dims"])
    except (TypeError, ValueError) as exc:
        raise StateError("parse", "'dims' must be a list of integers") from exc
    if "matrix" in payload:
        return DensityMatrix(_decode(payload["matrix"], 2, "matrix"), dims)
    if "vector" in payload:
        return PureState(_decode(payload["vector"], 1, "vector"), dims).density()
    raise StateError("parse", "state file needs a 'matrix' or 'vector' field")


_FLOAT = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def parse_preset(name: str, dim: int = 2) -> DensityMatrix | None:
    """Build a named preset, or return ``None`` if ``name`` is not one.

    Bipartite presets: ``bell``, ``werner:<p>``, ``bell_diag:<p0>,<p1>,<p2>,<p3>``,
    ``isotropic:<d>:<f>``. Single-system presets: ``ket:<k>`` and ``maxmixed``.
    ``bell``, ``ket`` and ``maxmixed`` take their dimension from ``dim``.
    """
    name = name.strip()
    if name == "bell":
        return bell_state(dim)
    if name == "maxmixed":
        return DensityMatrix(np.eye(dim) / dim, (dim,))
    if m := re.fullmatch(r"ket:(\d+)", name):
        k = int(m.group(1))
        if k >= dim:
            raise StateError("parse", f"ket index {k} out of range for dim {dim}")
        v = np.zeros(dim)
        v[k] = 1
        return PureState(v, (dim,)).density()
    if m := re.fullmatch(rf"werner:({_FLOAT})", name):
        return _preset_call(werner_state, float(m.group(1)))
    if m := re.fullmatch(rf"bell_diag:({_FLOAT}(?:,{_FLOAT}){{3}})", name):
        return _preset_call(bell_diagonal, [float(x) for x in m.group(1).split(",")])
    if m := re.fullmatch(rf"isotropic:(\d+):({_FLOAT})", name):
        return _preset_call(isotropic_state, int(m.group(1)), float(m.group(2)))
    if re.match(r"(werner|bell_diag|isotropic|ket):", name):
        raise StateError("parse", f"malformed preset {name!r}")
    return None


def _preset_call(fn, *args) -> DensityMatrix:
    try:
        return fn(*args)
    except StateError:
        raise
    except ValueError as exc:
        raise StateError("parse", str(exc)) from exc


def state_from_source(source: str, dim: int = 2) -> DensityMatrix:
    """Resolve a preset name or a path to a JSON state file."""
    preset = parse_preset(source, dim)
    if preset is not None:
        return preset
    path = Path(source)
    if not path.is_file():
        raise StateError("parse", f"{source!r} is neither a preset nor a readable file")
    return load_state(path.read_text())
