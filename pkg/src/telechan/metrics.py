"""Relative-entropy measures of teleportation success and the Holevo link.

All quantities are in bits. Haar averages over pure inputs are Monte Carlo
estimates driven by an integer seed; two calls with the same seed and
dimension see the same input states, which is what pairs the ``F`` and
``C`` estimates in :func:`capacity_bound_check`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSpec, apply, spectrum_of
from .states import DensityMatrix, OperatorBasis, bell_basis
from .tensor_core import CLIP_THRESHOLD, haar_random_pure_batch, kron, matrix_log2_on_support

DEFAULT_SAMPLES = 10_000
_CHUNK = 1 << 16


@dataclass
class MetricReport:
    """A named scalar in bits with optional Monte Carlo metadata."""

    name: str
    value: float
    stderr: float | None = None
    samples: int | None = None
    seed: int | None = None
    notes: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.stderr is None) != (self.samples is None):
            raise ValueError("stderr and samples must be given together")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": _jsonable(self.value),
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
            "notes": list(self.notes),
            "details": {k: _jsonable(v) for k, v in self.details.items()},
        }


def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


def _basis(dim: int, basis: OperatorBasis | None) -> OperatorBasis:
    basis = basis or bell_basis(dim)
    if basis.dim != dim:
        raise ValueError(f"basis dimension {basis.dim} does not match {dim}")
    return basis


def _pair_dim(resource: DensityMatrix) -> int:
    if len(resource.dims) != 2 or resource.dims[0] != resource.dims[1]:
        raise ValueError(f"resource must be a d x d pair, got dims {resource.dims}")
    return resource.dims[0]


def von_neumann_entropy(state: DensityMatrix) -> float:
    w = np.linalg.eigvalsh(state.matrix)
    w = w[w > CLIP_THRESHOLD]
    return float(-np.sum(w * np.log2(w)))


def relative_entropy(
    rho: DensityMatrix, omega: DensityMatrix, threshold: float = CLIP_THRESHOLD
) -> float:
    """Quantum relative entropy ``S(rho || omega)`` in bits.

    Returns ``inf`` when the support of ``rho`` is not contained in that of
    ``omega``, i.e. when ``Tr[rho (1 - P_omega)]`` exceeds ``threshold``.
    """
    if rho.dims != omega.dims:
        raise ValueError(f"dimension mismatch: {rho.dims} vs {omega.dims}")
    log_omega, support = matrix_log2_on_support(omega.matrix, threshold)
    leak = 1.0 - float(np.sum(support.T * rho.matrix).real)
    if leak > threshold:
        return math.inf
    log_rho, _ = matrix_log2_on_support(rho.matrix, threshold)
    return float(np.sum((log_rho - log_omega).T * rho.matrix).real)


def singlet_fraction(resource: DensityMatrix, basis: OperatorBasis | None = None) -> float:
    """Overlap ``Tr[E0 chi]`` with the principal maximally entangled state."""
    basis = _basis(_pair_dim(resource), basis)
    return float(np.sum(basis.bell_projectors[0].T * resource.matrix).real)


def canonicalize_resource(
    resource: DensityMatrix, basis: OperatorBasis | None = None
) -> tuple[DensityMatrix, int]:
    """Relabel locally so the principal Bell projection is the largest.

    Conjugating the first half by ``U_k^H`` moves ``Tr[E^k chi]`` into slot 0.
    Returns the relabeled resource and ``k`` (smallest index on ties).
    """
    d = _pair_dim(resource)
    basis = _basis(d, basis)
    probs = spectrum_of(resource, basis).probs
    k = int(np.argmax(probs))
    if k == 0:
        return resource, 0
    g = kron(basis.unitaries[k].conj().T, np.eye(d))
    return DensityMatrix(g @ resource.matrix @ g.conj().T, resource.dims), k


def entswap_success(resource: DensityMatrix, basis: OperatorBasis | None = None) -> float:
    """``S(Psi+ || swap output) = -log2 F`` with ``F`` the singlet fraction."""
    f = singlet_fraction(resource, basis)
    if f <= CLIP_THRESHOLD:
        return math.inf
    return float(-np.log2(f))


def holevo_capacity(
    state: DensityMatrix, spec: ChannelSpec, basis: OperatorBasis | None = None
) -> float:
    """Holevo quantity of the letters ``W_i rho W_i^H`` with priors ``p_i``."""
    basis = _basis(spec.dim, basis)
    average = apply(spec, state, basis)
    total = 0.0
    for p, w in zip(spec.probs, basis.channel_unitaries):
        if p == 0.0:
            continue
        letter = DensityMatrix(w @ state.matrix @ w.conj().T, state.dims)
        total += p * relative_entropy(letter, average)
    return float(total)


def _pure_input_terms(
    spec: ChannelSpec, basis: OperatorBasis, samples: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample ``S(psi || L psi)`` and ``S(L psi)`` over Haar inputs."""
    rng = np.random.default_rng(seed)
    ops = [(p, w) for p, w in zip(spec.probs, basis.channel_unitaries) if p != 0.0]
    rel, ent = [], []
    for start in range(0, samples, _CHUNK):
        psi = haar_random_pure_batch(spec.dim, min(_CHUNK, samples - start), rng)
        rho = psi[:, :, None] * psi[:, None, :].conj()
        omega = sum(p * (w @ rho @ w.conj().T) for p, w in ops)
        lam, vec = np.linalg.eigh(omega)
        on = lam > CLIP_THRESHOLD
        overlap = np.abs(np.einsum("nij,ni->nj", vec.conj(), psi)) ** 2
        safe = np.where(on, lam, 1.0)
        logs = np.where(on, np.log2(safe), 0.0)
        r = -np.sum(overlap * logs, axis=1)
        leak = np.sum(np.where(on, 0.0, overlap), axis=1)
        rel.append(np.where(leak > CLIP_THRESHOLD, np.inf, r))
        ent.append(-np.sum(np.where(on, lam * logs, 0.0), axis=1))
    return np.concatenate(rel), np.concatenate(ent)


def _mean_stderr(x: np.ndarray) -> tuple[float, float]:
    if x.size == 0:
        return math.nan, math.nan
    se = float(np.std(x, ddof=1) / np.sqrt(x.size)) if x.size > 1 else 0.0
    return float(np.mean(x)), se


def _prepare(resource, basis, canonicalize):
    d = _pair_dim(resource)
    basis = _basis(d, basis)
    notes = []
    k = 0
    if canonicalize:
        resource, k = canonicalize_resource(resource, basis)
        if k:
            notes.append(f"resource relabeled by unitary {basis.labels[k]} so p0 is maximal")
    return resource, basis, spectrum_of(resource, basis), k, notes


def teleport_success(
    resource: DensityMatrix,
    basis: OperatorBasis | None = None,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    canonicalize: bool = True,
) -> MetricReport:
    """Haar average of ``S(psi || L psi)`` over pure single-system inputs.

    Samples with infinite relative entropy (support violations, possible only
    when some ``p_i = 0``) are counted in ``details`` and excluded from the
    mean.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    resource, basis, spec, k, notes = _prepare(resource, basis, canonicalize)
    rel, _ = _pure_input_terms(spec, basis, samples, seed)
    finite = rel[np.isfinite(rel)]
    mean, se = _mean_stderr(finite)
    n_inf = int(rel.size - finite.size)
    if n_inf:
        notes.append(f"{n_inf} samples had infinite relative entropy and were excluded")
    bound = math.log2(spec.dim)
    over = int(np.sum(finite > bound + 1e-9))
    if over:
        notes.append(f"{over} individual samples exceed log2(d) = {bound:g}")
    return MetricReport(
        "teleport_success",
        mean,
        stderr=se,
        samples=samples,
        seed=seed,
        notes=notes,
        details={"relabeling": k, "infinite_samples": n_inf, "samples_above_log2d": over},
    )


def capacity_bound_check(
    resource: DensityMatrix,
    basis: OperatorBasis | None = None,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    sigmas: float = 3.0,
    atol: float = 1e-9,
) -> MetricReport:
    """Paired Monte Carlo test of ``mean S(psi||L psi) <= mean C(psi)``.

    For a pure input the Holevo quantity of the rotated letters reduces to
    ``S(L psi)``. Both are evaluated on the same Haar draws and the check
    passes when the mean difference is at most ``sigmas`` standard errors of
    the paired difference (plus ``atol`` for exact ties). The resource is
    always canonicalized first.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    resource, basis, spec, k, notes = _prepare(resource, basis, True)
    rel, cap = _pure_input_terms(spec, basis, samples, seed)
    ok = np.isfinite(rel)
    n_inf = int(rel.size - ok.sum())
    if n_inf:
        notes.append(f"{n_inf} samples had infinite relative entropy and were excluded")
    f_mean, f_se = _mean_stderr(rel[ok])
    c_mean, c_se = _mean_stderr(cap[ok])
    diff, diff_se = _mean_stderr(rel[ok] - cap[ok])
    passed = bool(diff <= sigmas * diff_se + atol)
    return MetricReport(
        "capacity_bound",
        diff,
        stderr=diff_se,
        samples=samples,
        seed=seed,
        notes=notes,
        details={
            "teleport_success": f_mean,
            "teleport_success_stderr": f_se,
            "mean_capacity": c_mean,
            "mean_capacity_stderr": c_se,
            "relabeling": k,
            "infinite_samples": n_inf,
            "passed": passed,
        },
    )
