import json

import numpy as np
import pytest

from telechan.entanglement import is_ppt
from telechan.states import (
    DensityMatrix,
    PureState,
    StateError,
    bell_basis,
    bell_diagonal,
    isotropic_state,
    load_state,
    parse_preset,
    pauli,
    random_separable,
    random_state,
    save_state,
    state_from_source,
    weyl,
    werner_state,
)
from telechan.tensor_core import kron, max_abs_diff


def test_pauli_algebra():
    assert max_abs_diff(pauli(0), np.eye(2)) == 0
    assert max_abs_diff(pauli(3) @ pauli(3), np.eye(2)) == 0
    assert max_abs_diff(pauli(1) @ pauli(2), 1j * pauli(3)) == 0
    with pytest.raises(IndexError):
        pauli(4)


def test_weyl_reduces_to_paulis():
    # d=2: exp(i pi k) on the diagonal is Z; |k><k+1| is X
    assert max_abs_diff(weyl(2, 1, 0), pauli(3)) < 1e-15
    assert max_abs_diff(weyl(2, 0, 1), pauli(1)) < 1e-15


@pytest.mark.parametrize("d", [2, 3, 5])
def test_weyl_identity_and_unitarity(d):
    assert max_abs_diff(weyl(d, 0, 0), np.eye(d)) == 0
    u = weyl(d, 1, 1)
    assert max_abs_diff(u @ u.conj().T, np.eye(d)) < 1e-14


def test_weyl_entry_formula():
    u = weyl(3, 1, 2)
    w = np.exp(2j * np.pi / 3)
    assert abs(u[1, 0] - w) < 1e-15  # row k=1, column 1+2 mod 3 = 0
    assert abs(u[2, 1] - w**2) < 1e-15
    with pytest.raises(IndexError):
        weyl(3, 3, 0)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_weyl_hilbert_schmidt_orthogonality(d):
    ops = [weyl(d, n, m) for n in range(d) for m in range(d)]
    gram = np.array([[np.trace(a.conj().T @ b) for b in ops] for a in ops])
    assert max_abs_diff(gram, d * np.eye(d * d)) < 1e-10


@pytest.mark.parametrize("d", [2, 3, 4])
def test_bell_basis_invariants(d):
    basis = bell_basis(d)
    assert basis.size == d * d
    e0 = basis.bell_projectors[0]
    for u, e in zip(basis.unitaries, basis.bell_projectors):
        assert max_abs_diff(u @ u.conj().T, np.eye(d)) < 1e-10
        g = kron(u, np.eye(d))
        assert max_abs_diff(e, g @ e0 @ g.conj().T) < 1e-10
    gram = np.array([[np.trace(a @ b).real for b in basis.bell_projectors] for a in basis.bell_projectors])
    assert max_abs_diff(gram, np.eye(d * d)) < 1e-10
    assert max_abs_diff(sum(basis.bell_projectors), np.eye(d * d)) < 1e-10


def test_bell_basis_qubit_principal():
    e0 = bell_basis(2).bell_projectors[0]
    psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert max_abs_diff(e0, np.outer(psi, psi)) < 1e-15
    assert bell_basis(2).family == "pauli"
    assert bell_basis(3).family == "weyl"
    assert bell_basis(3).labels[:3] == ((0, 0), (0, 1), (0, 2))


def test_qubit_weyl_family_differs_by_phase_only():
    pauli_basis = bell_basis(2)
    weyl_basis = bell_basis(2, "weyl")
    # Weyl order (n, m): (0,0)=I, (0,1)=X, (1,0)=Z, (1,1)=ZX ~ Y
    for i, j in [(0, 0), (1, 1), (3, 2), (2, 3)]:
        a, b = pauli_basis.bell_projectors[i], weyl_basis.bell_projectors[j]
        assert max_abs_diff(a, b) < 1e-15


def test_werner_state():
    e0 = bell_basis(2).bell_projectors[0]
    assert max_abs_diff(werner_state(1).matrix, e0) < 1e-15
    assert max_abs_diff(werner_state(0).matrix, np.eye(4) / 4) < 1e-15
    for p in (0.1, 0.5, 0.77):
        assert abs(np.trace(e0 @ werner_state(p).matrix) - (1 + 3 * p) / 4) < 1e-15
    with pytest.raises(ValueError):
        werner_state(1.2)


def test_bell_diagonal_examples():
    e0 = bell_basis(2).bell_projectors[0]
    assert max_abs_diff(bell_diagonal([1, 0, 0, 0]).matrix, e0) == 0
    assert max_abs_diff(bell_diagonal([0.25] * 4).matrix, np.eye(4) / 4) < 1e-15
    half = bell_diagonal([0.5, 0.5, 0, 0])
    assert np.linalg.matrix_rank(half.matrix) == 2
    assert is_ppt(half)


@pytest.mark.parametrize("bad", [[0.5, 0.5, 0.1, 0], [1.2, -0.2, 0, 0], [0.5, 0.5]])
def test_bell_diagonal_rejects_invalid(bad):
    with pytest.raises(ValueError):
        bell_diagonal(bad)


def test_bell_diagonal_eigenvalues_are_probs(rng):
    for _ in range(20):
        p = rng.dirichlet(np.ones(4))
        w = np.linalg.eigvalsh(bell_diagonal(p).matrix)
        assert np.allclose(np.sort(w), np.sort(p), atol=1e-10)
    basis = bell_basis(3)
    p = rng.dirichlet(np.ones(9))
    w = np.linalg.eigvalsh(bell_diagonal(p, basis).matrix)
    assert np.allclose(np.sort(w), np.sort(p), atol=1e-10)


def test_isotropic_state_singlet_fraction():
    for d, f in [(2, 0.6), (3, 0.2), (3, 1.0)]:
        s = isotropic_state(d, f)
        e0 = bell_basis(d).bell_projectors[0]
        assert abs(np.trace(e0 @ s.matrix).real - f) < 1e-14
    # for qubits the isotropic and Werner families coincide
    assert max_abs_diff(isotropic_state(2, 0.7).matrix, werner_state(0.6).matrix) < 1e-15


def test_density_matrix_validation():
    with pytest.raises(StateError) as err:
        DensityMatrix(np.eye(2) * 0.45, (2,))
    assert err.value.invariant == "trace"
    with pytest.raises(StateError) as err:
        DensityMatrix(np.diag([1.1, -0.1]), (2,))
    assert err.value.invariant == "positivity"
    assert abs(err.value.deviation - 0.1) < 1e-12
    with pytest.raises(StateError) as err:
        DensityMatrix(np.array([[0.5, 0.1], [0.0, 0.5]]), (2,))
    assert err.value.invariant == "hermiticity"
    with pytest.raises(StateError) as err:
        DensityMatrix(np.eye(4) / 4, (2, 3))
    assert err.value.invariant == "shape"


def test_density_matrix_is_read_only():
    s = werner_state(0.5)
    with pytest.raises(ValueError):
        s.matrix[0, 0] = 1


def test_pure_state_norm():
    with pytest.raises(StateError) as err:
        PureState([1, 1], (2,))
    assert err.value.invariant == "norm"
    assert max_abs_diff(PureState([0, 1], (2,)).density().matrix, np.diag([0, 1])) == 0


def test_save_load_round_trip(rng):
    s = werner_state(0.7)
    assert max_abs_diff(load_state(save_state(s)).matrix, s.matrix) <= 1e-15
    r = random_state((3, 3), rng)
    back = load_state(save_state(r))
    assert back.dims == (3, 3)
    assert max_abs_diff(back.matrix, r.matrix) <= 1e-15


def test_load_pure_vector():
    text = json.dumps({"dims": [2], "vector": [[0.6, 0.0], [0.0, 0.8]]})
    s = load_state(text)
    assert max_abs_diff(s.matrix, np.array([[0.36, -0.48j], [0.48j, 0.64]])) < 1e-15


def _matrix_text(m, dims):
    return json.dumps({"dims": dims, "matrix": np.stack([m.real, m.imag], -1).tolist()})


def test_load_reports_trace_violation():
    with pytest.raises(StateError, match="trace") as err:
        load_state(_matrix_text(np.eye(2) * 0.45, [2]))
    assert abs(err.value.deviation - 0.1) < 1e-12


def test_load_reports_positivity_violation():
    with pytest.raises(StateError, match="positivity"):
        load_state(_matrix_text(np.diag([1.1, -0.1]), [2]))


@pytest.mark.parametrize(
    "text", ["not json", "{}", '{"dims": [2]}', '{"dims": [2], "matrix": [[1, 0], [0, 0]]}']
)
def test_load_parse_errors(text):
    with pytest.raises(StateError) as err:
        load_state(text)
    assert err.value.invariant == "parse"


def test_presets():
    assert max_abs_diff(parse_preset("bell").matrix, bell_basis(2).bell_projectors[0]) == 0
    assert max_abs_diff(parse_preset("werner:0.3").matrix, werner_state(0.3).matrix) == 0
    bd = parse_preset("bell_diag:0.4,0.3,0.2,0.1")
    assert max_abs_diff(bd.matrix, bell_diagonal([0.4, 0.3, 0.2, 0.1]).matrix) == 0
    assert parse_preset("isotropic:3:0.5").dims == (3, 3)
    assert parse_preset("bell", dim=3).dims == (3, 3)
    assert parse_preset("ket:1").matrix[1, 1] == 1
    assert parse_preset("maxmixed", dim=3).dims == (3,)
    assert parse_preset("some/file.json") is None


@pytest.mark.parametrize("name", ["werner:2", "bell_diag:0.5,0.5", "bell_diag:0.5,0.6,0,0", "ket:5", "ket:x"])
def test_bad_presets(name):
    with pytest.raises(StateError):
        parse_preset(name)


def test_state_from_file(tmp_path):
    path = tmp_path / "w.json"
    path.write_text(save_state(werner_state(0.25)))
    assert max_abs_diff(state_from_source(str(path)).matrix, werner_state(0.25).matrix) == 0
    with pytest.raises(StateError):
        state_from_source(str(tmp_path / "missing.json"))


def test_random_separable_is_ppt(rng):
    for _ in range(20):
        assert is_ppt(random_separable(rng))
