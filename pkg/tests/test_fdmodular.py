import numpy as np
import pytest

from modent.errors import DegenerateInput, NotFactorial
from modent.fdmodular import (
    axiom_suite,
    complex_structure_matrix,
    complexify,
    cutting_projection_fd,
    entropy_operator_fd,
    from_real_basis,
    invariance_residuals,
    is_factorial,
    make_subspace,
    random_standard,
    random_vector,
    realify,
    subspace_distance,
    symplectic_complement,
    tomita_data,
    vector_entropy_fd,
    vector_entropy_tomita,
)


def _conj(n):
    return np.diag(np.r_[np.ones(n), -np.ones(n)])


def _random_in(H, rng):
    return complexify(H.basis @ rng.standard_normal(H.real_dim))


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def test_realify_roundtrip(rng):
    z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    np.testing.assert_array_equal(complexify(realify(z)), z)
    Jc = complex_structure_matrix(3)
    np.testing.assert_allclose(Jc @ realify(z), realify(1j * z))
    w = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    assert np.vdot(z, w).imag == pytest.approx(-realify(z) @ Jc @ realify(w))


def test_real_line_is_abelian():
    H = make_subspace([[1.0]])
    assert H.standard
    Delta, J = tomita_data(H)
    np.testing.assert_allclose(Delta, np.eye(2), atol=1e-14)
    np.testing.assert_allclose(J, _conj(1), atol=1e-14)
    assert subspace_distance(symplectic_complement(H).basis, H.basis) < 1e-12
    assert not is_factorial(H)
    with pytest.raises(NotFactorial):
        cutting_projection_fd(H)


def test_whole_line_not_separating():
    H = make_subspace([[1.0], [1j]])
    assert H.cyclic and not H.separating
    assert symplectic_complement(H).real_dim == 0


def test_zero_vectors_rejected():
    with pytest.raises(DegenerateInput):
        make_subspace([[0.0, 0.0]])


def test_random_two_dim_is_standard(rng):
    for _ in range(20):
        a, b = rng.standard_normal(2)
        # three real directions in C^2 always meet i times themselves
        H = make_subspace([[1, 0], [0, 1], [1j * a, b + 1j]])
        assert H.real_dim == 3 and H.cyclic and not H.separating
        H = make_subspace(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
        assert H.standard


def test_tomita_relations(rng):
    for n in (1, 2, 3, 4):
        H = random_standard(n, rng)
        Delta, J = tomita_data(H)
        eye = np.eye(2 * n)
        np.testing.assert_allclose(J @ J, eye, atol=1e-9)
        np.testing.assert_allclose(J @ Delta @ J, np.linalg.inv(Delta), atol=1e-8)
        Jc = complex_structure_matrix(n)
        np.testing.assert_allclose(J @ Jc, -Jc @ J, atol=1e-9)
        np.testing.assert_allclose(J.T @ J, eye, atol=1e-9)
        np.testing.assert_allclose(Delta, Delta.T, atol=1e-10)
        assert np.all(np.linalg.eigvalsh(Delta) > 0)
        res = invariance_residuals(H)
        assert res["Delta_is"] < 1e-8 and res["J_H"] < 1e-8
        S = H.modular.S
        psi = _random_in(H, rng)
        np.testing.assert_allclose(complexify(S @ realify(psi)), psi, atol=1e-9)


def test_S_acts_as_conjugation_on_H_plus_iH(rng):
    H = random_standard(3, rng)
    phi, psi = _random_in(H, rng), _random_in(H, rng)
    out = complexify(H.modular.S @ realify(phi + 1j * psi))
    np.testing.assert_allclose(out, phi - 1j * psi, atol=1e-9)


def test_complement_swaps_modular_operator(rng):
    H = random_standard(3, rng)
    Hp = symplectic_complement(H)
    D, _ = tomita_data(H)
    Dp, _ = tomita_data(Hp)
    np.testing.assert_allclose(Dp, np.linalg.inv(D), atol=1e-8)


def test_symplectic_complement_examples(rng):
    R = make_subspace([[1.0]])
    assert subspace_distance(symplectic_complement(R).basis, R.basis) < 1e-12
    for n in (2, 3):
        vecs = rng.standard_normal((n + 1, n)) + 1j * rng.standard_normal((n + 1, n))
        H = make_subspace(vecs[: rng.integers(1, n + 2)])
        Hp = symplectic_complement(H)
        assert H.real_dim + Hp.real_dim == 2 * n
        assert subspace_distance(symplectic_complement(Hp).basis, H.basis) < 1e-9
        # Im<psi, phi> = 0 across
        Jc = complex_structure_matrix(n)
        assert np.max(np.abs(H.basis.T @ Jc @ Hp.basis)) < 1e-12


def test_odd_dimension_never_factorial(rng):
    # eigenvalues of Delta pair up as lambda, 1/lambda, so odd n forces lambda = 1
    for n in (1, 3):
        assert not is_factorial(random_standard(n, rng))
    assert is_factorial(random_standard(2, rng))


def test_cutting_projection(rng):
    for n in (2, 4):
        H = random_standard(n, rng)
        P = cutting_projection_fd(H)
        np.testing.assert_allclose(P @ P, P, atol=1e-8 * max(1, np.linalg.norm(P, 2)))
        phi = _random_in(H, rng)
        Hp = symplectic_complement(H)
        phip = _random_in(Hp, rng)
        np.testing.assert_allclose(P @ realify(phi), realify(phi), atol=1e-8)
        np.testing.assert_allclose(P @ realify(phip), 0.0, atol=1e-8)
        np.testing.assert_allclose(P @ realify(phi + phip), realify(phi), atol=1e-8)
        for method in ("spectral", "direct"):
            np.testing.assert_allclose(cutting_projection_fd(H, method), P, atol=1e-8)
        U = H.modular.unitary(0.7)
        np.testing.assert_allclose(U @ P, P @ U, atol=1e-8)
    with pytest.raises(ValueError):
        cutting_projection_fd(H, "nonsense")


def test_entropy_operator_abelian_is_twice_projection():
    H = make_subspace([[1.0]])
    E = entropy_operator_fd(H).matrix
    onto_iH = np.diag([0.0, 1.0])
    np.testing.assert_allclose(0.5 * E, onto_iH, atol=1e-14)


@pytest.mark.parametrize("a, b", [(1.0, 0.0), (0.3, -2.0), (-1.5, 0.7)])
def test_vector_entropy_on_real_line(a, b):
    H = make_subspace([[1.0]])
    assert vector_entropy_fd(np.array([a + 1j * b]), H) == pytest.approx(2 * b * b, abs=1e-14)


def test_entropy_operator_properties(rng):
    for n in (1, 2, 3, 4):
        H = random_standard(n, rng)
        E = entropy_operator_fd(H)
        assert E.symmetry_defect < 1e-9
        assert E.min_eigenvalue >= -1e-9
        Hp = symplectic_complement(H)
        psi = _random_in(Hp, rng)
        assert abs(vector_entropy_fd(psi, H)) < 1e-9
        if is_factorial(H):
            phi = random_vector(n, rng)
            assert vector_entropy_fd(phi, H) == pytest.approx(vector_entropy_tomita(phi, H), abs=1e-8)
            P = cutting_projection_fd(H)
            Jc = complex_structure_matrix(n)
            # E_H = i P_H i log(Delta) as real matrices (symmetrized)
            M = Jc @ P @ Jc @ H.modular.log_delta
            np.testing.assert_allclose(0.5 * (M + M.T), E.matrix,
                                       atol=1e-8 * max(1, np.linalg.norm(M)))


def test_monotonicity_on_real_subspaces(rng):
    for n in (2, 3, 4):
        H = random_standard(n, rng)
        for d in range(1, n + 1):
            K = from_real_basis(H.basis @ rng.standard_normal((H.real_dim, d)))
            phi = random_vector(n, rng)
            assert vector_entropy_fd(phi, K) <= vector_entropy_fd(phi, H) + 1e-9


def test_axiom_suite_examples():
    rep = axiom_suite(0, 4, seed=1)
    assert rep["violations"] == [] and rep["max_violation"] == {} and rep["trials"] == 0
    rep = axiom_suite(200, 4, seed=3)
    assert rep["violations"] == []
    assert rep["skipped"] == 0
    assert max(rep["max_violation"].values()) <= 1e-8


def test_axiom_suite_detects_mutation():
    rep = axiom_suite(30, 4, seed=0, mutate=True)
    axioms = {v["axiom"] for v in rep["violations"]}
    assert "locality" in axioms


def test_axiom_suite_deterministic():
    assert axiom_suite(25, 3, seed=9) == axiom_suite(25, 3, seed=9)
