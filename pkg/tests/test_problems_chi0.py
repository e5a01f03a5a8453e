import numpy as np
import pytest

from poleshift.chi0 import Chi0Problem, apply_chi0, chi0_sum_over_states, make_chi0_problem
from poleshift.pencil import Pencil, cholesky, dense_generalized_eig
from poleshift.problems import HamiltonianSpec, gen_grid_hamiltonian, gen_random_pencil

WELLS = dict(points=64, length=10.0, potential="gaussian", centers=[3.0, 7.0, 5.0],
             depths=[-4.0, -4.0, -3.0], width=0.6)


def test_free_particle_spectrum():
    gh = gen_grid_hamiltonian(points=8, length=2.0)
    h = 2.0 / 8
    ref = np.sort((1 - np.cos(2 * np.pi * np.arange(8) / 8)) / h**2)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(gh.pencil.H.toarray())), ref, atol=1e-12)


def test_gaussian_well_binds():
    gh = gen_grid_hamiltonian(points=64, length=10.0, potential="gaussian", depths=[-5.0], seed=0)
    assert np.linalg.eigvalsh(gh.pencil.H.toarray()).min() < 0


def test_seed_determinism():
    a = gen_grid_hamiltonian(points=32, potential="gaussian", depths=[-1.0, -2.0], seed=9)
    b = gen_grid_hamiltonian(points=32, potential="gaussian", depths=[-1.0, -2.0], seed=9)
    assert (a.pencil.H.A != b.pencil.H.A).nnz == 0


def test_potential_from_file(tmp_path):
    V = np.linspace(0, 1, 16)
    np.savetxt(tmp_path / "v.txt", V)
    gh = gen_grid_hamiltonian(points=16, potential=str(tmp_path / "v.txt"))
    np.testing.assert_allclose(gh.V, V)


def test_spec_json_roundtrip():
    s = HamiltonianSpec(**WELLS)
    assert HamiltonianSpec.from_json(s.to_json()) == s


@pytest.mark.parametrize("kw", [{"points": 0}, {"dim": 3}])
def test_bad_grid(kw):
    with pytest.raises(ValueError):
        gen_grid_hamiltonian(**kw)


def test_two_dimensional_grid_is_symmetric():
    gh = gen_grid_hamiltonian(dim=2, points=6, potential="gaussian", depths=[-1.0])
    H = gh.pencil.H.toarray()
    assert H.shape == (36, 36) and np.allclose(H, H.T)


def test_random_pencil_positive_case():
    pencil, eig, split = gen_random_pencil(20, seed=0)
    assert split is None and np.all(eig.lambdas > 0)
    cholesky(pencil.S)


def test_random_pencil_rejects_all_negative():
    with pytest.raises(ValueError):
        gen_random_pencil(5, n_negative=5)


@pytest.fixture(scope="module")
def chi0_setup():
    gh = gen_grid_hamiltonian(**WELLS)
    g = np.random.default_rng(0).standard_normal(gh.n)
    prob, shifted = make_chi0_problem(gh.pencil, 4, g, [0.0, 0.5, 2.0])
    return prob, shifted


def test_zero_perturbation(chi0_setup):
    prob, shifted = chi0_setup
    zero = Chi0Problem(prob.n_occ, prob.energies, prob.psi, np.zeros(shifted.n), prob.omegas,
                       prob.unocc_bounds)
    assert not np.any(apply_chi0(zero, shifted, P=20).values)


@pytest.mark.parametrize("method", ["pole", "lanczos"])
def test_matches_sum_over_states(chi0_setup, method):
    prob, shifted = chi0_setup
    res = apply_chi0(prob, shifted, method=method)
    ref = chi0_sum_over_states(shifted, prob)
    for v, r in zip(res.values, ref):
        assert np.linalg.norm(v - r) <= 1e-6 * np.linalg.norm(r)


def test_static_response_is_negative(chi0_setup):
    prob, shifted = chi0_setup
    res = apply_chi0(prob, shifted)
    assert prob.g @ res.values[0] <= 0


def test_responses_orthogonal_to_occupied(chi0_setup):
    prob, shifted = chi0_setup
    res = apply_chi0(prob, shifted)
    for U in res.responses:
        for i in range(prob.n_occ):
            assert np.max(np.abs(prob.psi.T @ U[i])) <= 1e-6 * np.linalg.norm(U[i])


def test_basis_reused_across_frequencies(chi0_setup):
    prob, shifted = chi0_setup
    assert apply_chi0(prob, shifted, P=40).basis_solves == 4 * 20


def test_problem_validation(chi0_setup):
    prob, _ = chi0_setup
    with pytest.raises(ValueError):
        Chi0Problem(prob.n_occ, prob.energies, 2 * prob.psi, prob.g, [0.0])
    with pytest.raises(ValueError):
        Chi0Problem(prob.n_occ, prob.energies, prob.psi, prob.g, [1j])
    with pytest.raises(ValueError):
        Chi0Problem(prob.n_occ, prob.energies + 1.0, prob.psi, prob.g, [0.0])


def test_unknown_method(chi0_setup):
    prob, shifted = chi0_setup
    with pytest.raises(ValueError):
        apply_chi0(prob, shifted, method="exact")


def test_occupied_levels_shifted_to_zero(chi0_setup):
    prob, shifted = chi0_setup
    lam = np.sort(dense_generalized_eig(shifted).lambdas)
    assert lam[3] == pytest.approx(0, abs=1e-10)
    assert prob.unocc_bounds.m == pytest.approx(lam[4])
