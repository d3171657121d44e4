import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phasecrit.chains import (
    DensityMatrix,
    FiniteChain,
    ModelSpec,
    build_hamiltonian,
    ground_states,
    reduce_density,
    sector_basis,
    solve,
)


def bogoliubov_even_energy(lam, gamma, n):
    """Even-parity ground energy of the XY ring from the free-fermion dispersion."""
    k = np.pi * (2 * np.arange(n) + 1) / n
    eps = 2 * np.sqrt((1 - lam * np.cos(k)) ** 2 + (lam * gamma * np.sin(k)) ** 2)
    return -0.5 * eps.sum()


def test_xy_field_only_two_sites():
    h = build_hamiltonian(ModelSpec.xy(0.0, 0.5), FiniteChain(2)).matrix.toarray()
    assert np.allclose(h, -np.diag([2.0, 0.0, 0.0, -2.0]))
    b = solve(ModelSpec.xy(0.0, 0.5), FiniteChain(2))
    assert b.energy == pytest.approx(-2.0, abs=1e-12)
    assert b.degeneracy == 1
    assert abs(b.states[0][0]) == pytest.approx(1.0)


def test_xxz_free_two_sites():
    h = build_hamiltonian(ModelSpec.xxz(0.0), FiniteChain(2)).matrix.toarray()
    evals, evecs = np.linalg.eigh(h)
    assert evals[0] == pytest.approx(-1.0, abs=1e-12)
    singlet = np.array([0, 1, -1, 0]) / math.sqrt(2)
    assert abs(evecs[:, 0] @ singlet) == pytest.approx(1.0, abs=1e-12)


def test_ising_critical_matches_free_fermions():
    b = solve(ModelSpec.xy(1.0, 1.0), FiniteChain(8))
    assert b.energy == pytest.approx(bogoliubov_even_energy(1.0, 1.0, 8), abs=1e-10)
    # closed form at the critical point: -2 sum |sin(k/2)|
    k = np.pi * (2 * np.arange(8) + 1) / 8
    assert b.energy == pytest.approx(-2 * np.abs(np.sin(k / 2)).sum(), abs=1e-10)


@settings(max_examples=15, deadline=None)
@given(lam=st.floats(0.0, 3.0), gamma=st.floats(0.0, 1.0))
def test_even_sector_matches_bogoliubov(lam, gamma):
    ham = build_hamiltonian(ModelSpec.xy(lam, gamma), FiniteChain(6), parity=0)
    e0 = np.linalg.eigvalsh(ham.matrix.toarray())[0]
    assert e0 == pytest.approx(bogoliubov_even_energy(lam, gamma, 6), abs=1e-9)


@pytest.mark.parametrize("n", [4, 7, 10])
def test_field_only_ground_state_is_all_up(n):
    b = solve(ModelSpec.xy(0.0, 0.5), FiniteChain(n))
    assert b.degeneracy == 1
    assert b.energy == pytest.approx(-n)
    assert abs(b.states[0][0]) == pytest.approx(1.0, abs=1e-9)


def test_ferromagnet_degeneracy():
    b = solve(ModelSpec.xxz(-2.0), FiniteChain(8))
    assert b.degeneracy == 2
    rho = reduce_density(b, [0, 1]).entries
    assert np.allclose(rho, np.diag([0.5, 0, 0, 0.5]), atol=1e-12)


def test_factorization_level_crossing():
    lam_f = 1 / math.sqrt(1 - 0.25)
    b = solve(ModelSpec.xy(lam_f, 0.5), FiniteChain(10))
    # the two parity sectors cross exactly at the factorizing field
    e = [np.linalg.eigvalsh(build_hamiltonian(ModelSpec.xy(lam_f, 0.5), FiniteChain(10), parity=p)
                            .matrix.toarray())[0] for p in (0, 1)]
    assert abs(e[0] - e[1]) < 1e-6
    assert b.degeneracy == 2 or (b.gap is not None and b.gap < 1e-6)


def test_residuals_and_orthogonality():
    b = solve(ModelSpec.xxz(-2.0), FiniteChain(12))
    ham = build_hamiltonian(ModelSpec.xxz(-2.0), FiniteChain(12))
    for s in b.states:
        assert np.linalg.norm(ham.matrix @ s - b.energy * s) <= 1e-8
    assert abs(b.states[0] @ b.states[1]) <= 1e-8


def test_lanczos_not_below_dense():
    model, chain = ModelSpec.xxz(0.5), FiniteChain(12)
    ham = build_hamiltonian(model, chain, n_down=6)
    dense = np.linalg.eigvalsh(ham.matrix.toarray())[0]
    lanczos = ground_states(ham, k=1).energy
    assert lanczos >= dense - 1e-8
    assert lanczos == pytest.approx(dense, abs=1e-8)


@pytest.mark.parametrize("delta", [-0.5, 0.0, 1.0, 2.0])
def test_sector_ground_state_is_global(delta):
    full = solve(ModelSpec.xxz(delta), FiniteChain(10), full_space=True)
    sector = solve(ModelSpec.xxz(delta), FiniteChain(10))
    assert sector.energy == pytest.approx(full.energy, abs=1e-8)


def test_sz_conservation():
    ham = build_hamiltonian(ModelSpec.xxz(0.7), FiniteChain(8)).matrix.toarray()
    assert np.max(np.abs(ham - ham.T)) <= 1e-12
    sz = np.array([8 - 2 * bin(s).count("1") for s in range(2 ** 8)], dtype=float)
    comm = ham * sz[None, :] - sz[:, None] * ham
    assert np.max(np.abs(comm)) <= 1e-12


def test_xy_parity_conservation():
    ham = build_hamiltonian(ModelSpec.xy(0.8, 0.4), FiniteChain(6)).matrix.toarray()
    parity = np.array([(-1) ** bin(s).count("1") for s in range(2 ** 6)], dtype=float)
    assert np.max(np.abs(ham * parity[None, :] - parity[:, None] * ham)) <= 1e-12


def test_sector_basis_sizes():
    assert sector_basis(10, n_down=5).size == math.comb(10, 5)
    assert sector_basis(8, parity=1).size == 128


@pytest.mark.parametrize("model", [ModelSpec.xxz(0.3), ModelSpec.xy(0.7, 0.5)])
def test_translation_invariance(model):
    b = solve(model, FiniteChain(10))
    assert b.degeneracy == 1
    ref = reduce_density(b, [0, 2]).entries
    for i in range(1, 10):
        rho = reduce_density(b, [i, (i + 2) % 10]).entries
        assert np.max(np.abs(rho - ref)) <= 1e-9


def test_reduce_density_invariants():
    b = solve(ModelSpec.xy(1.3, 0.5), FiniteChain(10))
    for sites in ([3], [0, 1], [2, 3, 4]):
        rho = reduce_density(b, sites)
        assert rho.n_sites == len(sites)
        assert np.trace(rho.entries) == pytest.approx(1.0, abs=1e-12)
        assert np.max(np.abs(rho.entries - rho.entries.T)) <= 1e-12
        assert np.linalg.eigvalsh(rho.entries)[0] >= -1e-10


def test_reduce_density_all_up():
    b = solve(ModelSpec.xy(0.0, 0.5), FiniteChain(6))
    assert np.allclose(reduce_density(b, [0]).entries, np.diag([1.0, 0.0]))


@pytest.mark.parametrize("sites", [[0, 0], [0, 1, 2, 3], [9]])
def test_reduce_density_rejects_bad_sites(sites):
    b = solve(ModelSpec.xy(0.0, 0.5), FiniteChain(6))
    with pytest.raises(ValueError):
        reduce_density(b, sites)


@pytest.mark.parametrize("kwargs", [dict(lam=-1.0, gamma=0.5), dict(lam=1.0, gamma=1.5)])
def test_invalid_couplings(kwargs):
    with pytest.raises(ValueError):
        ModelSpec.xy(**kwargs)


def test_invalid_chain():
    with pytest.raises(ValueError):
        FiniteChain(1)
    with pytest.raises(ValueError):
        FiniteChain(30)


def test_density_matrix_rejects_unphysical():
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.2, -0.2]))
