import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phasecrit.chains import FiniteChain, ModelSpec, reduce_density, solve
from phasecrit.correlators import (
    PAULI,
    CorrelatorSet,
    FreeFermionXY,
    THREE_POINT_LABELS,
    TripleCorrelatorInput,
    UnphysicalInputError,
    build_rho_pair,
    build_rho_single,
    build_rho_triple,
    ed_correlators,
    extrapolate_inverse_n,
    ferro_correlators,
    pauli_expectation,
    pfaffian,
    xxz_correlators,
    xy_thermo_correlators,
    xy_thermo_triple,
)

LAM_F = 1 / math.sqrt(1 - 0.25)


def test_field_only_limit():
    assert xy_thermo_correlators(0.0, 0.5, 1).as_tuple() == pytest.approx((1, 0, 0, 1), abs=1e-12)


def test_thermo_matches_ed_off_critical():
    th = xy_thermo_correlators(0.5, 0.5, 1).as_tuple()
    ed = ed_correlators(ModelSpec.xy(0.5, 0.5), 16, 1).as_tuple()
    assert np.max(np.abs(np.subtract(th, ed))) <= 2e-3


def test_ordered_phase_matches_ed():
    th = xy_thermo_correlators(2.0, 0.5, 1).as_tuple()
    ed = ed_correlators(ModelSpec.xy(2.0, 0.5), 16, 1).as_tuple()
    assert np.max(np.abs(np.subtract(th, ed))) <= 1e-4


# 21 points with |lam - 1| >= 0.4 and gamma >= 0.5: the N=16 ring is converged to 1e-3
# there.  Closer to lam=1, or at small gamma in the ordered phase, the correlation
# length is comparable to the ring and finite-size errors reach 1e-2.
ORACLE_GRID = list(itertools.product((0.2, 0.4, 0.6, 1.6, 2.0, 2.5, 3.0), (0.5, 0.8, 1.0)))


@pytest.mark.slow
@pytest.mark.parametrize("lam,gamma", ORACLE_GRID)
def test_oracle_grid(lam, gamma):
    bundle = solve(ModelSpec.xy(lam, gamma), FiniteChain(16))
    for m in (1, 2, 3):
        th = xy_thermo_correlators(lam, gamma, m).as_tuple()
        ed = ed_correlators(ModelSpec.xy(lam, gamma), 16, m, bundle=bundle).as_tuple()
        assert np.max(np.abs(np.subtract(th, ed))) <= 1e-3, (lam, gamma, m)


def test_factorization_distance_independence():
    ref = xy_thermo_correlators(LAM_F, 0.5, 1)
    for m in (5, 20):
        c = xy_thermo_correlators(LAM_F, 0.5, m)
        for a in ("xx", "yy", "zz"):
            assert getattr(c, a) == pytest.approx(getattr(ref, a), abs=1e-8)


def test_factorized_state_is_product():
    c = xy_thermo_correlators(LAM_F, 0.5, 3)
    # a product of identical tilted spins: <zz> = mz^2 and <yy> = 0
    assert c.zz == pytest.approx(c.mz ** 2, abs=1e-9)
    assert c.yy == pytest.approx(0.0, abs=1e-9)


def test_zz_clusters_at_long_range():
    c = xy_thermo_correlators(2.0, 0.5, 40)
    assert c.zz == pytest.approx(c.mz ** 2, abs=1e-6)


@pytest.mark.parametrize("lam", [0.3, 0.9, 1.0, 1.7])
def test_correlators_in_range_and_physical(lam):
    for m in (1, 2, 7):
        c = xy_thermo_correlators(lam, 0.5, m)
        assert all(-1 <= v <= 1 for v in c.as_tuple())
        assert c.is_physical()


def test_pair_state_is_reflection_symmetric():
    rho = build_rho_pair(xy_thermo_correlators(1.3, 0.5, 2)).entries
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.array_equal(swap @ rho @ swap, rho)


def test_ed_reflection_symmetry():
    b = solve(ModelSpec.xy(0.7, 0.5), FiniteChain(10))
    fwd = reduce_density(b, [2, 4]).entries
    back = reduce_density(b, [4, 2]).entries
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.max(np.abs(swap @ fwd @ swap - back)) <= 1e-12


def test_ferro_correlators():
    assert ferro_correlators(1).as_tuple() == (0, 0, 0, 1)
    assert ferro_correlators(20).as_tuple() == (0, 0, 0, 1)
    assert xxz_correlators(-2.0, 1).as_tuple() == (0, 0, 0, 1)


def test_ed_ferro_branch():
    ed = ed_correlators(ModelSpec.xxz(-1.5), 12, 1).as_tuple()
    assert np.max(np.abs(np.subtract(ed, ferro_correlators(1).as_tuple()))) <= 1e-10


def test_ed_distance_guard():
    with pytest.raises(ValueError):
        ed_correlators(ModelSpec.xxz(0.0), 8, 4)


@pytest.mark.slow
def test_heisenberg_bond_extrapolation():
    sizes = (12, 14, 16, 18, 20)
    zz = [ed_correlators(ModelSpec.xxz(1.0), n, 1).zz for n in sizes]
    target = 4 * (0.25 - math.log(2)) / 3
    # finite rings approach the bulk value monotonically from below
    assert all(a < b for a, b in zip(zz, zz[1:]))
    assert all(v < target for v in zz)
    # periodic Heisenberg rings converge as 1/N^2
    est, resid = extrapolate_inverse_n(sizes, zz, power=2)
    assert est == pytest.approx(target, abs=1e-4)
    assert resid < 1e-5
    lin, _ = extrapolate_inverse_n(sizes[2:], zz[2:])
    assert abs(lin - target) < 1e-2


def test_extrapolation_exact_on_linear_data():
    est, resid = extrapolate_inverse_n([10, 20, 40], [1 + 3 / 10, 1 + 3 / 20, 1 + 3 / 40])
    assert est == pytest.approx(1.0, abs=1e-12)
    assert resid < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2 ** 31 - 1))
def test_pfaffian_squares_to_determinant(half, seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(2 * half, 2 * half))
    a = g - g.T
    assert pfaffian(a) ** 2 == pytest.approx(np.linalg.det(a), rel=1e-9, abs=1e-12)


def test_pfaffian_sign():
    a = np.array([[0, 2.0], [-2.0, 0]])
    assert pfaffian(a) == 2.0
    assert pfaffian(np.zeros((3, 3))) == 0.0


def test_three_point_functions_match_ed():
    lam, gamma = 0.5, 0.5
    ff = FreeFermionXY(lam, gamma)
    rho = reduce_density(solve(ModelSpec.xy(lam, gamma), FiniteChain(14)), [0, 1, 2]).entries
    for label in THREE_POINT_LABELS:
        exact = ff.expect(dict(zip((0, 1, 2), label)))
        assert exact == pytest.approx(pauli_expectation(rho, label), abs=1e-4), label


def test_wick_matches_toeplitz():
    ff = FreeFermionXY(1.4, 0.6)
    for m in (1, 3, 6):
        assert ff.expect({0: "x", m: "x"}) == pytest.approx(ff.xx(m), abs=1e-12)
        assert ff.expect({0: "y", m: "y"}) == pytest.approx(ff.yy(m), abs=1e-12)
        assert ff.expect({0: "z", m: "z"}) == pytest.approx(ff.zz(m), abs=1e-12)


def test_build_rho_single():
    assert np.allclose(build_rho_single(1.0).entries, np.diag([1.0, 0.0]))
    assert np.allclose(build_rho_single(0.0).entries, 0.5 * np.eye(2))
    with pytest.raises(UnphysicalInputError):
        build_rho_single(1.5)


def test_single_site_state_matches_ed():
    mz = xy_thermo_correlators(0.5, 0.5, 1).mz
    ed = reduce_density(solve(ModelSpec.xy(0.5, 0.5), FiniteChain(16)), [0]).entries
    assert np.max(np.abs(build_rho_single(mz).entries - ed)) <= 2e-3


def test_build_rho_pair_examples():
    assert np.allclose(build_rho_pair(CorrelatorSet(0, 0, 0, 0)).entries, 0.25 * np.eye(4))
    singlet = build_rho_pair(CorrelatorSet(0, -1, -1, -1)).entries
    assert np.allclose(np.linalg.eigvalsh(singlet), [0, 0, 0, 1], atol=1e-12)
    psi = np.array([0, 1, -1, 0]) / math.sqrt(2)
    assert np.allclose(singlet, np.outer(psi, psi))


def test_build_rho_pair_rejects_unphysical():
    with pytest.raises(UnphysicalInputError):
        build_rho_pair(CorrelatorSet(0, 1, 1, 1))


def test_pair_state_matches_ed_xxz():
    b = solve(ModelSpec.xxz(0.0), FiniteChain(12))
    c = ed_correlators(ModelSpec.xxz(0.0), 12, 1, bundle=b)
    assert np.max(np.abs(build_rho_pair(c).entries - reduce_density(b, [0, 1]).entries)) <= 1e-12


@pytest.mark.slow
def test_critical_pair_state_matches_ed():
    c = xy_thermo_correlators(1.0, 0.5, 1)
    ed = reduce_density(solve(ModelSpec.xy(1.0, 0.5), FiniteChain(20)), [0, 1]).entries
    assert np.max(np.abs(build_rho_pair(c).entries - ed)) <= 5e-3


def test_build_rho_triple_examples():
    zero = CorrelatorSet(0, 0, 0, 0, 1)
    t = TripleCorrelatorInput(0.0, zero, zero, CorrelatorSet(0, 0, 0, 0, 2),
                              {label: 0.0 for label in THREE_POINT_LABELS})
    assert np.allclose(build_rho_triple(t).entries, np.eye(8) / 8)
    up = build_rho_triple(xy_thermo_triple(0.0, 0.5)).entries
    target = np.zeros((8, 8))
    target[0, 0] = 1.0
    assert np.allclose(up, target, atol=1e-12)


def test_triple_state_matches_ed():
    rho = build_rho_triple(xy_thermo_triple(0.5, 0.5)).entries
    ed = reduce_density(solve(ModelSpec.xy(0.5, 0.5), FiniteChain(14)), [0, 1, 2]).entries
    assert np.max(np.abs(rho - ed)) <= 5e-3


def test_triple_distance_consistency():
    c1 = CorrelatorSet(0, 0, 0, 0, 1)
    with pytest.raises(ValueError):
        TripleCorrelatorInput(0.0, c1, c1, c1)


@settings(max_examples=20, deadline=None)
@given(lam=st.floats(0.05, 2.5), gamma=st.floats(0.1, 1.0))
def test_triple_state_is_physical(lam, gamma):
    rho = build_rho_triple(xy_thermo_triple(lam, gamma)).entries
    assert np.trace(rho) == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(rho)[0] >= -1e-9


def test_correlator_set_range():
    with pytest.raises(UnphysicalInputError):
        CorrelatorSet(1.2, 0, 0, 0)


def test_from_rho_roundtrip():
    c = xy_thermo_correlators(0.8, 0.3, 2)
    back = CorrelatorSet.from_rho(build_rho_pair(c), distance=2)
    assert back.as_tuple() == pytest.approx(c.as_tuple(), abs=1e-14)


def test_pauli_expectation():
    rho = np.kron(np.diag([1.0, 0.0]), 0.5 * (PAULI["i"] + PAULI["x"]))
    assert pauli_expectation(rho, "zx") == pytest.approx(1.0)
    assert pauli_expectation(rho, "xz") == pytest.approx(0.0)
