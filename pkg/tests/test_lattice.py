import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from speclocal.clifford import SIGMA1, SIGMA2
from speclocal.degree import dirac_model
from speclocal.errors import ConfigError, GapClosed, NotSelfAdjoint
from speclocal.lattice import (FiniteVolumeOperator, TranslationInvariantOperator, bloch_spectrum,
                               commutator_norm, dirichlet_restriction, lattice_sites,
                               operator_stats, periodic_restriction, position_function,
                               position_values, random_hamiltonian, taper_function,
                               taper_matrix_elements, torus_sup)
from speclocal.models import ssh_bulk, ssh_chain


def nearest_neighbour():
    return TranslationInvariantOperator(1, 1, {(1,): [[1.0]], (-1,): [[1.0]]})


def test_site_order_is_lexicographic():
    sites = lattice_sites(2, 1)
    assert sites.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]


def test_periodic_wrap_entry():
    h = periodic_restriction(nearest_neighbour(), 2).dense()
    # sites -1, 0, 1, 2: <2|H|-1> comes from the wrap term
    assert h[3, 0] == 1 and h[0, 3] == 1


def test_dirichlet_has_no_wrap():
    h = dirichlet_restriction(nearest_neighbour(), 2).dense()
    assert h[3, 0] == 0
    assert h[1, 0] == 1


def test_onsite_operator_is_identity_multiple():
    op = TranslationInvariantOperator(1, 1, {(0,): [[5.0]]})
    assert np.allclose(periodic_restriction(op, 3).dense(), 5 * np.eye(6))
    assert np.allclose(dirichlet_restriction(op, 3).dense(), 5 * np.eye(6))


def test_double_wrap_warns():
    op = TranslationInvariantOperator(1, 1, {(2,): [[1.0]], (-2,): [[1.0]]})
    with pytest.warns(UserWarning):
        periodic_restriction(op, 1)


def test_rejects_non_self_adjoint_hoppings():
    with pytest.raises(NotSelfAdjoint):
        TranslationInvariantOperator(1, 1, {(1,): [[1.0]], (-1,): [[2.0]]})


def test_bloch_fiber_values():
    op = nearest_neighbour()
    assert op.bloch_fiber(np.array([0.0]))[0, 0] == pytest.approx(2)
    assert op.bloch_fiber(np.array([np.pi]))[0, 0].real == pytest.approx(-2)


def test_ssh_spectral_inclusion_at_rho_four():
    op = ssh_bulk(0.9j)
    w = np.linalg.eigvalsh(periodic_restriction(op, 4).dense())
    assert np.allclose(np.sort(w), bloch_spectrum(op, 4), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 2), st.integers(1, 3), st.integers(1, 2), st.integers(0, 2 ** 31 - 1))
def test_spectral_inclusion(d, L, R, seed):
    rng = np.random.default_rng(seed)
    op = random_hamiltonian(d, L, R, rng)
    rho = int(rng.integers(R, 5))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        h = periodic_restriction(op, rho)
    w = np.linalg.eigvalsh(h.dense())
    fiber = bloch_spectrum(op, rho)
    assert np.allclose(np.sort(w), fiber, atol=1e-9)


def test_periodic_and_dirichlet_agree_inside():
    rng = np.random.default_rng(1)
    op = random_hamiltonian(2, 2, 1, rng)
    per = periodic_restriction(op, 3).dense()
    dia = dirichlet_restriction(op, 3).dense()
    sites = lattice_sites(2, 3)
    for i, x in enumerate(sites):
        for j, y in enumerate(sites):
            if np.abs(x - y).max() <= 1:
                assert np.allclose(per[2 * i:2 * i + 2, 2 * j:2 * j + 2],
                                   dia[2 * i:2 * i + 2, 2 * j:2 * j + 2])


def test_ssh_dirichlet_edge_mode():
    per = ssh_chain(0.9j, 300)
    dia = ssh_chain(0.9j, 300, boundary="dirichlet")
    # the chiral block is the upper right quarter in the orbital interleaving
    a_per = per.dense()[0::2, 1::2]
    a_dia = dia.dense()[0::2, 1::2]
    assert np.linalg.svd(a_dia, compute_uv=False).min() < np.linalg.svd(a_per, compute_uv=False).min()


def test_sparse_and_dense_restrictions_agree():
    op = dirac_model(2, 1.0)
    dense = periodic_restriction(op, 3).dense()
    sparse = periodic_restriction(op, 3, sparse=True)
    assert sparse.is_sparse
    assert np.allclose(sparse.dense(), dense)


def test_twist_zero_is_periodic_and_twist_pi_is_antiperiodic():
    op = nearest_neighbour()
    assert np.allclose(periodic_restriction(op, 2, twist=[0.0]).dense(),
                       periodic_restriction(op, 2).dense())
    anti = periodic_restriction(op, 2, twist=[np.pi]).dense()
    assert anti[3, 0] == pytest.approx(-1)


def test_position_profiles():
    assert position_values("sin", 1, 4, axis=0)[3] == 0
    assert position_values("sin", 1, 4, axis=0)[-1] == pytest.approx(0)
    assert position_values("xi", 1, 4, axis=0)[-1] == pytest.approx(1)
    with pytest.raises(ConfigError):
        position_values("bogus", 1, 4, axis=0)
    op = position_function("cos", 1, 2, 3, axis=0)
    assert op.dim == 12 and np.allclose(np.diag(op.dense())[:2], np.cos(-2 * np.pi / 3))


def test_taper_function_plateaus():
    x = np.linspace(-2, 2, 801)
    g = taper_function(x)
    assert np.all(g[np.abs(x) <= 0.5] == 1)
    assert np.all(g[np.abs(x) >= 1] == 0)
    assert np.all((g >= 0) & (g <= 1))


def test_taper_matrix_elements():
    h = ssh_chain(0.9j, 30)
    assert np.array_equal(taper_matrix_elements(h, 0.0).dense(), h.dense())
    assert not np.any(taper_matrix_elements(h, 0.999).dense()[:, :56])
    with pytest.raises(ConfigError):
        taper_matrix_elements(h, 1.5)


def test_fig1_kernel_size():
    # (1 - s) rho = 285, so 2 * 15 sites with 2 orbitals are removed
    h = taper_matrix_elements(ssh_chain(0.9j, 300), 0.05)
    w = np.linalg.eigvalsh(h.dense())
    kernel = int(np.sum(np.abs(w) < 1e-8 * np.abs(w).max()))
    assert abs(kernel - 60) <= 10


def test_commutator_norm():
    assert commutator_norm(SIGMA1, SIGMA1) == 0
    assert commutator_norm(SIGMA1, SIGMA2) == pytest.approx(2)
    with pytest.raises(ConfigError):
        commutator_norm(np.eye(2), np.eye(3))


def test_operator_stats():
    one = TranslationInvariantOperator(1, 1, {(0,): np.eye(1)})
    stats = operator_stats(one)
    assert (stats.norm, stats.gap, stats.hopping_bound) == (1, 1, 0)
    nn = nearest_neighbour()
    assert nn.norm() == pytest.approx(2)
    assert nn.commutator_norm() == pytest.approx(2)
    with pytest.raises(GapClosed):
        operator_stats(nn)


def test_dirac_gap_by_brute_force():
    # grid oracle for min_k |H(k)| of the m = 1 Dirac model
    k = np.linspace(0, 2 * np.pi, 801)
    k1, k2 = np.meshgrid(k, k)
    e = np.sqrt(np.sin(k1) ** 2 + np.sin(k2) ** 2 + (1 - np.cos(k1) - np.cos(k2)) ** 2)
    assert dirac_model(2, 1.0).gap() == pytest.approx(e.min(), abs=1e-6)


def test_torus_sup_of_cosine():
    assert torus_sup(lambda ks: np.cos(ks[:, 0]) + np.cos(ks[:, 1]), 2) == pytest.approx(2)


def test_finite_volume_validation():
    with pytest.raises(ConfigError):
        FiniteVolumeOperator(1, 1, 2, "periodic", np.eye(3))
    with pytest.raises(ConfigError):
        FiniteVolumeOperator(1, 1, 2, "nowhere", np.eye(4))
