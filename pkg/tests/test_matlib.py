import numpy as np
import pytest
from hypothesis import given, strategies as st

from hpqfim import oracles
from hpqfim.errors import DimMismatch, NotSymmetric, SingularBlock
from hpqfim.matlib import (BlockSym, block_inverse_identity_check, eigh, inv_spd, is_singular,
                           jensen_schur_check, min_eig, pinv_sym, psd_gap, schur_complement, sym)

seeds = st.integers(0, 2**32 - 1)


def random_block(seed, d_i=None, d_n=None, cond=1e3):
    rng = np.random.default_rng(seed)
    d_i = d_i or int(rng.integers(1, 3))
    d_n = d_n or int(rng.integers(1, 3))
    return BlockSym.split(sym(oracles.random_spd(rng, d_i + d_n, cond), check=False), d_i)


def test_sym_rejects_asymmetry_and_bad_shapes():
    with pytest.raises(NotSymmetric):
        sym([[1.0, 2.0], [2.1, 1.0]])
    with pytest.raises(DimMismatch):
        sym(np.ones((2, 3)))
    with pytest.raises(DimMismatch):
        sym(np.eye(9))
    s = sym([[1.0, 2.0], [2.0 + 1e-14, 1.0]])
    assert s[0, 1] == s[1, 0]
    assert not s.flags.writeable


def test_sym_scalar_becomes_1x1():
    assert sym(3.0).shape == (1, 1)


def test_blocksym_round_trip_exact():
    b = random_block(7, 2, 1)
    again = BlockSym.split(b.assemble(), 2)
    assert again == b
    np.testing.assert_array_equal(again.assemble(), b.assemble())


def test_schur_zero_cross_term():
    b = BlockSym([[0.36]], [[0.0]], [[2.5]])
    assert schur_complement(b)[0, 0] == 0.36


def test_schur_extra_rotation_blocks_vanish():
    b = BlockSym([[0.25]], [[0.25]], [[0.25]])
    assert abs(schur_complement(b)[0, 0]) <= 1e-15


def test_schur_matches_cofactor_inverse():
    rng = np.random.default_rng(3)
    for _ in range(50):
        g = oracles.random_spd(rng, 3)
        full = oracles.cofactor_inverse(g)
        expected = oracles.cofactor_inverse(full[:2, :2])
        got = schur_complement(BlockSym.split(sym(g, check=False), 2))
        np.testing.assert_allclose(got, expected, rtol=1e-9, atol=1e-12)


def test_schur_singular_nuisance_raises():
    with pytest.raises(SingularBlock):
        schur_complement(BlockSym([[1.0]], [[0.0]], [[0.0]]))


def test_psd_gap_examples():
    v = psd_gap(np.eye(2), np.eye(2))
    assert v.holds and v.min_eig == 0.0
    v = psd_gap(np.diag([2.0, 2.0]), np.diag([1.0, 3.0]))
    assert not v.holds
    assert v.min_eig == pytest.approx(-1.0, abs=1e-14)
    with pytest.raises(DimMismatch):
        psd_gap(np.eye(2), np.eye(3))


def test_block_inverse_diag_blocks():
    assert block_inverse_identity_check(BlockSym(np.diag([2.0, 3.0]), np.zeros((2, 1)), [[4.0]]))


def test_block_inverse_direction_g_matrix():
    # diagonal G: (I,I) block of the inverse is diag(1/a, 1/b) analytically
    a, b, c = 1 / 3, 1 / 3 * 0.75, 2.0
    g = BlockSym(np.diag([a, b]), np.zeros((2, 1)), [[c]])
    assert block_inverse_identity_check(g)
    np.testing.assert_allclose(inv_spd(g.assemble())[:2, :2], np.diag([1 / a, 1 / b]), rtol=1e-14)


def test_jensen_single_sample_gap_zero():
    v = jensen_schur_check([(np.array([[2.0]]), np.array([[1.5]]))], [1.0])
    assert v.holds and abs(v.min_eig) < 1e-15


def test_jensen_scalar_example():
    # E[B^2/A] = (1 + 1/4)/2 = 0.625 ; E[B]^2/E[A] = 1/2.5 = 0.4
    v = jensen_schur_check([(np.array([[1.0]]), np.array([[1.0]])),
                            (np.array([[4.0]]), np.array([[1.0]]))], [0.5, 0.5])
    assert v.holds
    assert v.min_eig == pytest.approx(0.625 - 0.4, abs=1e-15)


def test_jensen_rejects_bad_weights():
    with pytest.raises(ValueError):
        jensen_schur_check([(np.eye(1), np.eye(1))], [0.5])


def test_jensen_random_families(rng):
    for _ in range(200):
        n, m, k = rng.integers(1, 4), rng.integers(1, 3), rng.integers(2, 6)
        samples = [(oracles.random_spd(rng, n, 1e2), rng.normal(size=(n, m))) for _ in range(k)]
        assert jensen_schur_check(samples, rng.dirichlet(np.ones(k)), 1e-9)


def test_singularity_is_relative():
    assert is_singular(np.diag([1.0, 1e-13]))
    assert not is_singular(np.diag([1e-6, 2e-6]))
    assert is_singular(np.diag([1e-6, 2e-6]), scale=1e7)
    np.testing.assert_allclose(pinv_sym(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))


@given(seeds)
def test_schur_of_spd_is_spd(seed):
    assert min_eig(schur_complement(random_block(seed))) > -1e-10


@given(seeds)
def test_block_inverse_identity_property(seed):
    assert block_inverse_identity_check(random_block(seed), 1e-9)


@given(seeds)
def test_eigh_reconstructs_and_matches_reference(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 9))
    a = rng.normal(size=(n, n))
    a = sym(a + a.T, check=False)
    w, v = eigh(a)
    np.testing.assert_allclose((v * w) @ v.T, a, atol=1e-12)
    np.testing.assert_allclose(v.T @ v, np.eye(n), atol=1e-12)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(a), atol=1e-12)


@given(seeds)
def test_psd_gap_witness_is_an_eigenvalue(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    a, b = (sym(x + x.T, check=False) for x in rng.normal(size=(2, n, n)))
    v = psd_gap(a, b)
    if not v.holds:
        assert v.min_eig < -1e-9
        assert abs(v.min_eig - np.linalg.eigvalsh(a - b)[0]) <= 1e-10
