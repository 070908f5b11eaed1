import numpy as np
import pytest
import scipy.linalg as sla

from kcontract.compounds import (
    add_compound,
    add_compound_interval,
    block_diag_add_decompose,
    block_diag_mult_decompose,
    kron_product,
    kron_sum,
    mult_compound,
)
from kcontract.indexing import DimensionGuardError

from .helpers import brute_mult_compound, fd_add_compound, triangular4_third_compound, rel_err, sorted_eigs, well_conditioned


def test_identity_compound():
    assert np.array_equal(mult_compound(np.eye(4), 2).data, np.eye(6))


def test_first_compound_is_the_matrix():
    rng = np.random.default_rng(0)
    m = rng.standard_normal((3, 5))
    assert np.array_equal(mult_compound(m, 1).data, m)


def test_full_compound_is_determinant():
    rng = np.random.default_rng(1)
    m = rng.standard_normal((4, 4))
    assert rel_err(mult_compound(m, 4).data[0, 0], np.linalg.det(m)) < 1e-12


def test_order_zero_conventions():
    m = np.diag([2.0, 3.0])
    assert np.array_equal(mult_compound(m, 0).data, [[1.0]])
    assert np.array_equal(add_compound(m, 0).data, [[0.0]])


def test_triangular_4x4_closed_form():
    rng = np.random.default_rng(2)
    for _ in range(10):
        a = np.triu(rng.uniform(-2, 2, (4, 4)))
        got = mult_compound(a, 3).data
        assert np.abs(got - triangular4_third_compound(a)).max() < 1e-12


def test_cauchy_binet_rectangular():
    rng = np.random.default_rng(3)
    b = rng.standard_normal((3, 4))
    c = rng.standard_normal((4, 3))
    lhs = mult_compound(b @ c, 2).data
    rhs = mult_compound(b, 2).data @ mult_compound(c, 2).data
    assert rel_err(lhs, rhs) < 1e-9
    # both sides against direct minor enumeration
    assert rel_err(lhs, brute_mult_compound(b @ c, 2)) < 1e-12
    assert rel_err(rhs, brute_mult_compound(b, 2) @ brute_mult_compound(c, 2)) < 1e-12


def test_mult_matches_brute_minors():
    rng = np.random.default_rng(4)
    for n, m, k in [(3, 3, 2), (4, 5, 3), (5, 4, 2), (6, 6, 4), (5, 5, 5)]:
        a = rng.standard_normal((n, m))
        assert rel_err(mult_compound(a, k).data, brute_mult_compound(a, k)) < 1e-11


def test_transpose_identity():
    rng = np.random.default_rng(5)
    for k in (1, 2, 3, 4):
        a = rng.standard_normal((5, 5))
        assert rel_err(mult_compound(a.T, k).data, mult_compound(a, k).data.T) < 1e-14


def test_inverse_identity():
    rng = np.random.default_rng(6)
    a = well_conditioned(rng, 5)
    for k in (2, 3):
        lhs = np.linalg.inv(mult_compound(a, k).data)
        rhs = mult_compound(np.linalg.inv(a), k).data
        assert rel_err(lhs, rhs) < 1e-9


def test_spectral_mapping():
    rng = np.random.default_rng(7)
    for n in (4, 5):
        a = rng.standard_normal((n, n))
        eigs = np.linalg.eigvals(a)
        for k in (2, 3):
            import itertools

            prod = [np.prod(c) for c in itertools.combinations(eigs, k)]
            sums = [np.sum(c) for c in itertools.combinations(eigs, k)]
            got_mult = sorted_eigs(mult_compound(a, k).data)
            got_add = sorted_eigs(add_compound(a, k).data)
            assert np.abs(np.sort_complex(np.array(prod)) - got_mult).max() < 1e-7
            assert np.abs(np.sort_complex(np.array(sums)) - got_add).max() < 1e-7


def test_exponential_relation():
    rng = np.random.default_rng(8)
    a = rng.standard_normal((4, 4))
    a /= 2.0 * np.abs(np.linalg.eigvals(a)).max()
    for k in (2, 3):
        lhs = mult_compound(sla.expm(a), k).data
        rhs = sla.expm(add_compound(a, k).data)
        assert rel_err(lhs, rhs) < 1e-9


def test_add_compound_first_and_last():
    rng = np.random.default_rng(9)
    a = rng.standard_normal((3, 3))
    assert np.array_equal(add_compound(a, 1).data, a)
    assert abs(add_compound(a, 3).data[0, 0] - np.trace(a)) < 1e-14


def test_add_compound_diagonal_pair_sums():
    lam = np.array([0.3, -1.2, 2.5])
    got = add_compound(np.diag(lam), 2).data
    expected = np.diag([lam[0] + lam[1], lam[0] + lam[2], lam[1] + lam[2]])
    assert np.array_equal(got, expected)
    assert rel_err(got, fd_add_compound(np.diag(lam), 2)) < 1e-8


def test_add_compound_matches_finite_differences():
    rng = np.random.default_rng(10)
    a = rng.standard_normal((4, 4))
    for k in (2, 3):
        assert rel_err(add_compound(a, k).data, fd_add_compound(a, k)) < 1e-7


def test_additivity():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((5, 5))
    b = rng.standard_normal((5, 5))
    for k in (2, 3):
        lhs = add_compound(a + b, k).data
        rhs = add_compound(a, k).data + add_compound(b, k).data
        # off-diagonal entries agree bitwise; diagonal sums agree to rounding
        off = ~np.eye(lhs.shape[0], dtype=bool)
        assert np.array_equal(lhs[off], rhs[off])
        assert rel_err(lhs, rhs) < 1e-15


def test_kron_product_examples():
    rng = np.random.default_rng(12)
    b = rng.standard_normal((3, 3))
    expected = np.zeros((6, 6))
    expected[:3, :3] = b
    expected[3:, 3:] = b
    assert np.array_equal(kron_product(np.eye(2), b), expected)
    assert np.array_equal(kron_product([[2.0]], [[3.0]]), [[6.0]])


def test_kron_product_index_formula():
    rng = np.random.default_rng(13)
    a = rng.standard_normal((2, 2))
    b = rng.standard_normal((3, 3))
    got = kron_product(a, b)
    m = 3
    for i in range(6):
        for j in range(6):
            expected = a[i // m, j // m] * b[i % m, j % m]
            assert got[i, j] == expected


def test_kron_sum_examples():
    rng = np.random.default_rng(14)
    b = rng.standard_normal((3, 3))
    assert np.array_equal(kron_sum(np.zeros((2, 2)), b), kron_product(np.eye(2), b))
    assert np.array_equal(kron_sum([[2.0]], [[3.0]]), [[5.0]])


def test_kron_sum_eigenvalues():
    rng = np.random.default_rng(15)
    a = rng.standard_normal((3, 3))
    b = rng.standard_normal((2, 2))
    ea, eb = np.linalg.eigvals(a), np.linalg.eigvals(b)
    expected = np.sort_complex(np.array([x + y for x in ea for y in eb]))
    got = sorted_eigs(kron_sum(a, b))
    assert np.abs(expected - got).max() < 1e-8


def test_block_decompose_diagonal_example():
    lam = np.array([2.0, 3.0, 5.0, 7.0, 11.0])
    dec = block_diag_mult_decompose(np.diag(lam[:3]), np.diag(lam[3:]), 2)
    assert [i for i, _ in dec.blocks] == [0, 1, 2]
    assert np.array_equal(np.diag(dec.blocks[0][1]), [lam[0] * lam[1], lam[0] * lam[2], lam[1] * lam[2]])
    assert np.array_equal(
        np.diag(dec.blocks[1][1]),
        [lam[0] * lam[3], lam[0] * lam[4], lam[1] * lam[3], lam[1] * lam[4], lam[2] * lam[3], lam[2] * lam[4]],
    )
    assert np.array_equal(np.diag(dec.blocks[2][1]), [lam[3] * lam[4]])
    c = np.diag(lam)
    assert np.array_equal(dec.reconstruct(), mult_compound(c, 2).data)


def test_block_decompose_full_order():
    rng = np.random.default_rng(16)
    a = rng.standard_normal((3, 3))
    b = rng.standard_normal((2, 2))
    dm = block_diag_mult_decompose(a, b, 5)
    assert rel_err(dm.reconstruct()[0, 0], np.linalg.det(a) * np.linalg.det(b)) < 1e-12
    da = block_diag_add_decompose(a, b, 5)
    assert rel_err(da.reconstruct()[0, 0], np.trace(a) + np.trace(b)) < 1e-14


def test_block_decompose_k1_identity_permutation():
    rng = np.random.default_rng(17)
    a = rng.standard_normal((3, 3))
    b = rng.standard_normal((2, 2))
    dec = block_diag_add_decompose(a, b, 1)
    assert np.array_equal(dec.permutation.positions, np.arange(5))
    c = np.zeros((5, 5))
    c[:3, :3], c[3:, 3:] = a, b
    assert np.array_equal(dec.reconstruct(), c)


def test_block_decompose_random_against_brute_minors():
    rng = np.random.default_rng(18)
    for _ in range(5):
        n, m = rng.integers(2, 4, size=2)
        k = int(rng.integers(2, n + m + 1))
        a = rng.standard_normal((n, n))
        b = rng.standard_normal((m, m))
        c = np.zeros((n + m, n + m))
        c[:n, :n], c[n:, n:] = a, b
        dec = block_diag_mult_decompose(a, b, k)
        assert rel_err(dec.reconstruct(), brute_mult_compound(c, k)) < 1e-9


def test_interval_compound_contains_samples():
    rng = np.random.default_rng(19)
    lo = rng.uniform(-2, 0, (4, 4))
    hi = lo + rng.uniform(0, 2, (4, 4))
    clo, chi = add_compound_interval(lo, hi, 2)
    for _ in range(50):
        j = rng.uniform(lo, hi)
        comp = add_compound(j, 2).data
        assert np.all(comp >= clo - 1e-12) and np.all(comp <= chi + 1e-12)
    dlo, dhi = add_compound_interval(lo, lo, 3)
    assert np.array_equal(dlo, dhi)
    assert np.array_equal(dlo, add_compound(lo, 3).data)


def test_validation_errors():
    with pytest.raises(ValueError):
        add_compound(np.ones((2, 3)), 1)
    with pytest.raises(ValueError):
        mult_compound(np.ones((3, 3)), 4)
    with pytest.raises(ValueError):
        mult_compound(np.array([[1.0, np.nan], [0.0, 1.0]]), 1)
    with pytest.raises(DimensionGuardError):
        mult_compound(np.eye(50), 25)
