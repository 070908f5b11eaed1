"""Independent oracles shared across the test suite.

These deliberately avoid the library's own code paths: minors are taken one
determinant at a time with numpy, additive compounds come from a
finite-difference limit of the exponential's compound, and closed forms are
written out longhand.
"""

import itertools
from math import comb

import numpy as np
import scipy.linalg as sla


def brute_mult_compound(m, k):
    """All k x k minors, one np.linalg.det call each."""
    m = np.asarray(m, dtype=float)
    rows = list(itertools.combinations(range(m.shape[0]), k))
    cols = list(itertools.combinations(range(m.shape[1]), k))
    out = np.empty((len(rows), len(cols)))
    for i, r in enumerate(rows):
        for j, c in enumerate(cols):
            out[i, j] = np.linalg.det(m[np.ix_(r, c)])
    return out


def fd_add_compound(a, k, h1=1e-5, h2=1e-6):
    """Richardson-extrapolated finite difference of t -> (exp(At))^(k) at 0."""
    a = np.asarray(a, dtype=float)
    r = comb(a.shape[0], k)

    def slope(h):
        return (brute_mult_compound(sla.expm(a * h), k) - np.eye(r)) / h

    g1, g2 = slope(h1), slope(h2)
    return (h1 * g2 - h2 * g1) / (h1 - h2)


def triangular4_third_compound(a):
    """Closed form of the third multiplicative compound of an upper-triangular
    4 x 4 matrix, written out entry by entry."""
    a11, a12, a13, a14 = a[0]
    a22, a23, a24 = a[1, 1:]
    a33, a34 = a[2, 2:]
    a44 = a[3, 3]
    return np.array(
        [
            [
                a11 * a22 * a33,
                a11 * a22 * a34,
                a11 * (a23 * a34 - a24 * a33),
                a14 * a22 * a33 - a12 * a24 * a33 - a13 * a22 * a34 + a12 * a23 * a34,
            ],
            [0.0, a11 * a22 * a44, a11 * a23 * a44, a12 * a23 * a44 - a13 * a22 * a44],
            [0.0, 0.0, a11 * a33 * a44, a12 * a33 * a44],
            [0.0, 0.0, 0.0, a22 * a33 * a44],
        ]
    )


def sorted_eigs(m):
    return np.sort_complex(np.linalg.eigvals(m))


def eig_match_error(expected, got):
    """Worst distance under the optimal pairing of two eigenvalue multisets.

    Robust against the order flips that lexicographic complex sorting
    suffers when real parts tie to rounding.
    """
    from scipy.optimize import linear_sum_assignment

    expected = np.asarray(expected)
    got = np.asarray(got)
    cost = np.abs(expected[:, None] - got[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def well_conditioned(rng, n, spread=(0.5, 2.0)):
    """Random matrix with singular values inside ``spread``."""
    q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
    q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = rng.uniform(*spread, size=n)
    return q1 @ np.diag(s) @ q2


def rel_err(actual, expected):
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    scale = max(1.0, float(np.abs(expected).max(initial=0.0)))
    return float(np.abs(actual - expected).max(initial=0.0)) / scale
