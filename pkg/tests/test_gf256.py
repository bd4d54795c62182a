"""Field arithmetic: exhaustive agreement between the three multiplication
routes, field axioms, and elimination properties against an independent
fraction-free oracle."""

import numpy as np
import pytest

from codedslice import gf256


def test_add_is_xor():
    assert gf256.gf_add(0x03, 0x05) == 0x06
    assert gf256.gf_add(0xFF, 0x00) == 0xFF
    assert gf256.gf_add(0xAB, 0xAB) == 0x00


def test_mul_identities():
    assert gf256.gf_mul(0x00, 0x57) == 0x00
    assert gf256.gf_mul(0x01, 0x57) == 0x57
    # classic AES inverse pair under 0x11B
    assert gf256.gf_mul(0x53, 0xCA) == 0x01


def test_inverse_examples():
    assert gf256.gf_inv(0x01) == 0x01
    assert gf256.gf_inv(0x53) == 0xCA
    with pytest.raises(ZeroDivisionError):
        gf256.gf_inv(0x00)


def test_all_nonzero_inverses():
    for a in range(1, 256):
        assert gf256.gf_mul(a, gf256.gf_inv(a)) == 1


def test_inverses_unique():
    inverses = {gf256.gf_inv(a) for a in range(1, 256)}
    assert len(inverses) == 255


def test_mul_table_matches_shift_reduce_exhaustively():
    for a in range(256):
        row = gf256.MUL_TABLE[a]
        for b in range(256):
            assert row[b] == gf256.gf_mul_shift(a, b)


def test_mul_table_matches_logexp_exhaustively():
    for a in range(256):
        row = gf256.MUL_TABLE[a]
        for b in range(256):
            assert row[b] == gf256.gf_mul_logexp(a, b)


def test_axioms_on_random_triples():
    rng = np.random.default_rng(7)
    a, b, c = rng.integers(0, 256, size=(3, 10_000), dtype=np.uint8)
    mul, add = gf256.MUL_TABLE, np.bitwise_xor
    assert (mul[a, b] == mul[b, a]).all()
    assert (mul[mul[a, b], c] == mul[a, mul[b, c]]).all()
    assert (mul[a, add(b, c)] == add(mul[a, b], mul[a, c])).all()


def test_div_roundtrip():
    rng = np.random.default_rng(8)
    for _ in range(500):
        a = int(rng.integers(0, 256))
        b = int(rng.integers(1, 256))
        assert gf256.gf_mul(gf256.gf_div(a, b), b) == a


def _rank_oracle(matrix):
    """Independent elimination oracle: division-free row updates
    (row <- pivot_value * row - factor * pivot_row) and highest-index
    pivot rows, the opposite pivoting order from gf256.rref."""
    m = np.array(matrix, dtype=np.uint8, copy=True)
    n_rows, n_cols = m.shape
    rank = 0
    for col in range(n_cols):
        pivot = None
        for r in range(n_rows - 1, rank - 1, -1):  # last nonzero row
            if m[r, col]:
                pivot = r
                break
        if pivot is None:
            continue
        if pivot != rank:
            m[[rank, pivot]] = m[[pivot, rank]]
        pv = int(m[rank, col])
        for r in range(rank + 1, n_rows):
            f = int(m[r, col])
            if f:
                m[r] = (gf256.MUL_TABLE[pv][m[r]]
                        ^ gf256.MUL_TABLE[f][m[rank]])
        rank += 1
        if rank == n_rows:
            break
    return rank


def test_rref_identity():
    reduced, rank, pivots = gf256.rref(np.eye(3, dtype=np.uint8))
    assert rank == 3 and pivots == [0, 1, 2]
    assert (reduced == np.eye(3, dtype=np.uint8)).all()


def test_rref_dependent_rows():
    m = np.array([[1, 2, 3], [2, 4, 6]], dtype=np.uint8)  # row2 = 2*row1
    _, rank, _ = gf256.rref(m)
    assert rank == 1


def test_rref_rank_matches_independent_oracle():
    rng = np.random.default_rng(11)
    for _ in range(200):
        shape = rng.integers(1, 9, size=2)
        m = rng.integers(0, 256, size=shape, dtype=np.uint8)
        _, rank, _ = gf256.rref(m)
        assert rank == _rank_oracle(m)


def test_rref_leaves_reduced_form():
    rng = np.random.default_rng(12)
    for _ in range(50):
        m = rng.integers(0, 256, size=(6, 8), dtype=np.uint8)
        reduced, rank, pivots = gf256.rref(m)
        for r, col in enumerate(pivots):
            assert reduced[r, col] == 1
            column = reduced[:, col].copy()
            column[r] = 0
            assert not column.any()
        assert not reduced[rank:].any()


def test_rank_invariant_under_permutation_and_scaling():
    rng = np.random.default_rng(13)
    for _ in range(100):
        m = rng.integers(0, 256, size=(5, 7), dtype=np.uint8)
        _, rank, _ = gf256.rref(m)
        perm = rng.permutation(5)
        scales = rng.integers(1, 256, size=5, dtype=np.uint8)
        scaled = gf256.MUL_TABLE[scales[:, None], m[perm]]
        _, rank2, _ = gf256.rref(scaled)
        assert rank == rank2
