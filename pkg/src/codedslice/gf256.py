"""Arithmetic and dense linear algebra over GF(2^8).

Field elements are integers in [0, 255]; bit i is the coefficient of x^i.
Multiplication reduces modulo the AES polynomial x^8 + x^4 + x^3 + x + 1
(0x11B). Addition is XOR.

Three independent multiplication routes are kept so each can check the
others: a 256x256 lookup table (the fast path), log/antilog tables with
generator 0x03, and a bitwise shift-and-reduce product.
"""

from __future__ import annotations

import numpy as np

REDUCING_POLY = 0x11B
GENERATOR = 0x03


def gf_mul_shift(a: int, b: int) -> int:
    """Russian-peasant product with 0x11B reduction. Reference route."""
    result = 0
    while b:
        if b & 1:
            result ^= a
        a <<= 1
        if a & 0x100:
            a ^= REDUCING_POLY
        b >>= 1
    return result


def _build_mul_table() -> np.ndarray:
    a = np.repeat(np.arange(256, dtype=np.uint16), 256)
    b = np.tile(np.arange(256, dtype=np.uint16), 256)
    result = np.zeros(256 * 256, dtype=np.uint16)
    for _ in range(8):
        result ^= np.where(b & 1, a, 0)
        b >>= 1
        a <<= 1
        a = np.where(a & 0x100, a ^ REDUCING_POLY, a)
    return result.astype(np.uint8).reshape(256, 256)


MUL_TABLE = _build_mul_table()


def _build_log_exp() -> tuple[np.ndarray, np.ndarray]:
    exp = np.zeros(510, dtype=np.uint8)
    log = np.zeros(256, dtype=np.int32)
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x = int(MUL_TABLE[x, GENERATOR])
    exp[255:510] = exp[0:255]
    return log, exp


LOG_TABLE, EXP_TABLE = _build_log_exp()

INV_TABLE = np.zeros(256, dtype=np.uint8)
INV_TABLE[1:] = EXP_TABLE[255 - LOG_TABLE[1:]]


def gf_add(a: int, b: int) -> int:
    return a ^ b


def gf_mul(a: int, b: int) -> int:
    return int(MUL_TABLE[a, b])


def gf_mul_logexp(a: int, b: int) -> int:
    """Log/antilog route, kept as a cross-check on the table route."""
    if a == 0 or b == 0:
        return 0
    return int(EXP_TABLE[LOG_TABLE[a] + LOG_TABLE[b]])


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no multiplicative inverse in GF(256)")
    return int(INV_TABLE[a])


def gf_div(a: int, b: int) -> int:
    return gf_mul(a, gf_inv(b))


def scale_row(c: int, row: np.ndarray) -> np.ndarray:
    """c * row elementwise over GF(256)."""
    return MUL_TABLE[c][row]


def rref(matrix: np.ndarray) -> tuple[np.ndarray, int, list[int]]:
    """Reduced row-echelon form over GF(256).

    Pivoting picks the first nonzero entry in each column, ties broken by
    lowest row index, so the output is deterministic. Returns
    (reduced, rank, pivot_cols); the row space is preserved.
    """
    m = np.array(matrix, dtype=np.uint8, copy=True)
    if m.ndim != 2:
        raise ValueError("rref expects a 2-D matrix")
    n_rows, n_cols = m.shape
    rank = 0
    pivot_cols: list[int] = []
    for col in range(n_cols):
        nonzero = np.nonzero(m[rank:, col])[0]
        if nonzero.size == 0:
            continue
        pivot = rank + int(nonzero[0])
        if pivot != rank:
            m[[rank, pivot]] = m[[pivot, rank]]
        m[rank] = MUL_TABLE[gf_inv(int(m[rank, col]))][m[rank]]
        factors = m[:, col].copy()
        factors[rank] = 0
        m ^= MUL_TABLE[factors[:, None], m[rank][None, :]]
        pivot_cols.append(col)
        rank += 1
        if rank == n_rows:
            break
    return m, rank, pivot_cols
