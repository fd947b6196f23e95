"""Arithmetic and small dense linear algebra over GF(2^8).

Elements are plain ints in [0, 255]. The field is built on the AES modulus
x^8 + x^4 + x^3 + x + 1 (0x11B) with generator 0x03.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

POLY = 0x11B
GENERATOR = 0x03


class SingularMatrixError(ValueError):
    """Raised when a coefficient matrix has no inverse."""


def _xtime_mul(x: int, y: int) -> int:
    r = 0
    while y:
        if y & 1:
            r ^= x
        y >>= 1
        x <<= 1
        if x & 0x100:
            x ^= POLY
    return r


def _build_tables():
    exp = [0] * 510
    log = [0] * 256
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x = _xtime_mul(x, GENERATOR)
    exp[255:] = exp[:255]

    mul = np.zeros((256, 256), dtype=np.uint8)
    for a in range(1, 256):
        la = log[a]
        for b in range(1, 256):
            mul[a, b] = exp[la + log[b]]
    inv = [0] * 256
    for a in range(1, 256):
        inv[a] = exp[255 - log[a]]
    return exp, log, mul, inv


EXP, LOG, MUL, INV = _build_tables()
MUL.setflags(write=False)

# MUL_ROWS[c][x] == c*x, as bytes for fast scalar indexing from pure Python
MUL_ROWS: tuple[bytes, ...] = tuple(bytes(MUL[c]) for c in range(256))


def gf_add(x: int, y: int) -> int:
    return x ^ y


def gf_mul(x: int, y: int) -> int:
    return MUL_ROWS[x][y]


def gf_inv(x: int) -> int:
    if x == 0:
        raise ZeroDivisionError("zero has no inverse in GF(2^8)")
    return INV[x]


def gf_div(x: int, y: int) -> int:
    return MUL_ROWS[x][gf_inv(y)]


def scale_row(row: Sequence[int], c: int) -> list[int]:
    m = MUL_ROWS[c]
    return [m[v] for v in row]


def add_scaled_row(dst: Sequence[int], src: Sequence[int], c: int) -> list[int]:
    """Return dst + c*src."""
    m = MUL_ROWS[c]
    return [d ^ m[s] for d, s in zip(dst, src)]


def rank(m) -> int:
    """Row rank of a matrix over GF(2^8). The input is not modified."""
    rows = [list(map(int, r)) for r in m]
    if not rows:
        return 0
    ncols = len(rows[0])
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = INV[rows[r][col]]
        rows[r] = scale_row(rows[r], inv)
        for i in range(r + 1, len(rows)):
            c = rows[i][col]
            if c:
                rows[i] = add_scaled_row(rows[i], rows[r], c)
        r += 1
        if r == len(rows):
            break
    return r


def matmul(a, b) -> np.ndarray:
    """Matrix product over GF(2^8) of uint8 arrays."""
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    if b.ndim == 1:
        return matmul(a, b[:, None])[:, 0]
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.uint8)
    for k in range(a.shape[1]):
        out ^= MUL[a[:, k][:, None], b[k][None, :]]
    return out


def solve(coeffs, rhs) -> np.ndarray:
    """Solve coeffs @ X = rhs over GF(2^8) by Gauss-Jordan elimination.

    ``coeffs`` must be square and full rank; ``rhs`` has one row per
    equation (each row a payload of any length). Raises
    SingularMatrixError otherwise.
    """
    a = [list(map(int, r)) for r in coeffs]
    n = len(a)
    if any(len(r) != n for r in a):
        raise ValueError("coefficient matrix must be square")
    x = np.array(rhs, dtype=np.uint8, copy=True)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] != n:
        raise ValueError(f"rhs has {x.shape[0]} rows, expected {n}")

    for col in range(n):
        pivot = next((i for i in range(col, n) if a[i][col]), None)
        if pivot is None:
            raise SingularMatrixError("not yet decodable: coefficient matrix is singular")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            x[[col, pivot]] = x[[pivot, col]]
        inv = INV[a[col][col]]
        if inv != 1:
            a[col] = scale_row(a[col], inv)
            x[col] = MUL[inv][x[col]]
        for i in range(n):
            c = a[i][col] if i != col else 0
            if c:
                a[i] = add_scaled_row(a[i], a[col], c)
                x[i] ^= MUL[c][x[col]]
    return x
