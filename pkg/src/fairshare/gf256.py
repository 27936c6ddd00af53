"""GF(2^8) arithmetic and the systematic Reed-Solomon generator matrix.

Scalar and small-matrix operations live here in plain Python; the byte-wide
shard transforms are delegated to a kernel module selected at import time:
the compiled Cython extension when built, else the stdlib fallback. Both
kernels share one interface (``matmul``, ``mul_slice``, ``addmul_slice``)
and are cross-checked in the test suite.
"""

from __future__ import annotations

from functools import lru_cache

try:
    from fairshare import _gfcore as kernel

    BACKEND = "compiled"
except ImportError:  # pragma: no cover - depends on build environment
    from fairshare import _gfpure as kernel

    BACKEND = "pure-python"

PRIM = 0x11d
FIELD_MAX = 255  # number of nonzero field elements; caps n for the code

_EXP = [0] * 512
_LOG = [0] * 256
_x = 1
for _i in range(255):
    _EXP[_i] = _x
    _LOG[_x] = _i
    _x <<= 1
    if _x & 0x100:
        _x ^= PRIM
for _i in range(255, 512):
    _EXP[_i] = _EXP[_i - 255]
del _x, _i


def gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return _EXP[_LOG[a] + _LOG[b]]


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("GF(256) inverse of zero")
    return _EXP[255 - _LOG[a]]


def gf_div(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("GF(256) division by zero")
    if a == 0:
        return 0
    return _EXP[(_LOG[a] - _LOG[b]) % 255]


def mat_mul(a: list[list[int]], b: list[list[int]]) -> list[list[int]]:
    rows, inner, cols = len(a), len(b), len(b[0])
    out = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        for t in range(inner):
            coef = a[i][t]
            if coef == 0:
                continue
            brow = b[t]
            orow = out[i]
            for j in range(cols):
                orow[j] ^= gf_mul(coef, brow[j])
    return out


def mat_inv(m: list[list[int]]) -> list[list[int]]:
    """Gauss-Jordan inverse over GF(256); raises ValueError if singular."""
    n = len(m)
    a = [row[:] for row in m]
    inv = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise ValueError("singular matrix")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            inv[col], inv[pivot] = inv[pivot], inv[col]
        scale = gf_inv(a[col][col])
        for j in range(n):
            a[col][j] = gf_mul(a[col][j], scale)
            inv[col][j] = gf_mul(inv[col][j], scale)
        for r in range(n):
            if r == col or a[r][col] == 0:
                continue
            factor = a[r][col]
            for j in range(n):
                a[r][j] ^= gf_mul(factor, a[col][j])
                inv[r][j] ^= gf_mul(factor, inv[col][j])
    return inv


@lru_cache(maxsize=None)
def generator_matrix(k: int, n: int) -> tuple[tuple[int, ...], ...]:
    """n x k systematic MDS generator: top k rows are the identity.

    Built as V * inv(V_top) where V is the Vandermonde matrix on the
    distinct points 0..n-1. Right-multiplying by an invertible matrix
    preserves the Vandermonde property that every k-row submatrix is
    invertible, so any k shards reconstruct.
    """
    if not 1 <= k <= n <= FIELD_MAX:
        raise ValueError(f"need 1 <= k <= n <= {FIELD_MAX}, got k={k} n={n}")
    vand = []
    for point in range(n):
        row = []
        value = 1
        for _ in range(k):
            row.append(value)
            value = gf_mul(value, point)
        vand.append(row)
    top_inv = mat_inv([row[:] for row in vand[:k]])
    g = mat_mul(vand, top_inv)
    for i in range(k):  # systematic by construction; cheap self-check
        assert g[i] == [1 if j == i else 0 for j in range(k)]
    return tuple(tuple(row) for row in g)


def matmul_rows(rows: list[list[int]] | tuple, shards: list[bytes]) -> list[bytes]:
    """Apply a GF matrix (list of rows) to equal-length shards via the kernel."""
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    flat = bytes(v for row in rows for v in row)
    return kernel.matmul(flat, nrows, ncols, shards)
