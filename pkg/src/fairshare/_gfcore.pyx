# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled GF(2^8) kernel: shard-wide multiply-accumulate loops.

Same interface as fairshare._gfpure; fairshare.gf256 picks whichever
imports. Field polynomial x^8+x^4+x^3+x^2+1 (0x11d).
"""

from cpython.bytes cimport PyBytes_FromStringAndSize

cdef int PRIM = 0x11d

cdef unsigned char MUL[256][256]

cdef void _init_tables():
    cdef int exp[512]
    cdef int log[256]
    cdef int i, x, a, b
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= PRIM
    for i in range(255, 512):
        exp[i] = exp[i - 255]
    for a in range(256):
        MUL[0][a] = 0
        MUL[a][0] = 0
    for a in range(1, 256):
        for b in range(1, 256):
            MUL[a][b] = <unsigned char>exp[log[a] + log[b]]

_init_tables()


def mul_slice(int coef, const unsigned char[::1] data):
    """Multiply every byte of `data` by `coef` in GF(2^8)."""
    cdef Py_ssize_t n = data.shape[0]
    cdef bytes out = PyBytes_FromStringAndSize(NULL, n)
    cdef unsigned char* dst = <unsigned char*><char*>out
    cdef unsigned char* row = MUL[coef & 0xFF]
    cdef Py_ssize_t j
    for j in range(n):
        dst[j] = row[data[j]]
    return out


def addmul_slice(unsigned char[::1] dst, int coef, const unsigned char[::1] src):
    """dst ^= coef * src, elementwise over GF(2^8). Lengths must match."""
    cdef Py_ssize_t n = dst.shape[0]
    if src.shape[0] != n:
        raise ValueError("length mismatch")
    cdef unsigned char* row = MUL[coef & 0xFF]
    cdef Py_ssize_t j
    if coef == 0:
        return
    if coef == 1:
        for j in range(n):
            dst[j] ^= src[j]
    else:
        for j in range(n):
            dst[j] ^= row[src[j]]


def matmul(const unsigned char[::1] matrix, Py_ssize_t rows, Py_ssize_t cols, shards):
    """Multiply a rows*cols GF matrix by a column of equal-length shards.

    `matrix` is row-major; `shards` is a sequence of `cols` byte strings.
    Returns `rows` byte strings: out[r] = xor_c matrix[r,c] * shards[c].
    """
    if matrix.shape[0] != rows * cols:
        raise ValueError("matrix size mismatch")
    if len(shards) != cols:
        raise ValueError("shard count mismatch")
    cdef Py_ssize_t length = len(shards[0]) if cols else 0
    cdef list views = []
    cdef const unsigned char[::1] v
    for s in shards:
        v = s
        if v.shape[0] != length:
            raise ValueError("shard length mismatch")
        views.append(v)
    cdef list out = []
    cdef Py_ssize_t r, c, j
    cdef int coef
    cdef bytes acc_b
    cdef unsigned char* acc
    cdef unsigned char* row
    for r in range(rows):
        acc_b = PyBytes_FromStringAndSize(NULL, length)
        acc = <unsigned char*><char*>acc_b
        for j in range(length):
            acc[j] = 0
        for c in range(cols):
            coef = matrix[r * cols + c]
            if coef == 0:
                continue
            v = views[c]
            if coef == 1:
                for j in range(length):
                    acc[j] ^= v[j]
            else:
                row = MUL[coef]
                for j in range(length):
                    acc[j] ^= row[v[j]]
        out.append(acc_b)
    return out
