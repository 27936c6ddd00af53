"""Pure-Python GF(2^8) kernel, used when the compiled extension is absent.

Stdlib-only but not naive: scalar multiplication of a whole shard maps to
``bytes.translate`` with a 256-entry table, and shard XOR runs through big
ints, so both inner loops execute in C. Typically within ~5-10x of the
Cython kernel rather than the ~100x of a per-byte Python loop.

Field polynomial x^8+x^4+x^3+x^2+1 (0x11d), same as the compiled kernel.
"""

PRIM = 0x11d


def _build_tables():
    exp = [0] * 512
    log = [0] * 256
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= PRIM
    for i in range(255, 512):
        exp[i] = exp[i - 255]
    mul = [b"\x00" * 256]  # coef 0 annihilates
    for a in range(1, 256):
        la = log[a]
        mul.append(bytes(exp[la + log[b]] if b else 0 for b in range(256)))
    return exp, log, mul


_EXP, _LOG, _MUL_TABLE = _build_tables()


def mul_slice(coef, data):
    """Multiply every byte of `data` by `coef` in GF(2^8)."""
    return bytes(data).translate(_MUL_TABLE[coef & 0xFF])


def _xor_bytes(a, b):
    n = len(a)
    return (int.from_bytes(a, "little") ^ int.from_bytes(b, "little")).to_bytes(n, "little")


def addmul_slice(dst, coef, src):
    """dst ^= coef * src, elementwise over GF(2^8). `dst` is a bytearray."""
    if len(dst) != len(src):
        raise ValueError("length mismatch")
    coef &= 0xFF
    if coef == 0:
        return
    term = bytes(src) if coef == 1 else bytes(src).translate(_MUL_TABLE[coef])
    dst[:] = _xor_bytes(dst, term)


def matmul(matrix, rows, cols, shards):
    """Multiply a rows*cols GF matrix by a column of equal-length shards.

    `matrix` is row-major bytes; `shards` is a sequence of `cols` byte
    strings. Returns `rows` byte strings.
    """
    if len(matrix) != rows * cols:
        raise ValueError("matrix size mismatch")
    if len(shards) != cols:
        raise ValueError("shard count mismatch")
    length = len(shards[0]) if cols else 0
    srcs = [bytes(s) for s in shards]
    for s in srcs:
        if len(s) != length:
            raise ValueError("shard length mismatch")
    out = []
    for r in range(rows):
        acc = 0
        for c in range(cols):
            coef = matrix[r * cols + c]
            if coef == 0:
                continue
            term = srcs[c] if coef == 1 else srcs[c].translate(_MUL_TABLE[coef])
            acc ^= int.from_bytes(term, "little")
        out.append(acc.to_bytes(length, "little"))
    return out
