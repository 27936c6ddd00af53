"""k-of-n erasure coding of byte content into chunks, and reconstruction.

Systematic Reed-Solomon over GF(2^8): the first k chunks are the file split
into equal slices (zero-padded to a multiple of k), the remaining n-k are
parity. Any k distinct chunks recover the file exactly; fewer are refused.

Each chunk serializes to a fixed wire format (version, index, original
length, payload) and that serialized form is what gets encrypted and hashed
downstream, so the metadata is integrity-protected along with the payload.
"""

from __future__ import annotations

from dataclasses import dataclass

from fairshare import gf256

CHUNK_FORMAT_VERSION = 0x01
_HEADER_LEN = 1 + 1 + 8  # version, index, original_len


class CodecError(Exception):
    """Base class for erasure-coding failures."""


class InvalidParams(CodecError):
    pass


class EmptyFile(CodecError):
    pass


class InsufficientChunks(CodecError):
    pass


class InconsistentChunks(CodecError):
    pass


class DecodeFailure(CodecError):
    pass


class ChunkFormatError(CodecError):
    pass


@dataclass(frozen=True)
class CodingParams:
    """Replication ratio k:n — any k of the n produced chunks reconstruct."""

    k: int
    n: int

    def __post_init__(self):
        if not isinstance(self.k, int) or not isinstance(self.n, int):
            raise InvalidParams("k and n must be integers")
        if not 1 <= self.k <= self.n <= gf256.FIELD_MAX:
            raise InvalidParams(
                f"need 1 <= k <= n <= {gf256.FIELD_MAX}, got k={self.k} n={self.n}"
            )

    def chunk_payload_len(self, original_len: int) -> int:
        return -(-original_len // self.k)


@dataclass(frozen=True)
class PlainChunk:
    """One erasure-coded share plus the metadata needed to reassemble."""

    index: int
    original_len: int
    payload: bytes

    def to_bytes(self) -> bytes:
        if not 0 <= self.index <= 255:
            raise ChunkFormatError(f"chunk index {self.index} out of byte range")
        return (
            bytes([CHUNK_FORMAT_VERSION, self.index])
            + self.original_len.to_bytes(8, "big")
            + self.payload
        )

    @classmethod
    def from_bytes(cls, raw: bytes) -> "PlainChunk":
        if len(raw) < _HEADER_LEN:
            raise ChunkFormatError("chunk too short")
        if raw[0] != CHUNK_FORMAT_VERSION:
            raise ChunkFormatError(f"unsupported chunk format version {raw[0]}")
        return cls(
            index=raw[1],
            original_len=int.from_bytes(raw[2:10], "big"),
            payload=bytes(raw[10:]),
        )


def erasure_code(file: bytes, params: CodingParams) -> list[PlainChunk]:
    """Split `file` into n chunks, any k of which reconstruct it.

    Deterministic; chunks 0..k-1 are the systematic data shards.
    """
    if not isinstance(params, CodingParams):
        params = CodingParams(*params)
    if len(file) == 0:
        raise EmptyFile("cannot erasure-code an empty file")
    k, n = params.k, params.n
    size = params.chunk_payload_len(len(file))
    padded = file + b"\x00" * (k * size - len(file))
    data_shards = [padded[i * size : (i + 1) * size] for i in range(k)]
    g = gf256.generator_matrix(k, n)
    parity = gf256.matmul_rows(list(g[k:]), data_shards) if n > k else []
    shards = data_shards + parity
    return [PlainChunk(index=i, original_len=len(file), payload=shards[i]) for i in range(n)]


def recover(chunks, params: CodingParams) -> bytes:
    """Reconstruct the original file bytes from any >= k distinct chunks.

    Refuses (InsufficientChunks) rather than guessing when fewer than k
    distinct indices are supplied. Surplus chunks beyond the first k are
    used as a consistency check: if re-encoding disagrees with any supplied
    chunk, DecodeFailure is raised.
    """
    if not isinstance(params, CodingParams):
        params = CodingParams(*params)
    k, n = params.k, params.n

    by_index: dict[int, PlainChunk] = {}
    for chunk in chunks:
        if not 0 <= chunk.index < n:
            raise InconsistentChunks(f"chunk index {chunk.index} outside [0, {n})")
        seen = by_index.get(chunk.index)
        if seen is not None and seen.payload != chunk.payload:
            raise InconsistentChunks(f"conflicting payloads for chunk {chunk.index}")
        by_index[chunk.index] = chunk

    if len(by_index) < k:
        raise InsufficientChunks(f"need {k} distinct chunks, got {len(by_index)}")

    lens = {c.original_len for c in by_index.values()}
    if len(lens) != 1:
        raise InconsistentChunks(f"mismatched original_len values: {sorted(lens)}")
    original_len = lens.pop()
    size = params.chunk_payload_len(original_len)
    if any(len(c.payload) != size for c in by_index.values()):
        raise InconsistentChunks("chunk payload length does not match ceil(len/k)")

    ordered = [by_index[i] for i in sorted(by_index)]
    use, extra = ordered[:k], ordered[k:]

    g = gf256.generator_matrix(k, n)
    if [c.index for c in use] == list(range(k)):
        data_shards = [c.payload for c in use]
    else:
        sub = [list(g[c.index]) for c in use]
        try:
            inv = gf256.mat_inv(sub)
        except ValueError as exc:  # unreachable for an MDS code; belt and braces
            raise DecodeFailure("decode matrix singular") from exc
        data_shards = gf256.matmul_rows(inv, [c.payload for c in use])

    for chunk in extra:  # surplus shards let us detect corruption
        expect = gf256.matmul_rows([list(g[chunk.index])], data_shards)[0]
        if expect != chunk.payload:
            raise DecodeFailure(f"chunk {chunk.index} inconsistent with decoded data")

    return b"".join(data_shards)[:original_len]
