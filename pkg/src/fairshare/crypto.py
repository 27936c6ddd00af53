"""Content addressing, convergent chunk encryption, and signed ledger calls.

One hash function (SHA-256) is used everywhere: file URIs, convergent keys,
and hash lists. Chunk encryption is AES-SIV keyed by the hash of the
serialized plaintext chunk, which makes ciphertexts deterministic (the
convergence property) while still rejecting tampered ciphertexts or wrong
keys. Ledger calls are Ed25519-signed envelopes verified against a registry
of party public keys.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature as _InvalidSignature
from cryptography.exceptions import InvalidTag as _InvalidTag
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import AESSIV

from fairshare.codec import PlainChunk

DIGEST_LEN = 32
CIPHERTEXT_OVERHEAD = 16  # AES-SIV synthetic IV / auth tag
ENC_CHUNK_FORMAT_VERSION = 0x01


class CryptoError(Exception):
    pass


class EmptyFile(CryptoError):
    pass


class DecryptionFailure(CryptoError):
    pass


class UnknownCaller(CryptoError):
    pass


class InvalidSignature(CryptoError):
    pass


class EncryptedChunkFormatError(CryptoError):
    pass


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


@dataclass(frozen=True)
class Uri:
    """Content identifier: hash of the file bytes, rendered as hex."""

    digest: bytes

    def __post_init__(self):
        if len(self.digest) != DIGEST_LEN:
            raise CryptoError(f"URI digest must be {DIGEST_LEN} bytes")

    @property
    def hex(self) -> str:
        return self.digest.hex()

    def __str__(self) -> str:
        return self.hex

    @classmethod
    def from_hex(cls, text: str) -> "Uri":
        try:
            return cls(bytes.fromhex(text))
        except ValueError as exc:
            raise CryptoError(f"bad URI hex: {text!r}") from exc


def generate_uri(file: bytes) -> Uri:
    """Deterministic, collision-resistant address for a file's bytes."""
    if len(file) == 0:
        raise EmptyFile("cannot address an empty file")
    return Uri(sha256(file))


@dataclass(frozen=True)
class ConvergentKey:
    """Hash of the serialized plaintext chunk; doubles as its cipher key."""

    key: bytes

    def __post_init__(self):
        if len(self.key) != DIGEST_LEN:
            raise CryptoError(f"convergent key must be {DIGEST_LEN} bytes")

    @property
    def hex(self) -> str:
        return self.key.hex()


@dataclass(frozen=True)
class EncryptedChunk:
    """Ciphertext of one serialized PlainChunk."""

    ciphertext: bytes

    @property
    def hash(self) -> bytes:
        return sha256(self.ciphertext)

    def to_bytes(self) -> bytes:
        return (
            bytes([ENC_CHUNK_FORMAT_VERSION])
            + self.hash
            + len(self.ciphertext).to_bytes(8, "big")
            + self.ciphertext
        )

    @classmethod
    def from_bytes(cls, raw: bytes) -> "EncryptedChunk":
        if len(raw) < 1 + DIGEST_LEN + 8:
            raise EncryptedChunkFormatError("encrypted chunk too short")
        if raw[0] != ENC_CHUNK_FORMAT_VERSION:
            raise EncryptedChunkFormatError(f"unsupported version {raw[0]}")
        claimed = raw[1 : 1 + DIGEST_LEN]
        length = int.from_bytes(raw[1 + DIGEST_LEN : 1 + DIGEST_LEN + 8], "big")
        ciphertext = raw[1 + DIGEST_LEN + 8 :]
        if len(ciphertext) != length:
            raise EncryptedChunkFormatError("ciphertext length mismatch")
        chunk = cls(bytes(ciphertext))
        if chunk.hash != claimed:
            raise EncryptedChunkFormatError("embedded hash does not match ciphertext")
        return chunk


def convergent_encrypt(chunk: PlainChunk) -> tuple[EncryptedChunk, ConvergentKey]:
    """Encrypt a chunk under the hash of its own serialized bytes.

    Equal plaintexts give byte-identical (key, ciphertext) pairs; the key is
    unique per plaintext so the deterministic SIV mode is safe.
    """
    serialized = chunk.to_bytes()
    key = ConvergentKey(sha256(serialized))
    ciphertext = AESSIV(key.key).encrypt(serialized, None)
    return EncryptedChunk(ciphertext), key


def convergent_decrypt(enc: EncryptedChunk, key: ConvergentKey) -> PlainChunk:
    """Authenticated decryption: wrong key or tampered bytes fail loudly."""
    try:
        serialized = AESSIV(key.key).decrypt(enc.ciphertext, None)
    except _InvalidTag as exc:
        raise DecryptionFailure("wrong key or tampered ciphertext") from exc
    return PlainChunk.from_bytes(serialized)


def verify_chunk_integrity(enc: EncryptedChunk, key: ConvergentKey, hash_list) -> bool:
    """The facilitator's upload check, as a pure predicate.

    True iff the ciphertext hash appears in the published hash list AND the
    ciphertext decrypts under `key` to a chunk whose hash equals `key`
    (i.e. the key map entry really is convergent for this chunk).
    """
    try:
        if enc.hash not in list(hash_list):
            return False
        serialized = AESSIV(key.key).decrypt(enc.ciphertext, None)
        return sha256(serialized) == key.key
    except Exception:
        return False


# --- signed ledger-call envelope ---


@dataclass(frozen=True)
class SignedCall:
    caller_id: str
    op: str
    payload: bytes
    signature: bytes

    def signed_message(self) -> bytes:
        return _call_message(self.caller_id, self.op, self.payload)


def _call_message(caller_id: str, op: str, payload: bytes) -> bytes:
    caller = caller_id.encode()
    name = op.encode()
    return (
        len(caller).to_bytes(2, "big")
        + caller
        + len(name).to_bytes(2, "big")
        + name
        + len(payload).to_bytes(8, "big")
        + payload
    )


class PartyKeys:
    """A party's Ed25519 keypair, derived deterministically from a seed."""

    def __init__(self, party_id: str, private_key: Ed25519PrivateKey):
        self.party_id = party_id
        self._private = private_key
        self.public_bytes = private_key.public_key().public_bytes_raw()

    @classmethod
    def from_seed(cls, party_id: str, seed: bytes) -> "PartyKeys":
        material = sha256(b"fairshare-party-key:" + seed + b":" + party_id.encode())
        return cls(party_id, Ed25519PrivateKey.from_private_bytes(material))

    def sign_call(self, op: str, payload: bytes) -> SignedCall:
        signature = self._private.sign(_call_message(self.party_id, op, payload))
        return SignedCall(self.party_id, op, payload, signature)


def sign_call(keys: PartyKeys, op: str, payload: bytes) -> SignedCall:
    return keys.sign_call(op, payload)


def verify_call(call: SignedCall, registry: dict[str, bytes]) -> bool:
    """True iff the signature verifies under the caller's registered key.

    Raises UnknownCaller when the caller id has no registered public key.
    """
    public = registry.get(call.caller_id)
    if public is None:
        raise UnknownCaller(f"no registered key for {call.caller_id!r}")
    try:
        Ed25519PublicKey.from_public_bytes(public).verify(
            call.signature, call.signed_message()
        )
        return True
    except _InvalidSignature:
        return False
