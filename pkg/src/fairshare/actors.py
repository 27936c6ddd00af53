"""Protocol state machines for publisher, facilitator, and client roles.

Actors are sans-io: protocol logic is written as generators that yield
effects (Send, Recv, Call, Sleep, Now) and receive the outcome of each
effect from whatever runtime drives them. The same actor code therefore
runs both on the zero-latency in-process runtime below (used by the CLI
demo and most tests) and on the discrete-event simulator in
fairshare.netsim, which charges simulated time for every effect.

All cross-actor influence flows through messages or the ledger; actors
share no state.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable

from fairshare import codec, crypto, incentives
from fairshare.codec import CodingParams, PlainChunk
from fairshare.crypto import ConvergentKey, EncryptedChunk, PartyKeys
from fairshare.ledger import Ledger, LedgerError, canonical_json

# --- messages on the wire ---


@dataclass(frozen=True)
class ChunkUpload:
    uri: str
    enc_chunk: bytes  # serialized EncryptedChunk


@dataclass(frozen=True)
class ChunkRequest:
    uri: str
    req_id: str


@dataclass(frozen=True)
class ChunkResponse:
    uri: str
    req_id: str
    enc_chunk: bytes


@dataclass(frozen=True)
class Denial:
    uri: str
    req_id: str
    reason: str


_CONTROL_SIZE = 128


def wire_size(message) -> int:
    """Nominal size in bytes, used by the simulator's transfer-time model."""
    if isinstance(message, (ChunkUpload, ChunkResponse)):
        return 64 + len(message.enc_chunk)
    return _CONTROL_SIZE


# --- effects yielded by actor generators ---


@dataclass(frozen=True)
class Send:
    to: str
    message: object  # resumes with bool: accepted by transport


@dataclass(frozen=True)
class Recv:
    deadline: float  # resumes with (sender, message), or TIMEOUT at deadline


@dataclass(frozen=True)
class Call:
    op: str
    args: dict
    signed: bool = False  # resumes with the result; LedgerError is thrown in


@dataclass(frozen=True)
class Sleep:
    ms: float


@dataclass(frozen=True)
class Now:
    pass


TIMEOUT = object()  # Recv sentinel


class ProtocolError(Exception):
    pass


class UploadIncomplete(ProtocolError):
    pass


class DeliveryFailed(ProtocolError):
    pass


# --- behavior profiles for fault injection ---

HONEST = "honest"
CRASH = "crash"
REFUSE = "refuse"
GARBAGE = "garbage"
PROFILES = (HONEST, CRASH, REFUSE, GARBAGE)


class Actor:
    def __init__(self, party_id: str, keys: PartyKeys):
        self.party_id = party_id
        self.keys = keys

    def handle_message(self, sender: str, message):
        """Return a handler generator for reactive actors, or None to mailbox."""
        return None


@dataclass(frozen=True)
class PreparedContent:
    """Everything a publisher derives locally before touching the network."""

    uri: str
    k: int
    facilitator_ids: tuple[str, ...]
    enc_chunks: dict[str, bytes]  # facilitator id -> serialized EncryptedChunk
    key_map: dict[str, str]  # facilitator id -> convergent key hex
    hash_list: list[str]  # hex hashes of encrypted chunks, in facilitator order


def prepare_content(file: bytes, params: CodingParams, facilitator_ids) -> PreparedContent:
    """Erasure-code, convergently encrypt, and hash a file for its hosts."""
    fac_ids = tuple(facilitator_ids)
    if len(set(fac_ids)) != len(fac_ids):
        raise ValueError("facilitator ids must be distinct")
    if len(fac_ids) != params.n:
        raise ValueError(f"need exactly n={params.n} facilitators, got {len(fac_ids)}")
    uri = crypto.generate_uri(file)
    chunks = codec.erasure_code(file, params)
    enc_chunks: dict[str, bytes] = {}
    key_map: dict[str, str] = {}
    hash_list: list[str] = []
    for fid, chunk in zip(fac_ids, chunks):
        enc, key = crypto.convergent_encrypt(chunk)
        enc_chunks[fid] = enc.to_bytes()
        key_map[fid] = key.hex
        hash_list.append(enc.hash.hex())
    return PreparedContent(
        uri=uri.hex, k=params.k, facilitator_ids=fac_ids,
        enc_chunks=enc_chunks, key_map=key_map, hash_list=hash_list,
    )


class Publisher(Actor):
    """Runs the content-upload flow: chunk delivery first, then the listing."""

    def __init__(self, party_id, keys, *, ledger_checks=True, oob_catalog=None,
                 est_failure_rate=0.0, send_retries=3, retry_backoff_ms=100.0):
        super().__init__(party_id, keys)
        self.ledger_checks = ledger_checks
        self.oob_catalog = oob_catalog if oob_catalog is not None else {}
        self.est_failure_rate = est_failure_rate
        self.send_retries = send_retries
        self.retry_backoff_ms = retry_backoff_ms

    def publish(self, file: bytes, params: CodingParams, facilitator_ids,
                price_micros: int, *, name: str = "", payout_micros: int | None = None,
                corrupt_for: Iterable[str] = ()):
        """Session generator; returns the content uri (hex) on success."""
        prepared = prepare_content(file, params, facilitator_ids)
        if payout_micros is None:
            payout_micros = incentives.facilitator_payout_micros(
                price_micros, params.n, self.est_failure_rate
            )
        corrupt_for = set(corrupt_for)

        unreachable = []
        for fid in prepared.facilitator_ids:
            blob = prepared.enc_chunks[fid]
            if fid in corrupt_for:
                blob = _corrupt_ciphertext(blob)
            delivered = False
            for attempt in range(self.send_retries):
                delivered = yield Send(fid, ChunkUpload(prepared.uri, blob))
                if delivered:
                    break
                if attempt + 1 < self.send_retries:
                    yield Sleep(self.retry_backoff_ms * (attempt + 1))
            if not delivered:
                unreachable.append(fid)
        if unreachable:
            raise UploadIncomplete(f"facilitators unreachable: {unreachable}")

        if self.ledger_checks:
            yield Call("add_content_by_pub", {
                "uri": prepared.uri,
                "name": name,
                "price": price_micros,
                "payout_per_facilitator": payout_micros,
                "k": prepared.k,
                "facilitator_ids": list(prepared.facilitator_ids),
                "key_map": prepared.key_map,
                "hash_list": prepared.hash_list,
            }, signed=True)
        else:
            # baseline runs distribute key material out of band
            self.oob_catalog[prepared.uri] = {
                "k": prepared.k,
                "facilitator_ids": list(prepared.facilitator_ids),
                "key_map": dict(prepared.key_map),
                "hash_list": list(prepared.hash_list),
            }
        return prepared.uri


def _corrupt_ciphertext(enc_blob: bytes) -> bytes:
    """Flip one payload byte but keep the container self-consistent."""
    enc = EncryptedChunk.from_bytes(enc_blob)
    tampered = bytearray(enc.ciphertext)
    tampered[-1] ^= 0xFF
    return EncryptedChunk(bytes(tampered)).to_bytes()


class Facilitator(Actor):
    """Stores one encrypted chunk per content and serves paying clients."""

    def __init__(self, party_id, keys, *, profile=HONEST, ledger_checks=True,
                 rng: random.Random | None = None,
                 verify_retries=5, verify_retry_ms=200.0):
        super().__init__(party_id, keys)
        if profile not in PROFILES:
            raise ValueError(f"unknown behavior profile {profile!r}")
        self.profile = profile
        self.ledger_checks = ledger_checks
        self.rng = rng or random.Random(0)
        self.verify_retries = verify_retries
        self.verify_retry_ms = verify_retry_ms
        self.store: dict[str, bytes] = {}

    def handle_message(self, sender, message):
        if isinstance(message, ChunkUpload):
            return self._on_upload(sender, message)
        if isinstance(message, ChunkRequest):
            return self._on_request(sender, message)
        return None

    def _on_upload(self, sender, msg: ChunkUpload):
        if not self.ledger_checks:
            self.store[msg.uri] = msg.enc_chunk
            return
        # Chunks arrive before the listing exists (upload precedes the
        # ledger record); hold the chunk and re-check until a retry budget
        # runs out, then drop it.
        reply = None
        for attempt in range(self.verify_retries + 1):
            try:
                reply = yield Call("get_upload_keys", {"uri": msg.uri}, signed=True)
                break
            except LedgerError as exc:
                if exc.code != "UnknownUri" or attempt == self.verify_retries:
                    return
                yield Sleep(self.verify_retry_ms)
        ok = False
        try:
            enc = EncryptedChunk.from_bytes(msg.enc_chunk)
            ok = crypto.verify_chunk_integrity(
                enc,
                ConvergentKey(bytes.fromhex(reply["key"])),
                [bytes.fromhex(h) for h in reply["hash_list"]],
            )
        except crypto.CryptoError:
            ok = False
        if ok:
            self.store[msg.uri] = msg.enc_chunk
        else:
            yield Call("complaint", {"uri": msg.uri}, signed=True)

    def _on_request(self, sender, msg: ChunkRequest):
        if self.profile == CRASH:
            return
        if self.profile == REFUSE:
            yield Send(sender, Denial(msg.uri, msg.req_id, "refused"))
            return
        stored = self.store.get(msg.uri)
        if stored is None:
            yield Send(sender, Denial(msg.uri, msg.req_id, "NotStored"))
            return
        if self.profile == GARBAGE:
            junk = self.rng.randbytes(len(stored))
            yield Send(sender, ChunkResponse(msg.uri, msg.req_id, junk))
            return
        if self.ledger_checks:
            paid = yield Call("is_payment_done", {"uri": msg.uri, "req_id": msg.req_id})
            if not paid:
                yield Send(sender, Denial(msg.uri, msg.req_id, "PaymentNotVerified"))
                return
        yield Send(sender, ChunkResponse(msg.uri, msg.req_id, stored))

    def complain(self, uri: str):
        """Scripted complaint (fault injection for scenarios)."""
        yield Call("complaint", {"uri": uri}, signed=True)


AGGRESSIVE = "aggressive"
LAZY = "lazy"
STRATEGIES = (AGGRESSIVE, LAZY)


class Client(Actor):
    """Purchases content: pay, fetch >= k valid chunks, decrypt, recover."""

    def __init__(self, party_id, keys, *, strategy=LAZY, ledger_checks=True,
                 oob_catalog=None, rng: random.Random | None = None,
                 request_timeout_ms=2000.0):
        super().__init__(party_id, keys)
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown fetch strategy {strategy!r}")
        self.strategy = strategy
        self.ledger_checks = ledger_checks
        self.oob_catalog = oob_catalog if oob_catalog is not None else {}
        self.rng = rng or random.Random(0)
        self.request_timeout_ms = request_timeout_ms

    def new_req_id(self) -> str:
        return self.rng.randbytes(16).hex()

    def purchase(self, uri: str, *, req_id: str | None = None):
        """Session generator; returns the recovered file bytes."""
        if req_id is None:
            req_id = self.new_req_id()

        if self.ledger_checks:
            listing = yield Call("get_listing", {"uri": uri})
            yield Call("get_price", {"uri": uri})  # rejects censored/unavailable
            yield Call("pay_for_content", {"uri": uri, "req_id": req_id}, signed=True)
            keys = yield Call("get_keys", {"uri": uri, "req_id": req_id}, signed=True)
            fac_ids = list(listing["facilitator_ids"])
            k = listing["k"]
            key_map = keys["key_map"]
            hash_list = keys["hash_list"]
        else:
            entry = self.oob_catalog.get(uri)
            if entry is None:
                raise DeliveryFailed(f"no out-of-band catalog entry for {uri}")
            fac_ids = list(entry["facilitator_ids"])
            k = entry["k"]
            key_map = entry["key_map"]
            hash_list = entry["hash_list"]

        n = len(fac_ids)
        params = CodingParams(k, n)
        order = self.rng.sample(fac_ids, n)
        batch = n if self.strategy == AGGRESSIVE else min(k, n)

        outstanding: dict[str, float] = {}
        collected: dict[int, PlainChunk] = {}
        failures: list[str] = []
        next_i = 0

        now = yield Now()
        while next_i < batch:
            fid = order[next_i]
            next_i += 1
            yield Send(fid, ChunkRequest(uri, req_id))
            outstanding[fid] = now + self.request_timeout_ms

        while len(collected) < k and (outstanding or next_i < n):
            failed: list[str] = []
            if not outstanding:
                failed = [None]  # no live request: force one top-up below
            else:
                asked = min(outstanding.values())
                got = yield Recv(asked)
                if got is TIMEOUT:
                    failed = [fid for fid, dl in outstanding.items() if dl <= asked]
                else:
                    sender, message = got
                    if sender not in outstanding:
                        continue  # stale response from an abandoned request
                    if isinstance(message, ChunkResponse) and message.req_id == req_id:
                        outstanding.pop(sender)
                        decoded = self._validate_chunk(message, fac_ids, key_map, hash_list)
                        if decoded is None:
                            failed = [sender]
                        else:
                            index, chunk = decoded
                            collected[index] = chunk
                    elif isinstance(message, Denial) and message.req_id == req_id:
                        failed = [sender]
                    else:
                        continue  # unrelated message; keep waiting
            for fid in failed:
                if fid is not None:
                    outstanding.pop(fid, None)
                    failures.append(fid)
                if next_i < n:
                    nfid = order[next_i]
                    next_i += 1
                    now = yield Now()
                    yield Send(nfid, ChunkRequest(uri, req_id))
                    outstanding[nfid] = now + self.request_timeout_ms

        if len(collected) < k:
            raise DeliveryFailed(
                f"got {len(collected)} of {k} valid chunks after contacting "
                f"{next_i} facilitators (failures: {failures})"
            )
        file = codec.recover(list(collected.values()), params)
        if crypto.generate_uri(file).hex != uri:
            raise DeliveryFailed("recovered file does not match its uri")
        return file

    def _validate_chunk(self, message: ChunkResponse, fac_ids, key_map, hash_list):
        """Verify a response against the hash list and decrypt it.

        The hash-list position, not the sender, decides which key applies:
        a malicious facilitator replaying some other host's chunk cannot
        smuggle in a duplicate position. Returns (position, chunk) or None.
        """
        try:
            enc = EncryptedChunk.from_bytes(message.enc_chunk)
        except crypto.CryptoError:
            return None
        try:
            index = hash_list.index(enc.hash.hex())
        except ValueError:
            return None
        try:
            key = ConvergentKey(bytes.fromhex(key_map[fac_ids[index]]))
            chunk = crypto.convergent_decrypt(enc, key)
        except (crypto.CryptoError, KeyError):
            return None
        if chunk.index != index:
            return None
        return index, chunk


# --- zero-latency in-process runtime ---


class DirectRuntime:
    """Drives actor generators synchronously, in-process, without latency.

    Message sends are queued and delivered FIFO between generator steps, so
    the Algorithm-1 ordering (chunks sent before the listing is recorded)
    resolves naturally: handlers run after the sending session finishes or
    blocks on Recv. Recv returns TIMEOUT once all pending deliveries have
    drained and nothing is addressed to the session, which in a zero-latency
    world means nothing will ever arrive.
    """

    def __init__(self, ledger: Ledger):
        self.ledger = ledger
        self.actors: dict[str, Actor] = {}
        self.mailboxes: dict[str, deque] = {}
        self.pending: deque = deque()

    def add_actor(self, actor: Actor):
        if actor.party_id in self.actors:
            raise ValueError(f"duplicate actor id {actor.party_id!r}")
        self.actors[actor.party_id] = actor
        self.mailboxes[actor.party_id] = deque()

    def run_session(self, actor: Actor, gen):
        """Drive one session generator to completion; returns its value."""
        value = self._drive(actor, gen, reactive=False)
        self._drain()
        return value

    # internal

    def _drive(self, actor: Actor, gen, *, reactive: bool):
        send_value = None
        throw_exc = None
        while True:
            try:
                if throw_exc is not None:
                    effect = gen.throw(throw_exc)
                    throw_exc = None
                else:
                    effect = gen.send(send_value)
            except StopIteration as stop:
                return stop.value
            send_value = None
            if isinstance(effect, Send):
                if effect.to in self.actors:
                    self.pending.append((actor.party_id, effect.to, effect.message))
                    send_value = True
                else:
                    send_value = False
            elif isinstance(effect, Recv):
                self._drain()
                box = self.mailboxes[actor.party_id]
                send_value = box.popleft() if box else TIMEOUT
            elif isinstance(effect, Call):
                try:
                    send_value = self._ledger_call(actor, effect)
                except LedgerError as exc:
                    throw_exc = exc
            elif isinstance(effect, (Sleep, Now)):
                send_value = 0.0 if isinstance(effect, Now) else None
            else:
                raise TypeError(f"unknown effect {effect!r}")

    def _drain(self):
        while self.pending:
            sender, to, message = self.pending.popleft()
            actor = self.actors[to]
            handler = actor.handle_message(sender, message)
            if handler is None:
                self.mailboxes[to].append((sender, message))
            else:
                self._drive(actor, handler, reactive=True)

    def _ledger_call(self, actor: Actor, effect: Call):
        if effect.signed:
            call = actor.keys.sign_call(effect.op, canonical_json(effect.args))
            return self.ledger.submit(call)
        return query_ledger(self.ledger, effect.op, effect.args)


def query_ledger(ledger: Ledger, op: str, args: dict):
    """Dispatch an unauthenticated read to the ledger."""
    if op == "get_price":
        return ledger.get_price(args["uri"])
    if op == "get_listing":
        return ledger.get_listing(args["uri"])
    if op == "is_payment_done":
        return ledger.is_payment_done(args["uri"], args["req_id"])
    if op == "search_content":
        return ledger.search_content(args.get("query"))
    raise ValueError(f"unknown ledger query {op!r}")
