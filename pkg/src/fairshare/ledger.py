"""The marketplace ledger: a deterministic state machine with an audit trail.

Stands in for the replicated smart contract. All mutating operations arrive
as signed calls, are verified, applied in one total order, and appended to
a hash-chained audit trail whether they succeed or fail. Replaying the
trail from genesis reproduces the live state byte-exactly; the canonical
snapshot serialization (sorted-key JSON) makes that comparison meaningful.

Currency amounts are integer micro-units throughout; see fairshare.money.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from fairshare import crypto
from fairshare.crypto import SignedCall, sha256

GENESIS_PREV_HASH = b"\x00" * 32
TRAIL_FORMAT = "fairshare-trail-v1"

ROLES = ("publisher", "facilitator", "client", "auditor")
STATUS_AVAILABLE = "available"
STATUS_UNAVAILABLE = "unavailable"
STATUS_CENSORED = "censored"


def canonical_json(obj) -> bytes:
    """Byte-stable JSON: sorted keys, no whitespace, ASCII only."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode()


class LedgerError(Exception):
    code = "LedgerError"

    def __init__(self, message: str = "", height: int | None = None):
        super().__init__(message or self.code)
        self.height = height


class DuplicateUri(LedgerError):
    code = "DuplicateUri"


class MalformedRecord(LedgerError):
    code = "MalformedRecord"


class BadSignature(LedgerError):
    code = "BadSignature"


class UnknownCaller(LedgerError):
    code = "UnknownCaller"


class UnknownUri(LedgerError):
    code = "UnknownUri"


class NotAFacilitatorForContent(LedgerError):
    code = "NotAFacilitatorForContent"


class ContentCensored(LedgerError):
    code = "ContentCensored"


class ContentUnavailable(LedgerError):
    code = "ContentUnavailable"


class InsufficientFunds(LedgerError):
    code = "InsufficientFunds"


class DuplicateReqId(LedgerError):
    code = "DuplicateReqId"


class PaymentNotFound(LedgerError):
    code = "PaymentNotFound"


class NotPayer(LedgerError):
    code = "NotPayer"


class NotAuditor(LedgerError):
    code = "NotAuditor"


class ClientRestricted(LedgerError):
    code = "ClientRestricted"


class UnknownOperation(LedgerError):
    code = "UnknownOperation"


class BrokenChain(LedgerError):
    code = "BrokenChain"


class InvalidSignatureEntry(LedgerError):
    code = "InvalidSignature"


class StateMismatch(LedgerError):
    code = "StateMismatch"


_ERRORS = {
    cls.code: cls
    for cls in (
        DuplicateUri, MalformedRecord, BadSignature, UnknownCaller, UnknownUri,
        NotAFacilitatorForContent, ContentCensored, ContentUnavailable,
        InsufficientFunds, DuplicateReqId, PaymentNotFound, NotPayer, NotAuditor,
        ClientRestricted, UnknownOperation,
    )
}


@dataclass
class ContentRecord:
    uri: str
    name: str
    price: int
    payout_per_facilitator: int
    k: int
    publisher_id: str
    facilitator_ids: list[str]
    key_map: dict[str, str]
    hash_list: list[str]
    complaint_set: set[str] = field(default_factory=set)
    denied_clients: set[str] = field(default_factory=set)
    status: str = STATUS_AVAILABLE

    @property
    def n(self) -> int:
        return len(self.facilitator_ids)

    def to_obj(self) -> dict:
        return {
            "uri": self.uri,
            "name": self.name,
            "price": self.price,
            "payout_per_facilitator": self.payout_per_facilitator,
            "k": self.k,
            "publisher_id": self.publisher_id,
            "facilitator_ids": list(self.facilitator_ids),
            "key_map": dict(sorted(self.key_map.items())),
            "hash_list": list(self.hash_list),
            "complaint_set": sorted(self.complaint_set),
            "denied_clients": sorted(self.denied_clients),
            "status": self.status,
        }


@dataclass(frozen=True)
class PaymentRecord:
    req_id: str
    uri: str
    payer_id: str
    amount: int
    payout_per_facilitator: int
    publisher_payout: int
    timestamp: int  # ledger height of the committing entry

    def to_obj(self) -> dict:
        return {
            "req_id": self.req_id,
            "uri": self.uri,
            "payer_id": self.payer_id,
            "amount": self.amount,
            "payout_per_facilitator": self.payout_per_facilitator,
            "publisher_payout": self.publisher_payout,
            "timestamp": self.timestamp,
        }


@dataclass(frozen=True)
class AuditEntry:
    height: int
    prev_hash: bytes
    kind: str  # "genesis" | "call"
    body: dict  # genesis doc, or {"caller","op","payload","signature"} (hex payload/sig)
    result: dict  # {"ok": bool, "error": code|None}
    entry_hash: bytes

    def core_obj(self) -> dict:
        return {
            "height": self.height,
            "kind": self.kind,
            "body": self.body,
            "result": self.result,
        }

    def to_obj(self) -> dict:
        obj = self.core_obj()
        obj["prev_hash"] = self.prev_hash.hex()
        obj["entry_hash"] = self.entry_hash.hex()
        return obj

    @classmethod
    def from_obj(cls, obj: dict) -> "AuditEntry":
        return cls(
            height=obj["height"],
            prev_hash=bytes.fromhex(obj["prev_hash"]),
            kind=obj["kind"],
            body=obj["body"],
            result=obj["result"],
            entry_hash=bytes.fromhex(obj["entry_hash"]),
        )

    def signed_call(self) -> SignedCall:
        assert self.kind == "call"
        return SignedCall(
            caller_id=self.body["caller"],
            op=self.body["op"],
            payload=bytes.fromhex(self.body["payload"]),
            signature=bytes.fromhex(self.body["signature"]),
        )


def _entry_hash(prev_hash: bytes, core: dict) -> bytes:
    return sha256(prev_hash + canonical_json(core))


@dataclass(frozen=True)
class Genesis:
    """Registered parties (id, public key, role) and initial balances."""

    parties: list[dict]  # {"id","public_key","role","balance"}

    def to_obj(self) -> dict:
        return {"parties": sorted(self.parties, key=lambda p: p["id"])}

    @classmethod
    def from_obj(cls, obj: dict) -> "Genesis":
        return cls(parties=obj["parties"])


class Ledger:
    """Single-writer marketplace state machine with append-only audit trail."""

    MUTATING_OPS = (
        "add_content_by_pub", "complaint", "pay_for_content",
        "censor", "uncensor", "restrict_clients",
    )
    SIGNED_READ_OPS = ("get_keys", "get_upload_keys")

    def __init__(self, genesis: Genesis):
        self.parties: dict[str, dict] = {}
        self.accounts: dict[str, int] = {}
        self.contents: dict[str, ContentRecord] = {}
        self.payments: dict[str, PaymentRecord] = {}
        self.trail: list[AuditEntry] = []
        self._apply_genesis(genesis)

    # --- genesis ---

    def _apply_genesis(self, genesis: Genesis):
        doc = genesis.to_obj()
        seen = set()
        for party in doc["parties"]:
            pid, role = party["id"], party["role"]
            if pid in seen:
                raise MalformedRecord(f"duplicate party id {pid!r}")
            if role not in ROLES:
                raise MalformedRecord(f"unknown role {role!r} for {pid!r}")
            if party["balance"] < 0:
                raise MalformedRecord(f"negative genesis balance for {pid!r}")
            bytes.fromhex(party["public_key"])
            seen.add(pid)
            self.parties[pid] = {"public_key": party["public_key"], "role": role}
            self.accounts[pid] = party["balance"]
        core = {"height": 0, "kind": "genesis", "body": doc,
                "result": {"ok": True, "error": None}}
        self.trail.append(AuditEntry(
            height=0, prev_hash=GENESIS_PREV_HASH, kind="genesis", body=doc,
            result=core["result"], entry_hash=_entry_hash(GENESIS_PREV_HASH, core),
        ))

    # --- signed-call entry point ---

    @property
    def height(self) -> int:
        return len(self.trail) - 1

    @property
    def key_registry(self) -> dict[str, bytes]:
        return {pid: bytes.fromhex(p["public_key"]) for pid, p in self.parties.items()}

    def submit(self, call: SignedCall):
        """Verify, execute, and audit one signed call.

        Returns the operation's value on success. On failure the attempt is
        still appended to the trail, then the error is raised.
        """
        try:
            value = self._execute(call)
        except LedgerError as exc:
            self._append(call, ok=False, error=exc.code)
            raise
        self._append(call, ok=True, error=None)
        return value

    def _append(self, call: SignedCall, ok: bool, error: str | None):
        height = len(self.trail)
        prev = self.trail[-1].entry_hash
        body = {
            "caller": call.caller_id,
            "op": call.op,
            "payload": call.payload.hex(),
            "signature": call.signature.hex(),
        }
        result = {"ok": ok, "error": error}
        core = {"height": height, "kind": "call", "body": body, "result": result}
        self.trail.append(AuditEntry(
            height=height, prev_hash=prev, kind="call", body=body,
            result=result, entry_hash=_entry_hash(prev, core),
        ))

    def _execute(self, call: SignedCall):
        if call.caller_id not in self.parties:
            raise UnknownCaller(f"caller {call.caller_id!r} not registered")
        try:
            if not crypto.verify_call(call, self.key_registry):
                raise BadSignature(f"signature check failed for {call.caller_id!r}")
        except crypto.UnknownCaller as exc:
            raise UnknownCaller(str(exc)) from exc
        handler = getattr(self, "_op_" + call.op, None)
        if handler is None or call.op not in self.MUTATING_OPS + self.SIGNED_READ_OPS:
            raise UnknownOperation(f"no such operation {call.op!r}")
        try:
            args = json.loads(call.payload.decode())
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise MalformedRecord(f"payload is not valid JSON: {exc}") from exc
        if not isinstance(args, dict):
            raise MalformedRecord("payload must be a JSON object")
        return handler(call.caller_id, args)

    # --- operations ---

    def _op_add_content_by_pub(self, caller: str, args: dict):
        try:
            uri = args["uri"]
            name = args["name"]
            price = args["price"]
            payout = args["payout_per_facilitator"]
            k = args["k"]
            fac_ids = list(args["facilitator_ids"])
            key_map = dict(args["key_map"])
            hash_list = list(args["hash_list"])
        except (KeyError, TypeError) as exc:
            raise MalformedRecord(f"missing or bad field: {exc}") from exc
        _require_uri(uri)
        if uri in self.contents:
            raise DuplicateUri(f"content {uri} already listed")
        n = len(fac_ids)
        if n == 0 or len(set(fac_ids)) != n:
            raise MalformedRecord("facilitator_ids must be nonempty and distinct")
        if len(hash_list) != n or len(key_map) != n or set(key_map) != set(fac_ids):
            raise MalformedRecord("key_map/hash_list must cover exactly the facilitators")
        if not (isinstance(k, int) and 1 <= k <= n):
            raise MalformedRecord(f"k must satisfy 1 <= k <= n, got k={k} n={n}")
        if not (isinstance(price, int) and isinstance(payout, int)):
            raise MalformedRecord("price and payout_per_facilitator must be integer micros")
        if payout < 0 or price < n * payout:
            raise MalformedRecord("need price >= n * payout_per_facilitator >= 0")
        for fid in fac_ids:
            if fid not in self.parties:
                raise MalformedRecord(f"facilitator {fid!r} not registered")
        for h in hash_list:
            _require_hex(h, 64, "hash_list entry")
        for fid, keyhex in key_map.items():
            _require_hex(keyhex, 64, f"key_map[{fid}]")
        self.contents[uri] = ContentRecord(
            uri=uri, name=str(name), price=price, payout_per_facilitator=payout,
            k=k, publisher_id=caller, facilitator_ids=fac_ids,
            key_map=key_map, hash_list=hash_list,
        )
        return True

    def _op_complaint(self, caller: str, args: dict):
        record = self._record(args.get("uri"))
        if caller not in record.facilitator_ids:
            raise NotAFacilitatorForContent(f"{caller!r} does not host {record.uri}")
        record.complaint_set.add(caller)  # idempotent per facilitator
        if record.status == STATUS_AVAILABLE and len(record.complaint_set) > record.n - record.k:
            record.status = STATUS_UNAVAILABLE
        return True

    def _op_pay_for_content(self, caller: str, args: dict):
        record = self._record(args.get("uri"))
        req_id = args.get("req_id")
        if not isinstance(req_id, str) or not req_id:
            raise MalformedRecord("req_id must be a nonempty string")
        if record.status == STATUS_CENSORED:
            raise ContentCensored(f"{record.uri} is censored")
        if record.status != STATUS_AVAILABLE:
            raise ContentUnavailable(f"{record.uri} is {record.status}")
        if caller in record.denied_clients:
            raise ClientRestricted(f"{caller!r} may not purchase {record.uri}")
        if req_id in self.payments:
            raise DuplicateReqId(f"req_id {req_id!r} already used")
        if self.accounts[caller] < record.price:
            raise InsufficientFunds(
                f"{caller!r} has {self.accounts[caller]}, needs {record.price}"
            )
        publisher_payout = record.price - record.n * record.payout_per_facilitator
        # atomic: height of the entry this call is about to append
        self.accounts[caller] -= record.price
        self.accounts[record.publisher_id] += publisher_payout
        for fid in record.facilitator_ids:
            self.accounts[fid] += record.payout_per_facilitator
        payment = PaymentRecord(
            req_id=req_id, uri=record.uri, payer_id=caller, amount=record.price,
            payout_per_facilitator=record.payout_per_facilitator,
            publisher_payout=publisher_payout, timestamp=len(self.trail),
        )
        self.payments[req_id] = payment
        return True

    def _op_get_keys(self, caller: str, args: dict):
        uri, req_id = args.get("uri"), args.get("req_id")
        record = self._record(uri)
        payment = self.payments.get(req_id)
        if payment is None or payment.uri != uri:
            raise PaymentNotFound(f"no payment for ({uri}, {req_id!r})")
        if payment.payer_id != caller:
            raise NotPayer(f"{caller!r} did not pay under {req_id!r}")
        return {"key_map": dict(record.key_map), "hash_list": list(record.hash_list)}

    def _op_get_upload_keys(self, caller: str, args: dict):
        record = self._record(args.get("uri"))
        if caller not in record.facilitator_ids:
            raise NotAFacilitatorForContent(f"{caller!r} does not host {record.uri}")
        return {"key": record.key_map[caller], "hash_list": list(record.hash_list)}

    def _op_censor(self, caller: str, args: dict):
        self._require_auditor(caller)
        record = self._record(args.get("uri"))
        record.status = STATUS_CENSORED
        return True

    def _op_uncensor(self, caller: str, args: dict):
        self._require_auditor(caller)
        record = self._record(args.get("uri"))
        if record.status == STATUS_CENSORED:
            if len(record.complaint_set) > record.n - record.k:
                record.status = STATUS_UNAVAILABLE
            else:
                record.status = STATUS_AVAILABLE
        return True

    def _op_restrict_clients(self, caller: str, args: dict):
        self._require_auditor(caller)
        record = self._record(args.get("uri"))
        denied = args.get("denied")
        if not isinstance(denied, list) or not all(isinstance(c, str) for c in denied):
            raise MalformedRecord("denied must be a list of client ids")
        record.denied_clients = set(denied)
        return True

    def _require_auditor(self, caller: str):
        if self.parties[caller]["role"] != "auditor":
            raise NotAuditor(f"{caller!r} lacks the auditor role")

    def _record(self, uri) -> ContentRecord:
        if not isinstance(uri, str):
            raise MalformedRecord("uri must be a string")
        record = self.contents.get(uri)
        if record is None:
            raise UnknownUri(f"no content listed under {uri}")
        return record

    # --- unauthenticated reads ---

    def search_content(self, query: str | None = None) -> list[dict]:
        """Public listing view: (uri, name, price, status); never the key map."""
        rows = []
        for uri in sorted(self.contents):
            record = self.contents[uri]
            if query:
                if _looks_like_uri(query):
                    if uri != query:
                        continue
                elif query.lower() not in record.name.lower():
                    continue
            rows.append({"uri": uri, "name": record.name,
                         "price": record.price, "status": record.status})
        return rows

    def get_listing(self, uri: str) -> dict:
        """Public per-content metadata a client needs before purchasing."""
        record = self._record(uri)
        return {
            "uri": record.uri, "name": record.name, "price": record.price,
            "status": record.status, "k": record.k, "n": record.n,
            "publisher_id": record.publisher_id,
            "facilitator_ids": list(record.facilitator_ids),
            "payout_per_facilitator": record.payout_per_facilitator,
        }

    def get_price(self, uri: str) -> int:
        record = self._record(uri)
        if record.status == STATUS_CENSORED:
            raise ContentCensored(f"{uri} is censored")
        if record.status != STATUS_AVAILABLE:
            raise ContentUnavailable(f"{uri} is {record.status}")
        return record.price

    def is_payment_done(self, uri: str, req_id: str) -> bool:
        payment = self.payments.get(req_id)
        return payment is not None and payment.uri == uri

    def balance(self, party_id: str) -> int:
        return self.accounts[party_id]

    def total_balance(self) -> int:
        return sum(self.accounts.values())

    def audit_trail(self, start: int = 0, end: int | None = None) -> list[AuditEntry]:
        return self.trail[start:end]

    # --- snapshots and replay ---

    def snapshot_obj(self) -> dict:
        return {
            "height": self.height,
            "parties": {pid: dict(p) for pid, p in sorted(self.parties.items())},
            "accounts": dict(sorted(self.accounts.items())),
            "contents": {uri: rec.to_obj() for uri, rec in sorted(self.contents.items())},
            "payments": {rid: pay.to_obj() for rid, pay in sorted(self.payments.items())},
        }

    def snapshot_bytes(self) -> bytes:
        return canonical_json(self.snapshot_obj())

    def state_digest(self) -> str:
        return sha256(self.snapshot_bytes()).hex()

    @classmethod
    def replay(cls, entries: list[AuditEntry]) -> "Ledger":
        """Rebuild state from a trail, verifying chain, signatures, results.

        Raises BrokenChain / InvalidSignatureEntry / StateMismatch carrying
        the offending height.
        """
        if not entries:
            raise BrokenChain("empty trail", height=0)
        first = entries[0]
        if first.kind != "genesis" or first.height != 0:
            raise BrokenChain("trail does not start at genesis", height=0)
        if first.prev_hash != GENESIS_PREV_HASH:
            raise BrokenChain("genesis prev_hash must be zero", height=0)
        if _entry_hash(first.prev_hash, first.core_obj()) != first.entry_hash:
            raise BrokenChain("genesis entry hash mismatch", height=0)
        try:
            ledger = cls(Genesis.from_obj(first.body))
        except Exception as exc:
            raise BrokenChain(f"genesis unreadable: {exc}", height=0) from exc
        if ledger.trail[0].entry_hash != first.entry_hash:
            raise BrokenChain("genesis does not reproduce", height=0)

        for entry in entries[1:]:
            h = entry.height
            if h != len(ledger.trail):
                raise BrokenChain(f"height {h} out of order", height=h)
            if entry.kind != "call":
                raise BrokenChain(f"unexpected entry kind {entry.kind!r}", height=h)
            if entry.prev_hash != ledger.trail[-1].entry_hash:
                raise BrokenChain("hash chain link mismatch", height=h)
            if _entry_hash(entry.prev_hash, entry.core_obj()) != entry.entry_hash:
                raise BrokenChain("entry hash mismatch", height=h)
            call = entry.signed_call()
            recorded = entry.result
            sig_expected_bad = recorded["error"] in ("BadSignature", "UnknownCaller")
            if not sig_expected_bad:
                try:
                    if not crypto.verify_call(call, ledger.key_registry):
                        raise InvalidSignatureEntry("signature does not verify", height=h)
                except crypto.UnknownCaller as exc:
                    raise InvalidSignatureEntry(str(exc), height=h) from exc
            try:
                ledger.submit(call)
                replayed = {"ok": True, "error": None}
            except LedgerError as exc:
                replayed = {"ok": False, "error": exc.code}
            if replayed != recorded:
                raise StateMismatch(
                    f"entry {h}: recorded {recorded}, replay produced {replayed}", height=h
                )
            if ledger.trail[-1].entry_hash != entry.entry_hash:
                raise StateMismatch("re-executed entry hash diverges", height=h)
        return ledger


def _require_hex(value, length: int, what: str):
    if not isinstance(value, str) or len(value) != length:
        raise MalformedRecord(f"{what} must be {length} hex chars")
    try:
        bytes.fromhex(value)
    except ValueError as exc:
        raise MalformedRecord(f"{what} is not hex") from exc


def _require_uri(value):
    _require_hex(value, 64, "uri")


def _looks_like_uri(text: str) -> bool:
    if len(text) != 64:
        return False
    try:
        bytes.fromhex(text)
        return True
    except ValueError:
        return False


# --- trail files ---


def write_trail(ledger: Ledger, path):
    """Serialize the audit trail (plus final-state digest) as JSON lines."""
    header = {
        "format": TRAIL_FORMAT,
        "entries": len(ledger.trail),
        "final_state_digest": ledger.state_digest(),
    }
    with open(path, "wb") as fh:
        fh.write(canonical_json(header) + b"\n")
        for entry in ledger.trail:
            fh.write(canonical_json(entry.to_obj()) + b"\n")


def verify_trail_file(path) -> Ledger:
    """Parse and fully verify a trail file; returns the replayed ledger.

    Raises BrokenChain / InvalidSignatureEntry / StateMismatch with the
    offending height set.
    """
    with open(path, "rb") as fh:
        lines = [line for line in fh.read().split(b"\n") if line.strip()]
    if not lines:
        raise BrokenChain("empty trail file", height=0)
    try:
        header = json.loads(lines[0])
        if header.get("format") != TRAIL_FORMAT:
            raise ValueError(f"bad format marker {header.get('format')!r}")
        expected_entries = int(header["entries"])
        expected_digest = str(header["final_state_digest"])
    except (ValueError, KeyError, TypeError) as exc:
        raise BrokenChain(f"unreadable trail header: {exc}", height=0) from exc
    entries = []
    for i, line in enumerate(lines[1:]):
        try:
            entries.append(AuditEntry.from_obj(json.loads(line)))
        except Exception as exc:
            raise BrokenChain(f"unreadable entry at height {i}: {exc}", height=i) from exc
    ledger = Ledger.replay(entries)  # raises with height on any defect
    if len(entries) != expected_entries:
        raise StateMismatch(
            f"trail has {len(entries)} entries, header claims {expected_entries}",
            height=len(entries) - 1,
        )
    if ledger.state_digest() != expected_digest:
        raise StateMismatch("final state digest mismatch", height=len(entries) - 1)
    return ledger
