"""Seeded discrete-event simulator embedding the actors and the ledger.

One publisher, a pool of facilitators with optional fault profiles, and a
set of clients run the full protocol (real bytes, real crypto) over a
modeled network. Message timing: a transfer occupies the sender's uplink
for size/bandwidth, crosses the link after the configured latency, then
occupies the receiver's downlink for size/bandwidth plus a fixed
per-message overhead, so concurrent transfers queue at both endpoints.
Ledger calls are messages to a dedicated ledger node; mutating calls incur
an additional commit delay standing in for consensus.

Events are processed in nondecreasing time order with FIFO tie-breaking by
insertion sequence; all randomness flows from the config seed, so a run is
a pure function of its SimConfig and event logs are byte-identical across
repeats.
"""

from __future__ import annotations

import hashlib
import heapq
import random
from dataclasses import dataclass, field, replace

from fairshare import actors
from fairshare.actors import (
    Actor, Call, ChunkRequest, ChunkResponse, ChunkUpload, Client, Denial,
    Facilitator, Now, Publisher, Recv, Send, Sleep, TIMEOUT,
    LAZY, PROFILES, STRATEGIES, ProtocolError, wire_size,
)
from fairshare.codec import CodingParams
from fairshare.crypto import PartyKeys
from fairshare.ledger import (
    Genesis, Ledger, LedgerError, canonical_json, error_from_code,
)

LEDGER_NODE = "L"

KIND_DELIVERY = "message-delivery"
KIND_COMMIT = "ledger-commit"
KIND_STEP = "actor-step"


class ConfigInvalid(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    """Scenario parameters; the seed fully determines the run."""

    seed: int = 0
    coding: CodingParams = CodingParams(4, 6)
    n_facilitators: int = 6
    file_size_bytes: int = 10 * 1024 * 1024
    n_clients: int = 1
    fetch_strategy: str = LAZY
    ledger_check_enabled: bool = True
    inter_node_latency_ms: float | dict = 50.0
    bandwidth_bytes_per_ms: float = 10_000.0
    per_message_overhead_ms: float = 5.0
    ledger_commit_delay_ms: float = 50.0
    request_timeout_ms: float = 2000.0
    n_faults: int = 0
    fault_profile: str = "crash"
    fault_assignment: dict = field(default_factory=dict)
    price_micros: int = 10_000_000
    payout_per_facilitator_micros: int | None = None
    est_failure_rate: float = 0.0

    def validate(self):
        if not isinstance(self.seed, int):
            raise ConfigInvalid("seed must be an integer")
        if self.n_facilitators < self.coding.n:
            raise ConfigInvalid(
                f"need at least n={self.coding.n} facilitators, have {self.n_facilitators}"
            )
        if self.n_clients < 1:
            raise ConfigInvalid("need at least one client")
        if self.file_size_bytes < 1:
            raise ConfigInvalid("file size must be positive")
        if self.fetch_strategy not in STRATEGIES:
            raise ConfigInvalid(f"unknown fetch strategy {self.fetch_strategy!r}")
        if self.bandwidth_bytes_per_ms <= 0:
            raise ConfigInvalid("bandwidth must be positive")
        if self.per_message_overhead_ms < 0 or self.ledger_commit_delay_ms < 0:
            raise ConfigInvalid("delays must be non-negative")
        if self.request_timeout_ms <= 0:
            raise ConfigInvalid("request timeout must be positive")
        if not 0 <= self.n_faults <= self.n_facilitators:
            raise ConfigInvalid("n_faults out of range")
        if self.fault_profile not in PROFILES:
            raise ConfigInvalid(f"unknown fault profile {self.fault_profile!r}")
        for fid, profile in self.fault_assignment.items():
            if profile not in PROFILES:
                raise ConfigInvalid(f"unknown profile {profile!r} for {fid}")
        if self.price_micros < 0:
            raise ConfigInvalid("price must be non-negative")
        if isinstance(self.inter_node_latency_ms, dict):
            if "default" not in self.inter_node_latency_ms:
                raise ConfigInvalid("latency dict needs a 'default' entry")
        elif self.inter_node_latency_ms < 0:
            raise ConfigInvalid("latency must be non-negative")

    def facilitator_ids(self) -> list[str]:
        return [f"S{i}" for i in range(1, self.n_facilitators + 1)]

    def client_ids(self) -> list[str]:
        return [f"C{i}" for i in range(1, self.n_clients + 1)]

    def profile_for(self, fid: str, position: int) -> str:
        if self.fault_assignment:
            return self.fault_assignment.get(fid, actors.HONEST)
        # default placement: the first n_faults facilitators, so fault sets
        # nest as n_faults grows and paired-seed comparisons stay monotone
        return self.fault_profile if position < self.n_faults else actors.HONEST

    def latency(self, src: str, dst: str) -> float:
        table = self.inter_node_latency_ms
        if isinstance(table, dict):
            return float(table.get("overrides", {}).get(f"{src}->{dst}", table["default"]))
        return float(table)


@dataclass
class RunMetrics:
    upload_latency_ms: list[float] = field(default_factory=list)
    download_latency_ms: list[float] = field(default_factory=list)
    succeeded_requests: int = 0
    failed_requests: int = 0
    bytes_delivered_total: int = 0
    chunk_bytes_delivered: int = 0
    balance_deltas: dict[str, int] = field(default_factory=dict)
    final_state_digest: str = ""

    def to_obj(self) -> dict:
        return {
            "upload_latency_ms": list(self.upload_latency_ms),
            "download_latency_ms": list(self.download_latency_ms),
            "succeeded_requests": self.succeeded_requests,
            "failed_requests": self.failed_requests,
            "bytes_delivered_total": self.bytes_delivered_total,
            "chunk_bytes_delivered": self.chunk_bytes_delivered,
            "balance_deltas": dict(sorted(self.balance_deltas.items())),
            "final_state_digest": self.final_state_digest,
        }


@dataclass
class SimResult:
    config: SimConfig
    metrics: RunMetrics
    events: list[dict]
    ledger: Ledger

    def event_log_bytes(self) -> bytes:
        return b"".join(canonical_json(e) + b"\n" for e in self.events)


def _child_rng(seed: int, name: str) -> random.Random:
    digest = hashlib.sha256(f"fairshare:{seed}:{name}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def message_tag(message) -> str:
    """Time-independent identity digest of a message, for log diffing."""
    h = hashlib.sha256(type(message).__name__.encode())
    for name, value in sorted(vars(message).items()):
        h.update(name.encode())
        h.update(value if isinstance(value, bytes) else str(value).encode())
    return h.hexdigest()[:16]


def event_identity(event: dict) -> tuple:
    """Event minus its timestamp; used for with/without-ledger diffs."""
    return tuple((key, event[key]) for key in sorted(event) if key != "t")


LEDGER_EVENT_KINDS = (KIND_COMMIT,)
LEDGER_MESSAGE_PREFIX = "Ledger"


def is_ledger_event(event: dict) -> bool:
    if event["kind"] == KIND_COMMIT:
        return True
    if event["kind"] == KIND_DELIVERY:
        return event["msg"].startswith(LEDGER_MESSAGE_PREFIX)
    return False


# --- internal ledger-node messages ---


@dataclass(frozen=True)
class _LedgerCall:
    call_id: int
    op: str
    args: dict
    signed_payload: bytes | None = None
    signature: bytes | None = None
    caller: str = ""


@dataclass(frozen=True)
class _LedgerReply:
    call_id: int
    op: str
    ok: bool
    value: object = None
    error: str = ""
    error_message: str = ""


def _ledger_wire_size(message) -> int:
    if isinstance(message, _LedgerCall):
        return 192 + len(canonical_json(message.args))
    if isinstance(message, _LedgerReply):
        try:
            body = canonical_json(message.value) if message.ok else b""
        except TypeError:
            body = b""
        return 192 + len(body)
    return wire_size(message)


class _Session:
    __slots__ = (
        "sid", "actor", "gen", "label", "now", "state", "epoch",
        "mailbox", "result", "error", "on_done", "recv_routed",
    )

    def __init__(self, sid, actor, gen, label, now, on_done, recv_routed):
        self.sid = sid
        self.actor = actor
        self.gen = gen
        self.label = label
        self.now = now
        self.state = "ready"
        self.epoch = 0
        self.mailbox = []
        self.result = None
        self.error = None
        self.on_done = on_done
        self.recv_routed = recv_routed


class _Sim:
    """The event loop: single-threaded, deterministic, seeded."""

    def __init__(self, config: SimConfig, ledger: Ledger):
        self.config = config
        self.ledger = ledger
        self.heap: list = []
        self.seq = 0
        self.now = 0.0
        self.uplink_free: dict[str, float] = {}
        self.downlink_free: dict[str, float] = {}
        self.actors: dict[str, Actor] = {}
        self.sessions: dict[int, _Session] = {}
        self.actor_session: dict[str, int] = {}
        self.call_waiters: dict[int, int] = {}  # call_id -> sid
        self.next_sid = 0
        self.next_call_id = 0
        self.events: list[dict] = []
        self.bytes_delivered = 0
        self.chunk_bytes = 0

    # scheduling

    def schedule(self, t: float, fn, *args):
        heapq.heappush(self.heap, (t, self.seq, fn, args))
        self.seq += 1

    def run_loop(self):
        while self.heap:
            t, _, fn, args = heapq.heappop(self.heap)
            assert t >= self.now - 1e-9, "time went backwards"
            self.now = t
            fn(t, *args)

    def log(self, t: float, kind: str, **fields):
        record = {"t": round(t, 6), "kind": kind}
        record.update(fields)
        self.events.append(record)

    def add_actor(self, actor: Actor):
        self.actors[actor.party_id] = actor
        self.uplink_free[actor.party_id] = 0.0
        self.downlink_free[actor.party_id] = 0.0

    # network model

    def _transfer(self, t: float, src: str, dst: str, message, size: int):
        bw = self.config.bandwidth_bytes_per_ms
        sender_ready = max(t, self.uplink_free[src])
        self.uplink_free[src] = sender_ready + size / bw
        lat = self.config.latency(src, dst)
        receiver_ready = max(sender_ready + lat, self.downlink_free[dst])
        arrival = receiver_ready + size / bw + self.config.per_message_overhead_ms
        self.downlink_free[dst] = arrival
        self.schedule(arrival, self._deliver, src, dst, message, size)

    def send_message(self, t: float, src: str, dst: str, message) -> bool:
        if dst not in self.actors and dst != LEDGER_NODE:
            return False
        self._transfer(t, src, dst, message, _ledger_wire_size(message))
        return True

    def _deliver(self, t: float, src: str, dst: str, message, size: int):
        self.log(
            t, KIND_DELIVERY, src=src, dst=dst,
            msg=_message_label(message), size=size, tag=message_tag(message),
        )
        self.bytes_delivered += size
        if isinstance(message, (ChunkUpload, ChunkResponse)):
            self.chunk_bytes += size
        if dst == LEDGER_NODE:
            self._ledger_receive(t, src, message)
            return
        if isinstance(message, _LedgerReply):
            self._resume_call(t, message)
            return
        sid = self.actor_session.get(dst)
        if sid is not None:
            session = self.sessions[sid]
            if session.state == "blocked-recv":
                session.epoch += 1
                session.now = t
                session.state = "ready"
                self._advance(session, value=(src, message))
            else:
                session.mailbox.append((t, src, message))
            return
        actor = self.actors[dst]
        handler = actor.handle_message(src, message)
        if handler is not None:
            self.spawn(t, actor, handler, label=f"handler:{dst}", routed=False)
        # else: no active session and no handler -> dropped

    # ledger node

    def _ledger_receive(self, t: float, src: str, message: _LedgerCall):
        if message.signed_payload is None:
            self._ledger_execute(t, src, message, signed=False)
        else:
            self.schedule(
                t + self.config.ledger_commit_delay_ms,
                self._ledger_commit, src, message,
            )

    def _ledger_commit(self, t: float, src: str, message: _LedgerCall):
        self._ledger_execute(t, src, message, signed=True)

    def _ledger_execute(self, t: float, src: str, message: _LedgerCall, signed: bool):
        from fairshare.crypto import SignedCall

        ok, value, code, detail = True, None, "", ""
        try:
            if signed:
                call = SignedCall(
                    caller_id=message.caller, op=message.op,
                    payload=message.signed_payload, signature=message.signature,
                )
                value = self.ledger.submit(call)
            else:
                value = actors.query_ledger(self.ledger, message.op, message.args)
        except LedgerError as exc:
            ok, code, detail = False, exc.code, str(exc)
        if signed:
            self.log(t, KIND_COMMIT, caller=message.caller, op=message.op,
                     ok=ok, error=code or None)
        reply = _LedgerReply(
            call_id=message.call_id, op=message.op, ok=ok,
            value=value, error=code, error_message=detail,
        )
        self._transfer(t, LEDGER_NODE, src, reply, _ledger_wire_size(reply))

    def _resume_call(self, t: float, reply: _LedgerReply):
        sid = self.call_waiters.pop(reply.call_id)
        session = self.sessions[sid]
        session.now = t
        session.state = "ready"
        if reply.ok:
            self._advance(session, value=reply.value)
        else:
            self._advance(session, exc=error_from_code(reply.error, reply.error_message))

    # sessions

    def spawn(self, t: float, actor: Actor, gen, label: str, routed: bool,
              on_done=None):
        sid = self.next_sid
        self.next_sid += 1
        session = _Session(sid, actor, gen, label, t, on_done, routed)
        self.sessions[sid] = session
        if routed:
            if self.actor_session.get(actor.party_id) is not None:
                raise RuntimeError(f"{actor.party_id} already has an active session")
            self.actor_session[actor.party_id] = sid
        self._advance(session)
        return sid

    def _finish(self, session: _Session, result=None, error=None):
        session.state = "done"
        session.result = result
        session.error = error
        if session.recv_routed:
            self.actor_session.pop(session.actor.party_id, None)
        del self.sessions[session.sid]
        if session.on_done is not None:
            session.on_done(session.now, result, error)

    def _advance(self, session: _Session, value=None, exc=None):
        gen = session.gen
        while True:
            try:
                if exc is not None:
                    effect = gen.throw(exc)
                    exc = None
                else:
                    effect = gen.send(value)
            except StopIteration as stop:
                self._finish(session, result=stop.value)
                return
            except (ProtocolError, LedgerError) as failure:
                self._finish(session, error=failure)
                return
            value = None
            if isinstance(effect, Send):
                value = self.send_message(session.now, session.actor.party_id,
                                          effect.to, effect.message)
            elif isinstance(effect, Now):
                value = session.now
            elif isinstance(effect, Sleep):
                session.state = "blocked-sleep"
                self.schedule(session.now + effect.ms, self._wake, session.sid)
                return
            elif isinstance(effect, Recv):
                if session.mailbox:
                    arrived, src, message = session.mailbox.pop(0)
                    session.now = max(session.now, arrived)
                    value = (src, message)
                    continue
                session.state = "blocked-recv"
                session.epoch += 1
                self.schedule(effect.deadline, self._recv_timeout,
                              session.sid, session.epoch)
                return
            elif isinstance(effect, Call):
                call_id = self.next_call_id
                self.next_call_id = call_id + 1
                if effect.signed:
                    signed = session.actor.keys.sign_call(
                        effect.op, canonical_json(effect.args)
                    )
                    message = _LedgerCall(
                        call_id=call_id, op=effect.op, args=effect.args,
                        signed_payload=signed.payload, signature=signed.signature,
                        caller=signed.caller_id,
                    )
                else:
                    message = _LedgerCall(call_id=call_id, op=effect.op,
                                          args=effect.args, caller=session.actor.party_id)
                self.call_waiters[call_id] = session.sid
                session.state = "blocked-call"
                self.send_message(session.now, session.actor.party_id,
                                  LEDGER_NODE, message)
                return
            else:
                raise TypeError(f"unknown effect {effect!r}")

    def _wake(self, t: float, sid: int):
        session = self.sessions.get(sid)
        if session is None or session.state != "blocked-sleep":
            return
        session.now = t
        session.state = "ready"
        self._advance(session, value=None)

    def _recv_timeout(self, t: float, sid: int, epoch: int):
        session = self.sessions.get(sid)
        if session is None or session.state != "blocked-recv" or session.epoch != epoch:
            return
        session.epoch += 1
        session.now = t
        session.state = "ready"
        self._advance(session, value=TIMEOUT)


def _message_label(message) -> str:
    if isinstance(message, _LedgerCall):
        return f"LedgerCall:{message.op}"
    if isinstance(message, _LedgerReply):
        return f"LedgerReply:{message.op}"
    return type(message).__name__


def build_genesis(config: SimConfig, keys: dict[str, PartyKeys]) -> Genesis:
    roles = {"P1": "publisher", "A1": "auditor"}
    balances = {cid: config.price_micros for cid in config.client_ids()}
    parties = []
    for pid, pk in sorted(keys.items()):
        role = roles.get(pid)
        if role is None:
            role = "client" if pid.startswith("C") else "facilitator"
        parties.append({
            "id": pid, "public_key": pk.public_bytes.hex(),
            "role": role, "balance": balances.get(pid, 0),
        })
    return Genesis(parties=parties)


def run(config: SimConfig) -> SimResult:
    """Execute one seeded scenario: uploads, then all purchases in parallel."""
    config.validate()
    seed = config.seed

    party_ids = ["P1", "A1"] + config.facilitator_ids() + config.client_ids()
    keys = {pid: PartyKeys.from_seed(pid, str(seed).encode()) for pid in party_ids}
    ledger = Ledger(build_genesis(config, keys))
    genesis_balances = dict(ledger.accounts)
    sim = _Sim(config, ledger)
    sim.uplink_free[LEDGER_NODE] = 0.0
    sim.downlink_free[LEDGER_NODE] = 0.0

    oob_catalog: dict = {}
    checks = config.ledger_check_enabled

    publisher = Publisher("P1", keys["P1"], ledger_checks=checks,
                          oob_catalog=oob_catalog,
                          est_failure_rate=config.est_failure_rate)
    sim.add_actor(publisher)
    sim.add_actor(Actor("A1", keys["A1"]))
    fac_ids = config.facilitator_ids()
    for position, fid in enumerate(fac_ids):
        sim.add_actor(Facilitator(
            fid, keys[fid], profile=config.profile_for(fid, position),
            ledger_checks=checks, rng=_child_rng(seed, f"facilitator:{fid}"),
        ))
    clients = {}
    for cid in config.client_ids():
        client = Client(
            cid, keys[cid], strategy=config.fetch_strategy, ledger_checks=checks,
            oob_catalog=oob_catalog, rng=_child_rng(seed, f"client:{cid}"),
            request_timeout_ms=config.request_timeout_ms,
        )
        clients[cid] = client
        sim.add_actor(client)

    workload = _child_rng(seed, "workload")
    files = [workload.randbytes(config.file_size_bytes) for _ in clients]
    hosts = [sorted(workload.sample(fac_ids, config.coding.n)) for _ in clients]

    metrics = RunMetrics()
    uris: dict[int, str] = {}
    upload_starts: dict[int, float] = {}

    def start_purchases(t: float):
        for index, cid in enumerate(config.client_ids()):
            sim.schedule(t, _start_purchase, index, cid)

    def _start_purchase(t: float, index: int, cid: str):
        uri = uris[index]
        client = clients[cid]
        sim.log(t, KIND_STEP, actor=cid, step="purchase-start", uri=uri)

        def on_done(end, result, error, *, start=t, uri=uri, cid=cid, index=index):
            if error is None and result == files[index]:
                metrics.succeeded_requests += 1
                metrics.download_latency_ms.append(end - start)
                sim.log(end, KIND_STEP, actor=cid, step="purchase-done", uri=uri)
            else:
                metrics.failed_requests += 1
                reason = type(error).__name__ if error else "WrongBytes"
                sim.log(end, KIND_STEP, actor=cid, step="purchase-failed",
                        uri=uri, reason=reason)

        sim.spawn(t, client, client.purchase(uri), label=f"purchase:{cid}",
                  routed=True, on_done=on_done)

    def _start_publish(t: float, index: int):
        upload_starts[index] = t
        sim.log(t, KIND_STEP, actor="P1", step="publish-start", file_index=index)
        session_gen = publisher.publish(
            files[index], config.coding, hosts[index], config.price_micros,
            name=f"content-{index}",
            payout_micros=config.payout_per_facilitator_micros,
        )

        def on_done(end, result, error, *, index=index):
            if error is not None:
                raise RuntimeError(f"publish {index} failed: {error!r}") from error
            uris[index] = result
            metrics.upload_latency_ms.append(end - upload_starts[index])
            sim.log(end, KIND_STEP, actor="P1", step="publish-done", file_index=index)
            nxt = index + 1
            if nxt < len(files):
                sim.schedule(end, _start_publish, nxt)
            else:
                start_purchases(end)

        sim.spawn(t, publisher, session_gen, label=f"publish:{index}",
                  routed=False, on_done=on_done)

    sim.schedule(0.0, _start_publish, 0)
    sim.run_loop()

    metrics.bytes_delivered_total = sim.bytes_delivered
    metrics.chunk_bytes_delivered = sim.chunk_bytes
    metrics.balance_deltas = {
        pid: ledger.accounts[pid] - genesis_balances[pid] for pid in sorted(party_ids)
    }
    metrics.final_state_digest = ledger.state_digest()
    return SimResult(config=config, metrics=metrics, events=sim.events, ledger=ledger)


SWEEP_AXES = ("file_size", "k", "n", "n_clients", "latency", "faults")


def config_for_axis(base: SimConfig, axis: str, value) -> SimConfig:
    if axis == "file_size":
        return replace(base, file_size_bytes=int(value))
    if axis == "k":
        return replace(base, coding=CodingParams(int(value), base.coding.n))
    if axis == "n":
        return replace(base, n_facilitators=int(value))
    if axis == "n_clients":
        return replace(base, n_clients=int(value))
    if axis == "latency":
        return replace(base, inter_node_latency_ms=float(value))
    if axis == "faults":
        return replace(base, n_faults=int(value))
    raise ConfigInvalid(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")


def sweep(axis: str, values, base: SimConfig, repeats: int = 1) -> list[dict]:
    """One row per (axis value, repeat); seeds pair across values by repeat."""
    if not values:
        raise ConfigInvalid("sweep needs at least one value")
    if repeats < 1:
        raise ConfigInvalid("repeats must be >= 1")
    rows = []
    for value in values:
        for repeat in range(repeats):
            config = replace(config_for_axis(base, axis, value), seed=base.seed + repeat)
            result = run(config)
            m = result.metrics
            downloads = m.download_latency_ms
            uploads = m.upload_latency_ms
            rows.append({
                "axis": axis,
                "value": value,
                "repeat": repeat,
                "seed": config.seed,
                "k": config.coding.k,
                "n": config.coding.n,
                "n_facilitators": config.n_facilitators,
                "n_clients": config.n_clients,
                "file_size_bytes": config.file_size_bytes,
                "strategy": config.fetch_strategy,
                "ledger": int(config.ledger_check_enabled),
                "faults": config.n_faults,
                "upload_ms_mean": round(_mean(uploads), 6),
                "download_ms_mean": round(_mean(downloads), 6),
                "download_ms_max": round(max(downloads), 6) if downloads else 0.0,
                "succeeded": m.succeeded_requests,
                "failed": m.failed_requests,
                "bytes_delivered": m.bytes_delivered_total,
                "chunk_bytes": m.chunk_bytes_delivered,
            })
    return rows


def _mean(xs) -> float:
    return sum(xs) / len(xs) if xs else 0.0


def baseline_comparison(config: SimConfig) -> dict:
    """Run with and without ledger checks; diff the event logs.

    The identity diff ignores timestamps. A sound protocol embedding shows
    identical chunk traffic, with the with-ledger run adding only ledger
    messages and commits.
    """
    from collections import Counter

    with_ledger = run(replace(config, ledger_check_enabled=True))
    baseline = run(replace(config, ledger_check_enabled=False))
    ledger_ids = Counter(event_identity(e) for e in with_ledger.events)
    base_ids = Counter(event_identity(e) for e in baseline.events)
    added = ledger_ids - base_ids
    missing = base_ids - ledger_ids
    lat_with = _mean(with_ledger.metrics.download_latency_ms)
    lat_base = _mean(baseline.metrics.download_latency_ms)
    return {
        "with_ledger": with_ledger,
        "baseline": baseline,
        "added_events": list(added.elements()),
        "missing_events": list(missing.elements()),
        "download_ms_with_ledger": lat_with,
        "download_ms_baseline": lat_base,
        "download_overhead_ratio": (lat_with - lat_base) / lat_base if lat_base else 0.0,
        "upload_ms_with_ledger": _mean(with_ledger.metrics.upload_latency_ms),
        "upload_ms_baseline": _mean(baseline.metrics.upload_latency_ms),
    }
