"""Multi-device progress synchronization over a star-topology coordinator.

Devices in one session group exchange experimental progress and remote
commands through a coordinator. Delivery may be lossy, duplicated, and
reordered; reliability comes from per-device sequence numbers, coordinator
acks, and client retransmission of unacked messages, which together give
exactly-once application over at-least-once delivery.

Wire format (one message per WebSocket text frame):

    frame   = length ":" body
    length  = 1*20 DIGIT            ; byte length of body, base 10
    body    = canonical JSON object ; sorted keys, no spaces, UTF-8

    body fields: {"device_id": str, "kind": str, "payload": object,
                  "seq": int, "session_group": str}

Kinds and payloads:
    hello            {}                          registers the device
    progress         {screen_id, status}         fanned out to other members
    barrier-reached  {barrier_id}                release when all members reach
    command          {command, to}               relayed verbatim ("*" = all)
    resume-request   {}                          reply is a state-snapshot
    ack              {device_id, seq}            coordinator -> client only
    barrier-release  {barrier_id}                coordinator -> client only
    state-snapshot   {view, barriers_open, barriers_released, last_seen}

Sequencing: a device's first message is hello with seq 1; every later
data message increments seq by one. The coordinator applies seq == last+1,
re-acks seq <= last without reapplying, and silently ignores gaps (the
client retransmits). resume-request is out-of-band and always carries
seq 0. Coordinator-originated messages use device_id "" with their own
per-group sequence.

Barriers: barrier-release for a barrier is emitted at most once, only when
every registered member has reached it. A release missed on the wire is
recovered from the next state-snapshot.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

KINDS = frozenset({
    "hello", "progress", "barrier-reached", "barrier-release",
    "command", "ack", "resume-request", "state-snapshot",
})

COORDINATOR = ""  # device_id of coordinator-originated messages
MAX_LENGTH_DIGITS = 20

_BODY_FIELDS = {"session_group", "device_id", "seq", "kind", "payload"}


class SyncProtocolError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class SyncMessage:
    session_group: str
    device_id: str
    seq: int
    kind: str
    payload: dict


@dataclass(frozen=True)
class Outbound:
    """A coordinator reply and the device it must be delivered to."""
    to_device: str
    message: SyncMessage


def encode_message(m: SyncMessage) -> bytes:
    body = json.dumps(
        {"device_id": m.device_id, "kind": m.kind, "payload": m.payload,
         "seq": m.seq, "session_group": m.session_group},
        sort_keys=True, separators=(",", ":"), ensure_ascii=False,
    ).encode("utf-8")
    return str(len(body)).encode("ascii") + b":" + body


def decode_message(data: bytes | str) -> SyncMessage:
    if isinstance(data, str):
        data = data.encode("utf-8")
    head, sep, body = data.partition(b":")
    if not sep:
        raise SyncProtocolError("MALFORMED_MESSAGE", "missing length prefix")
    if not head.isdigit() or len(head) > MAX_LENGTH_DIGITS:
        raise SyncProtocolError("MALFORMED_MESSAGE", "bad length prefix")
    if int(head) != len(body):
        raise SyncProtocolError(
            "MALFORMED_MESSAGE",
            f"frame length mismatch: declared {int(head)}, got {len(body)}")
    try:
        doc = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SyncProtocolError("MALFORMED_MESSAGE", f"bad body: {exc}") from None
    if not isinstance(doc, dict) or set(doc) != _BODY_FIELDS:
        raise SyncProtocolError("MALFORMED_MESSAGE", "unexpected body fields")
    if not (isinstance(doc["session_group"], str) and isinstance(doc["device_id"], str)
            and isinstance(doc["kind"], str) and isinstance(doc["payload"], dict)
            and isinstance(doc["seq"], int) and not isinstance(doc["seq"], bool)
            and doc["seq"] >= 0):
        raise SyncProtocolError("MALFORMED_MESSAGE", "bad field types")
    if doc["kind"] not in KINDS:
        raise SyncProtocolError("UNKNOWN_KIND", f"unknown kind {doc['kind']!r}")
    return SyncMessage(doc["session_group"], doc["device_id"], doc["seq"],
                       doc["kind"], doc["payload"])


# ---------------------------------------------------------------------------
# Coordinator
# ---------------------------------------------------------------------------

@dataclass
class ProgressEntry:
    screen_id: str
    status: str
    origin_seq: int

    def to_json(self) -> dict:
        return {"screen_id": self.screen_id, "status": self.status,
                "seq": self.origin_seq}


class GroupState:
    """Authoritative per-group state; messages apply in a serialized order."""

    def __init__(self, session_group: str):
        self.session_group = session_group
        self.last_seen: dict[str, int] = {}
        self.progress: dict[str, ProgressEntry] = {}
        self.barriers: dict[str, set[str]] = {}
        self.released: set[str] = set()
        self.release_emissions: dict[str, int] = {}
        self._out_seq = 0

    @property
    def members(self) -> set[str]:
        return set(self.last_seen)

    def _make(self, kind: str, payload: dict) -> SyncMessage:
        self._out_seq += 1
        return SyncMessage(self.session_group, COORDINATOR, self._out_seq,
                           kind, payload)

    def _ack(self, m: SyncMessage) -> Outbound:
        return Outbound(m.device_id, self._make(
            "ack", {"device_id": m.device_id, "seq": m.seq}))

    def _snapshot_for(self, device_id: str) -> Outbound:
        payload = {
            "view": {d: e.to_json() for d, e in self.progress.items()},
            "barriers_open": {b: sorted(reached)
                              for b, reached in self.barriers.items()
                              if b not in self.released},
            "barriers_released": sorted(self.released),
            "last_seen": dict(self.last_seen),
        }
        return Outbound(device_id, self._make("state-snapshot", payload))

    def apply(self, m: SyncMessage) -> list[Outbound]:
        device = m.device_id
        if m.kind == "resume-request":
            if device not in self.last_seen:
                raise SyncProtocolError("UNKNOWN_DEVICE",
                                        f"resume before hello from {device!r}")
            return [self._snapshot_for(device)]
        if m.kind in ("ack", "state-snapshot", "barrier-release"):
            return []  # coordinator-only kinds; ignore if echoed back
        if device not in self.last_seen:
            if m.kind != "hello":
                raise SyncProtocolError("UNKNOWN_DEVICE",
                                        f"{m.kind} before hello from {device!r}")
            self.last_seen[device] = m.seq
            return [self._ack(m)]
        if m.seq <= self.last_seen[device]:
            return [self._ack(m)]  # duplicate: re-ack, do not reapply
        if m.seq > self.last_seen[device] + 1:
            return []  # gap: drop; the client retransmits in order
        self.last_seen[device] = m.seq
        out = [self._ack(m)]
        if m.kind == "hello":
            return out
        if m.kind == "progress":
            entry = ProgressEntry(str(m.payload.get("screen_id", "")),
                                  str(m.payload.get("status", "")), m.seq)
            self.progress[device] = entry
            fanout = {"device": device, "screen_id": entry.screen_id,
                      "status": entry.status, "origin_seq": m.seq}
            out.extend(Outbound(other, self._make("progress", dict(fanout)))
                       for other in sorted(self.members) if other != device)
            return out
        if m.kind == "barrier-reached":
            barrier_id = str(m.payload.get("barrier_id", ""))
            reached = self.barriers.setdefault(barrier_id, set())
            reached.add(device)
            if barrier_id not in self.released and reached >= self.members:
                self.released.add(barrier_id)
                self.release_emissions[barrier_id] = \
                    self.release_emissions.get(barrier_id, 0) + 1
                out.extend(Outbound(member, self._make(
                    "barrier-release", {"barrier_id": barrier_id}))
                    for member in sorted(self.members))
            return out
        if m.kind == "command":
            to = str(m.payload.get("to", "*"))
            targets = (sorted(self.members - {device}) if to == "*"
                       else [to] if to in self.members else [])
            relay = {"command": str(m.payload.get("command", "")),
                     "from": device, "origin_seq": m.seq}
            out.extend(Outbound(t, self._make("command", dict(relay)))
                       for t in targets)
            return out
        return out


class Coordinator:
    """Routes messages of many independent session groups."""

    def __init__(self) -> None:
        self.groups: dict[str, GroupState] = {}

    def handle(self, m: SyncMessage) -> list[Outbound]:
        group = self.groups.get(m.session_group)
        if group is None:
            if m.kind != "hello":
                raise SyncProtocolError("UNKNOWN_GROUP",
                                        f"no group {m.session_group!r}")
            group = GroupState(m.session_group)
            self.groups[m.session_group] = group
        return group.apply(m)

    def handle_frame(self, data: bytes | str) -> list[Outbound]:
        return self.handle(decode_message(data))


# ---------------------------------------------------------------------------
# Client
# ---------------------------------------------------------------------------

@dataclass
class SyncClient:
    """Device-side protocol state.

    The client never talks to a socket itself: every sending method
    returns the SyncMessage to transmit, and pending() lists the unacked
    messages to retransmit (in sequence order). Feed incoming messages to
    on_message(). After a reconnect, send resume_request(); the snapshot
    reply prunes acked messages, after which pending() is the replay set.
    """

    session_group: str
    device_id: str
    next_seq: int = 1
    unacked: dict[int, SyncMessage] = field(default_factory=dict)
    view: dict[str, ProgressEntry] = field(default_factory=dict)
    barriers_released: set[str] = field(default_factory=set)
    barriers_open: dict[str, list[str]] = field(default_factory=dict)
    commands: list[tuple[str, str]] = field(default_factory=list)
    _applied_commands: set[tuple[str, int]] = field(default_factory=set)
    snapshots_received: int = 0

    def _send(self, kind: str, payload: dict) -> SyncMessage:
        m = SyncMessage(self.session_group, self.device_id, self.next_seq,
                        kind, payload)
        self.next_seq += 1
        self.unacked[m.seq] = m
        return m

    def hello(self) -> SyncMessage:
        return self._send("hello", {})

    def report_progress(self, screen_id: str, status: str) -> SyncMessage:
        m = self._send("progress", {"screen_id": screen_id, "status": status})
        self.view[self.device_id] = ProgressEntry(screen_id, status, m.seq)
        return m

    def reach_barrier(self, barrier_id: str) -> SyncMessage:
        return self._send("barrier-reached", {"barrier_id": barrier_id})

    def send_command(self, to: str, command: str) -> SyncMessage:
        return self._send("command", {"command": command, "to": to})

    def resume_request(self) -> SyncMessage:
        # Out-of-band: fixed seq 0, never retransmitted (the reply is the ack).
        return SyncMessage(self.session_group, self.device_id, 0,
                           "resume-request", {})

    def pending(self) -> list[SyncMessage]:
        return [self.unacked[s] for s in sorted(self.unacked)]

    def barrier_released(self, barrier_id: str) -> bool:
        return barrier_id in self.barriers_released

    def _merge_entry(self, device: str, entry: ProgressEntry) -> None:
        current = self.view.get(device)
        if current is None or entry.origin_seq > current.origin_seq:
            self.view[device] = entry

    def on_message(self, m: SyncMessage) -> None:
        if m.kind == "ack":
            if m.payload.get("device_id") == self.device_id:
                self.unacked.pop(m.payload.get("seq"), None)
        elif m.kind == "progress":
            self._merge_entry(str(m.payload.get("device", "")),
                              ProgressEntry(str(m.payload.get("screen_id", "")),
                                            str(m.payload.get("status", "")),
                                            int(m.payload.get("origin_seq", 0))))
        elif m.kind == "barrier-release":
            self.barriers_released.add(str(m.payload.get("barrier_id", "")))
        elif m.kind == "command":
            key = (str(m.payload.get("from", "")), int(m.payload.get("origin_seq", 0)))
            if key not in self._applied_commands:
                self._applied_commands.add(key)
                self.commands.append((key[0], str(m.payload.get("command", ""))))
        elif m.kind == "state-snapshot":
            self.snapshots_received += 1
            for device, doc in m.payload.get("view", {}).items():
                self._merge_entry(device, ProgressEntry(
                    str(doc.get("screen_id", "")), str(doc.get("status", "")),
                    int(doc.get("seq", 0))))
            self.barriers_released.update(m.payload.get("barriers_released", []))
            self.barriers_open = {str(k): list(v) for k, v
                                  in m.payload.get("barriers_open", {}).items()}
            acked_up_to = int(m.payload.get("last_seen", {}).get(self.device_id, 0))
            for seq in [s for s in self.unacked if s <= acked_up_to]:
                del self.unacked[seq]
