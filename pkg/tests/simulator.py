"""Lossy-transport harness for the synchronization protocol.

Simulates 2-4 devices talking to a coordinator over a transport that
drops, duplicates, and reorders messages. Devices walk a scripted run of
progress updates with a shared barrier partway through (the alternating-
devices pattern) and block on the barrier until the release reaches them,
polling with resume-request when it does not. The run ends at quiescence:
scripts finished, nothing unacked, nothing in flight.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from screenflow.sync import (
    Coordinator,
    SyncClient,
    SyncProtocolError,
    decode_message,
    encode_message,
)

RETRANSMIT_PERIOD = 3
POLL_PERIOD = 4
MAX_ROUNDS = 4000


@dataclass
class SimResult:
    converged: bool
    rounds: int
    release_emissions: dict[str, int]
    barriers_fully_reached: set[str]
    protocol_errors: int
    delivered_commands: dict[str, list[tuple[str, str]]]
    sent_commands: list[tuple[str, str, str]]  # (origin, target, command)
    clients: list[SyncClient] = field(default_factory=list)
    coordinator: Coordinator | None = None


class LossyTransport:
    def __init__(self, rng: random.Random, loss: float, dup: float):
        self.rng = rng
        self.loss = loss
        self.dup = dup
        self.to_coordinator: list[bytes] = []
        self.to_device: dict[str, list[bytes]] = {}

    def _copies(self) -> int:
        n = 0 if self.rng.random() < self.loss else 1
        if self.rng.random() < self.dup:
            n += 1
        return n

    def client_send(self, message) -> None:
        frame = encode_message(message)
        for _ in range(self._copies()):
            self.to_coordinator.append(frame)

    def coordinator_send(self, outbound) -> None:
        frame = encode_message(outbound.message)
        for _ in range(self._copies()):
            self.to_device.setdefault(outbound.to_device, []).append(frame)


@dataclass
class ScriptedDevice:
    client: SyncClient
    script: list[tuple]  # ("progress", screen) | ("barrier", id) | ("command", to, text)
    position: int = 0
    waiting_barrier: str | None = None

    def done(self) -> bool:
        return self.position >= len(self.script) and self.waiting_barrier is None

    def step(self, net: LossyTransport) -> None:
        if self.waiting_barrier is not None:
            if self.client.barrier_released(self.waiting_barrier):
                self.waiting_barrier = None
            else:
                return
        if self.position >= len(self.script):
            return
        action = self.script[self.position]
        self.position += 1
        if action[0] == "progress":
            net.client_send(self.client.report_progress(action[1], "shown"))
        elif action[0] == "barrier":
            net.client_send(self.client.reach_barrier(action[1]))
            self.waiting_barrier = action[1]
        else:
            net.client_send(self.client.send_command(action[1], action[2]))


def build_scripts(rng: random.Random, device_ids: list[str],
                  with_commands: bool) -> dict[str, list[tuple]]:
    scripts: dict[str, list[tuple]] = {}
    n_screens = rng.randrange(3, 7)
    barrier_at = rng.randrange(1, n_screens)
    for d in device_ids:
        script: list[tuple] = []
        for i in range(n_screens):
            if i == barrier_at:
                script.append(("barrier", "b-sync"))
            script.append(("progress", f"s{i}"))
            if with_commands and rng.random() < 0.2:
                target = rng.choice([x for x in device_ids if x != d] + ["*"])
                script.append(("command", target, f"cmd-{d}-{i}"))
        scripts[d] = script
    return scripts


def run_simulation(rng: random.Random, n_devices: int, loss: float = 0.2,
                   dup: float = 0.15, with_commands: bool = True) -> SimResult:
    group = "g1"
    device_ids = [f"d{i}" for i in range(n_devices)]
    coordinator = Coordinator()
    net = LossyTransport(rng, loss, dup)
    scripts = build_scripts(rng, device_ids, with_commands)
    devices = [ScriptedDevice(SyncClient(group, d), scripts[d])
               for d in device_ids]
    sent_commands = [(d, a[1], a[2]) for d in device_ids
                     for a in scripts[d] if a[0] == "command"]
    for dev in devices:
        net.client_send(dev.client.hello())

    protocol_errors = 0
    rounds = 0
    settle_baseline: dict[str, int] | None = None
    while rounds < MAX_ROUNDS:
        rounds += 1
        for dev in devices:
            dev.step(net)

        if rounds % RETRANSMIT_PERIOD == 0:
            for dev in devices:
                for message in dev.client.pending():
                    net.client_send(message)
        if rounds % POLL_PERIOD == 0:
            for dev in devices:
                # Poll while blocked on a barrier or while settling at the end.
                if dev.waiting_barrier is not None or (
                        dev.position >= len(dev.script) and dev.client.unacked):
                    net.client_send(dev.client.resume_request())

        inbound = net.to_coordinator
        net.to_coordinator = []
        rng.shuffle(inbound)
        for frame in inbound:
            try:
                for outbound in coordinator.handle(decode_message(frame)):
                    net.coordinator_send(outbound)
            except SyncProtocolError:
                protocol_errors += 1  # e.g. reordered data before hello

        by_client = {d.client.device_id: d.client for d in devices}
        for device_id, queue in list(net.to_device.items()):
            rng.shuffle(queue)
            net.to_device[device_id] = []
            for frame in queue:
                by_client[device_id].on_message(decode_message(frame))

        in_flight = bool(net.to_coordinator) or any(net.to_device.values())
        busy = any(not dev.done() or dev.client.unacked for dev in devices)
        if not in_flight and not busy:
            # Final settle: everyone fetches a snapshot taken after
            # quiescence (repeat under loss until one arrives), so views
            # converge even when earlier fanout messages were lost.
            if settle_baseline is None:
                settle_baseline = {d.client.device_id: d.client.snapshots_received
                                   for d in devices}
            if all(d.client.snapshots_received
                   > settle_baseline[d.client.device_id] for d in devices):
                break
            for dev in devices:
                net.client_send(dev.client.resume_request())

    group_state = coordinator.groups[group]
    coordinator_view = {d: (e.screen_id, e.status, e.origin_seq)
                        for d, e in group_state.progress.items()}
    converged = rounds < MAX_ROUNDS and all(
        {d: (e.screen_id, e.status, e.origin_seq)
         for d, e in dev.client.view.items()} == coordinator_view
        and dev.client.barriers_released == group_state.released
        for dev in devices)
    fully_reached = {b for b, reached in group_state.barriers.items()
                     if reached >= group_state.members}
    return SimResult(
        converged=converged,
        rounds=rounds,
        release_emissions=dict(group_state.release_emissions),
        barriers_fully_reached=fully_reached,
        protocol_errors=protocol_errors,
        delivered_commands={d.client.device_id: list(d.client.commands)
                            for d in devices},
        sent_commands=sent_commands,
        clients=[d.client for d in devices],
        coordinator=coordinator,
    )
