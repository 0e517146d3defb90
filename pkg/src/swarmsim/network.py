"""Simulated wireless medium and per-node communication module.

The medium is a unit-disk radio: a transmission reaches every active node
within the sender's range, after a fixed-plus-per-meter propagation delay,
with independent Bernoulli loss drawn from the engine's "radio" stream. Range
is checked at send time. The per-node module periodically transmits the
payload template set by the protocol and forwards received packets to it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional

from .engine import Engine, EventHandle, usec
from .protocols.messages import MessageDecodeError, SwarmMessage, decode

# modeled IP + UDP header bytes on top of the 34-byte payload
HEADER_OVERHEAD = 28

BROADCAST = None


class NotStarted(Exception):
    pass


class InactiveNode(Exception):
    pass


class MissingPayload(Exception):
    pass


class CommunicationCommandType(IntEnum):
    SET_PAYLOAD = 0
    SET_TARGET = 1


@dataclass
class CommunicationCommand:
    command_type: CommunicationCommandType
    payload_template: Optional[SwarmMessage] = None
    target: str = ""                 # empty string means broadcast


@dataclass
class RadioConfig:
    range_m: float = 100.0
    loss_probability: float = 0.0
    propagation_delay: float = 0.001   # seconds, fixed term
    delay_per_meter: float = 0.0       # seconds per meter of distance
    send_interval: float = 1.0         # seconds between periodic transmissions
    start_time: float = 0.0            # seconds; app silent before this


@dataclass
class Packet:
    src: int
    dst: Optional[int]               # node id, or None for broadcast
    payload: bytes
    length: int
    sent_at: int                     # microseconds
    delivered_at: int = 0
    message: Optional[SwarmMessage] = None  # decoded at delivery


@dataclass
class MediumStats:
    sent: int = 0                    # transmissions
    deliveries: int = 0              # per-receiver arrivals handed to a protocol
    losses: int = 0                  # per-receiver Bernoulli drops
    suppressed_out_of_range: int = 0
    dropped_inactive: int = 0        # receiver shut down or not yet listening
    malformed: int = 0


class RadioMedium:
    """Shared broadcast domain for all nodes of one simulation."""

    def __init__(self, engine: Engine):
        self.engine = engine
        self.rng = engine.rng_stream("radio")
        self.stats = MediumStats()
        self.tx_listeners = []       # callbacks (time_us, src_node, dst, msg)
        self.rx_listeners = []       # callbacks (time_us, dst_node, pkt)

    def send(self, src_node, dst: Optional[int], msg: SwarmMessage) -> None:
        comm = src_node.comm
        if not src_node.active:
            raise InactiveNode(f"{src_node.name} is shut down")
        if comm is None or not comm.started:
            raise NotStarted(f"{src_node.name} communication has not started")
        now = self.engine.now
        cfg = comm.config
        payload = msg.encode()
        self.stats.sent += 1
        for cb in self.tx_listeners:
            cb(now, src_node, dst, msg)
        src_pos = src_node.position(now)

        if dst is BROADCAST:
            candidates = [n for nid, n in sorted(self.engine.nodes.items())
                          if nid != src_node.id and n.active]
        else:
            target = self.engine.nodes.get(dst)
            candidates = [target] if target is not None and target.active \
                and target.id != src_node.id else []

        for receiver in candidates:
            distance = src_pos.dist(receiver.position(now))
            if distance > cfg.range_m:
                self.stats.suppressed_out_of_range += 1
                continue
            if cfg.loss_probability > 0 and self.rng.random() < cfg.loss_probability:
                self.stats.losses += 1
                continue
            delay = usec(cfg.propagation_delay + cfg.delay_per_meter * distance)
            pkt = Packet(src=src_node.id, dst=dst, payload=payload,
                         length=len(payload) + HEADER_OVERHEAD, sent_at=now)
            self.engine.schedule_in(
                delay, lambda r=receiver, p=pkt: self._deliver(r, p),
                kind="packet", target=f"{receiver.name}.comm")

    def _deliver(self, receiver, pkt: Packet) -> None:
        if not receiver.active or not receiver.comm.started:
            self.stats.dropped_inactive += 1
            return
        pkt.delivered_at = self.engine.now
        try:
            pkt.message = decode(pkt.payload)
        except MessageDecodeError:
            self.stats.malformed += 1
            return
        self.stats.deliveries += 1
        for cb in self.rx_listeners:
            cb(self.engine.now, receiver, pkt)
        receiver.comm.handle_delivery(pkt)


class CommunicationModule:
    """Per-node radio front-end: periodic template sender plus packet forwarding."""

    def __init__(self, node, medium: RadioMedium, config: RadioConfig):
        self.node = node
        self.medium = medium
        self.config = config
        self.engine = medium.engine
        self.payload_template: Optional[SwarmMessage] = None
        self.targets: list[str] = []  # node names; empty = broadcast
        self.started = False
        self._tick_handle: Optional[EventHandle] = None

    def start(self) -> None:
        start_at = max(usec(self.config.start_time), 0)
        self._tick_handle = self.engine.schedule_at(
            start_at, self._tick, kind="timer", target=f"{self.node.name}.comm")

    def handle_command(self, cmd: CommunicationCommand) -> None:
        if cmd.command_type == CommunicationCommandType.SET_PAYLOAD:
            if cmd.payload_template is None:
                raise MissingPayload("SET_PAYLOAD requires a payload template")
            self.payload_template = cmd.payload_template
        elif cmd.command_type == CommunicationCommandType.SET_TARGET:
            self.targets = cmd.target.split() if cmd.target else []
        else:
            raise ValueError(f"unknown communication command {cmd.command_type}")

    def send_now(self, msg: SwarmMessage, dst: Optional[int] = BROADCAST) -> None:
        """One-shot reactive transmission, used by protocols for replies."""
        self.medium.send(self.node, dst, msg)

    def _tick(self) -> None:
        self._tick_handle = None
        if not self.node.active:
            return
        self.started = True
        if self.payload_template is not None:
            if not self.targets:
                self.medium.send(self.node, BROADCAST, self.payload_template)
            else:
                for name in self.targets:
                    target = self.engine.node_by_name(name)
                    if target is not None:
                        self.medium.send(self.node, target.id, self.payload_template)
        self._tick_handle = self.engine.schedule_in(
            usec(self.config.send_interval), self._tick,
            kind="timer", target=f"{self.node.name}.comm")

    def stop(self) -> None:
        if self._tick_handle is not None:
            self.engine.cancel(self._tick_handle)
            self._tick_handle = None
