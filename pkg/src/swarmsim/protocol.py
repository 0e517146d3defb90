"""Pluggable node-behavior contract.

Every node runs one Protocol instance. The engine feeds it received packets
and mobility telemetry; in response it may command its sibling mobility and
communication modules, send one-shot messages, and manage a quiet-window
timeout. Concrete implementations register under a config-facing name and are
selected per node with the ``protocol.typename`` scenario parameter.
"""

from __future__ import annotations

from typing import Optional

from .engine import RngStream, usec
from .mobility import MobilityCommand, Telemetry
from .network import BROADCAST, CommunicationCommand, Packet
from .protocols.messages import SwarmMessage


class NonPositiveDuration(Exception):
    pass


class ProtocolContext:
    """Engine-side services handed to a protocol instance.

    Command sinks deliver synchronously, within the same event turn, to the
    sibling modules of the owning node only.
    """

    def __init__(self, node, rng: RngStream, params):
        self.node = node
        self.rng = rng
        self.params = params          # resolved per-node protocol parameters
        self._timeout_deadline: Optional[int] = None

    @property
    def node_id(self) -> int:
        return self.node.id

    @property
    def node_name(self) -> str:
        return self.node.name

    @property
    def now(self) -> int:
        return self.node.engine.now

    @property
    def comm_started(self) -> bool:
        return self.node.comm is not None and self.node.comm.started

    def send_mobility_command(self, cmd: MobilityCommand) -> None:
        self.node.dispatch_mobility_command(cmd, origin="protocol")

    def send_communication_command(self, cmd: CommunicationCommand) -> None:
        self.node.dispatch_communication_command(cmd)

    def send_message(self, msg: SwarmMessage, dst: Optional[int] = BROADCAST) -> None:
        """Transmit one message immediately (replies, pairing, handoffs)."""
        self.node.comm.send_now(msg, dst)

    def initiate_timeout(self, duration: float) -> None:
        if duration <= 0:
            raise NonPositiveDuration(f"timeout duration must be > 0, got {duration}")
        self._timeout_deadline = self.now + usec(duration)

    def is_timed_out(self) -> bool:
        return self._timeout_deadline is not None and self.now < self._timeout_deadline

    # trace hooks; the metrics collector replaces these when attached
    def record_pair(self, partner: int, role: str, fraction: Optional[float],
                    left: int, right: int) -> None:
        pass

    def record_data(self, event: str, amount: int, counterpart: int,
                    total_after: int) -> None:
        pass


class Protocol:
    """Base protocol: ignores everything. Subclasses override the handlers."""

    def __init__(self, ctx: ProtocolContext):
        self.ctx = ctx

    def handle_packet(self, pkt: Packet) -> None:
        pass

    def handle_telemetry(self, telemetry: Telemetry) -> None:
        pass

    def send_command(self, order) -> None:
        """Route a command to the sibling module matching its type."""
        if isinstance(order, MobilityCommand):
            self.ctx.send_mobility_command(order)
        elif isinstance(order, CommunicationCommand):
            self.ctx.send_communication_command(order)
        else:
            raise TypeError(f"unsupported command {type(order).__name__}")

    def initiate_timeout(self, duration: float) -> None:
        self.ctx.initiate_timeout(duration)

    def is_timed_out(self) -> bool:
        return self.ctx.is_timed_out()


_REGISTRY: dict[str, type] = {}


def register_protocol(typename: str, cls: Optional[type] = None):
    """Register a protocol class under its config-facing typename."""
    def add(c: type) -> type:
        if typename in _REGISTRY and _REGISTRY[typename] is not c:
            raise ValueError(f"protocol {typename!r} already registered")
        _REGISTRY[typename] = c
        return c
    return add(cls) if cls is not None else add


def create_protocol(typename: str, ctx: ProtocolContext) -> Protocol:
    try:
        cls = _REGISTRY[typename]
    except KeyError:
        known = ", ".join(sorted(_REGISTRY))
        raise KeyError(f"unknown protocol {typename!r} (known: {known})") from None
    return cls(ctx)


def registered_protocols() -> list[str]:
    return sorted(_REGISTRY)
