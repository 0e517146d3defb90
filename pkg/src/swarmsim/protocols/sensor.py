"""Static ground-sensor behavior, shared by the ZigZag and DADCA scenarios.

A sensor holds an integer stock of abstract data units: an initial batch plus,
optionally, one more batch every ``generationInterval`` seconds. Every UAV
heartbeat it hears gets a bearer reply carrying the entire current stock
(possibly zero); the stock drains on reply, so units are handed over rather
than copied and the swarm-wide data balance stays exact.
"""

from __future__ import annotations

from ..network import Packet
from ..protocol import Protocol, ProtocolContext, register_protocol
from .messages import DEFAULT_DATA_LENGTH, MessageType, SenderKind, SwarmMessage


class SensorProtocol(Protocol):

    def __init__(self, ctx: ProtocolContext):
        super().__init__(ctx)
        self.batch_size = int(ctx.params.get("dataLength", DEFAULT_DATA_LENGTH))
        self.generation_interval = float(ctx.params.get("generationInterval", 0.0))
        self.drained_total = 0

    def stock(self, now_us: int) -> int:
        produced = self.batch_size
        if self.generation_interval > 0:
            produced += self.batch_size * int(
                (now_us / 1_000_000) // self.generation_interval)
        return produced - self.drained_total

    def handle_packet(self, pkt: Packet) -> None:
        msg = pkt.message
        if msg.message_type != MessageType.HEARTBEAT or \
                msg.sender_kind != SenderKind.UAV:
            return
        if not self.ctx.comm_started:
            return
        amount = self.stock(self.ctx.now)
        self.ctx.send_message(SwarmMessage(
            message_type=MessageType.BEARER,
            sender_kind=SenderKind.SENSOR,
            source_id=self.ctx.node_id,
            destination_id=msg.source_id,
            data_length=amount,
        ), msg.source_id)
        self.drained_total += amount
        if amount > 0:
            self.ctx.record_data("sensor_tx", amount, msg.source_id, 0)


register_protocol("ZigzagProtocolSensor", SensorProtocol)
register_protocol("DadcaProtocolSensor", SensorProtocol)
