"""Ground-station collector.

Beacons its presence with periodic heartbeats so passing UAVs know they are in
range, accumulates every bearer payload addressed to it, and acknowledges each
delivery with a heartbeat back to the sender.
"""

from __future__ import annotations

from ..mobility import Telemetry
from ..network import CommunicationCommand, CommunicationCommandType, Packet
from ..protocol import Protocol, ProtocolContext, register_protocol
from .messages import MessageType, SenderKind, SwarmMessage


class GroundStationProtocol(Protocol):

    def __init__(self, ctx: ProtocolContext):
        super().__init__(ctx)
        self.total_received = 0
        self.delivery_log: list[tuple[int, int, int]] = []  # (time_us, amount, total)

    def handle_telemetry(self, telemetry: Telemetry) -> None:
        # initialization: start beaconing so UAVs can find the station
        self.send_command(CommunicationCommand(
            CommunicationCommandType.SET_TARGET, target=""))
        self.send_command(CommunicationCommand(
            CommunicationCommandType.SET_PAYLOAD,
            payload_template=self._beacon()))

    def _beacon(self) -> SwarmMessage:
        return SwarmMessage(
            message_type=MessageType.HEARTBEAT,
            sender_kind=SenderKind.GROUND,
            source_id=self.ctx.node_id,
            destination_id=-1,
            data_length=0,
        )

    def handle_packet(self, pkt: Packet) -> None:
        msg = pkt.message
        if msg.message_type != MessageType.BEARER or \
                msg.destination_id != self.ctx.node_id:
            return
        amount = max(msg.data_length, 0)
        self.total_received += amount
        self.delivery_log.append((self.ctx.now, amount, self.total_received))
        self.ctx.record_data("ground_rx", amount, msg.source_id, self.total_received)
        # acknowledgment doubles as an in-range beacon for the sender
        self.ctx.send_message(SwarmMessage(
            message_type=MessageType.HEARTBEAT,
            sender_kind=SenderKind.GROUND,
            source_id=self.ctx.node_id,
            destination_id=msg.source_id,
            data_length=0,
        ), msg.source_id)


register_protocol("GroundStationProtocol", GroundStationProtocol)
