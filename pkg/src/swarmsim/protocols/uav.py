"""UAV coordination protocols.

ZigZag: UAVs patrol the tour broadcasting heartbeats. Sensors answer with
bearer messages the UAV absorbs. When two UAVs hear each other they pair with
a request/confirm handshake; the one farther from the tour start hands its
data to the closer one and both reverse course, so data ferries hop-by-hop
toward the ground station at the start. A quiet window after each encounter
stops immediate re-pairing.

DADCA refines the encounter: the pair pools its neighbour counts, computes the
boundary between their would-be equal tour sections, and both fly to that
boundary before splitting, which equalizes spacing much faster than plain
reversal.
"""

from __future__ import annotations

from enum import Enum
from typing import Optional

from ..mission import Mission, cumulative_arcs, point_at_fraction
from ..mobility import DroneActivity, MobilityCommand, MobilityCommandType, Telemetry
from ..network import (CommunicationCommand, CommunicationCommandType, Packet)
from ..protocol import Protocol, ProtocolContext, register_protocol
from .messages import MessageType, SenderKind, SwarmMessage

DEFAULT_QUIET_TIME = 15.0


class Phase(Enum):
    SOLO = "solo"
    REQUESTED = "requested"
    PAIRED = "paired"
    EXECUTING_RENDEZVOUS = "rendezvous"


class ZigzagUav(Protocol):
    """Mobile-node side of the ZigZag protocol."""

    def __init__(self, ctx: ProtocolContext):
        super().__init__(ctx)
        self.quiet_time = float(ctx.params.get("quietTime", DEFAULT_QUIET_TIME))
        self.collected_data = 0
        self.left_count = 0
        self.right_count = 0
        self.phase = Phase.SOLO
        self.pair_partner: Optional[int] = None
        self.tour: Optional[Mission] = None
        self._arcs: list[float] = []
        self.telemetry = Telemetry()
        self.ground_id: Optional[int] = None
        self._requested_at = 0
        self._request_snapshot: Optional[SwarmMessage] = None

    # -- telemetry ------------------------------------------------------------

    def handle_telemetry(self, telemetry: Telemetry) -> None:
        if telemetry.tour is not None:
            self.tour = telemetry.tour
            self._arcs = cumulative_arcs(self.tour.tour)
            self.send_command(CommunicationCommand(
                CommunicationCommandType.SET_TARGET, target=""))
        self.telemetry = telemetry
        if self.phase is Phase.EXECUTING_RENDEZVOUS and \
                telemetry.activity != DroneActivity.FOLLOWING_COMMAND:
            self.phase = Phase.SOLO
            self.pair_partner = None
        self.send_command(CommunicationCommand(
            CommunicationCommandType.SET_PAYLOAD,
            payload_template=self._heartbeat()))
        if telemetry.activity == DroneActivity.REACHED_EDGE:
            self.send_command(MobilityCommand(MobilityCommandType.REVERSE))

    def _heartbeat(self) -> SwarmMessage:
        t = self.telemetry
        return SwarmMessage(
            message_type=MessageType.HEARTBEAT,
            sender_kind=SenderKind.UAV,
            source_id=self.ctx.node_id,
            destination_id=-1,
            next_waypoint_id=t.next_waypoint_id,
            last_waypoint_id=t.last_waypoint_id,
            data_length=0,
            left_neighbours=self.left_count,
            right_neighbours=self.right_count,
            reversed=t.is_reversed,
        )

    # -- packets --------------------------------------------------------------

    def handle_packet(self, pkt: Packet) -> None:
        msg = pkt.message
        assert msg is not None and msg.source_id != self.ctx.node_id, \
            "network must never deliver a node its own transmission"
        mtype = msg.message_type
        if mtype == MessageType.HEARTBEAT:
            self._on_heartbeat(msg)
        elif mtype == MessageType.PAIR_REQUEST:
            self._on_pair_request(msg)
        elif mtype == MessageType.PAIR_CONFIRM:
            self._on_pair_confirm(msg)
        elif mtype == MessageType.BEARER:
            self._on_bearer(msg)

    def _on_heartbeat(self, msg: SwarmMessage) -> None:
        if msg.sender_kind == SenderKind.GROUND:
            self.ground_id = msg.source_id
            self._deliver_to_ground()
            return
        if msg.sender_kind != SenderKind.UAV:
            return              # sensors react to UAV heartbeats, not vice versa
        self._expire_stale_request()
        if self.phase is not Phase.SOLO or self.is_timed_out():
            return
        self.pair_partner = msg.source_id
        self.phase = Phase.REQUESTED
        self._requested_at = self.ctx.now
        self._request_snapshot = self._pair_message(
            MessageType.PAIR_REQUEST, msg.source_id)
        self.ctx.send_message(self._request_snapshot, msg.source_id)

    def _on_pair_request(self, msg: SwarmMessage) -> None:
        if msg.destination_id != self.ctx.node_id or self.is_timed_out():
            return
        self._expire_stale_request()
        if self.phase is Phase.REQUESTED:
            # simultaneous requests: the lower node id keeps the initiative
            if msg.source_id != self.pair_partner or msg.source_id > self.ctx.node_id:
                return
        elif self.phase is not Phase.SOLO:
            return
        mine = self._pair_message(MessageType.PAIR_CONFIRM, msg.source_id)
        self.phase = Phase.PAIRED
        self.pair_partner = msg.source_id
        self.ctx.send_message(mine, msg.source_id)
        self._exchange(mine, msg)

    def _on_pair_confirm(self, msg: SwarmMessage) -> None:
        if msg.destination_id != self.ctx.node_id:
            return
        if self.phase is not Phase.REQUESTED or msg.source_id != self.pair_partner:
            return
        mine = self._request_snapshot
        self.phase = Phase.PAIRED
        self._exchange(mine, msg)

    def _on_bearer(self, msg: SwarmMessage) -> None:
        if msg.destination_id != self.ctx.node_id:
            return
        if msg.sender_kind == SenderKind.GROUND:
            return
        amount = max(msg.data_length, 0)
        self.collected_data += amount
        event = "collect" if msg.sender_kind == SenderKind.SENSOR else "handoff_rx"
        self.ctx.record_data(event, amount, msg.source_id, self.collected_data)

    # -- pairing mechanics ------------------------------------------------------

    def _pair_message(self, mtype: MessageType, dest: int) -> SwarmMessage:
        t = self.telemetry
        return SwarmMessage(
            message_type=mtype,
            sender_kind=SenderKind.UAV,
            source_id=self.ctx.node_id,
            destination_id=dest,
            next_waypoint_id=t.next_waypoint_id,
            last_waypoint_id=t.last_waypoint_id,
            data_length=0,
            left_neighbours=self.left_count,
            right_neighbours=self.right_count,
            reversed=t.is_reversed,
        )

    def _expire_stale_request(self) -> None:
        if self.phase is Phase.REQUESTED and \
                self.ctx.now - self._requested_at > self.quiet_time * 1_000_000:
            self.phase = Phase.SOLO
            self.pair_partner = None

    def _progress_key(self, msg: SwarmMessage) -> float:
        """Arc-length stand-in for how far along the tour a UAV is.

        Only the bracketing waypoint ids travel on the wire, so the key is the
        midpoint of that tour interval; exact ties fall back to node id.
        """
        last, nxt = msg.last_waypoint_id, msg.next_waypoint_id
        if last < 0 and nxt < 0:
            return 0.0
        if last < 0:
            return self._arcs[nxt]
        if nxt < 0:
            return self._arcs[last]
        return (self._arcs[last] + self._arcs[nxt]) / 2.0

    def _farther_is_me(self, mine: SwarmMessage, theirs: SwarmMessage) -> bool:
        my_key = (self._progress_key(mine), mine.source_id)
        their_key = (self._progress_key(theirs), theirs.source_id)
        return my_key > their_key

    def _exchange(self, mine: SwarmMessage, theirs: SwarmMessage) -> None:
        """Both pair members run this once, with identical message views."""
        farther = self._farther_is_me(mine, theirs)
        self._hand_off_if_farther(farther, theirs.source_id)
        self._after_pair(farther, mine, theirs)

    def _hand_off_if_farther(self, farther: bool, partner: int) -> None:
        if not farther:
            return
        amount = self.collected_data
        self.ctx.send_message(SwarmMessage(
            message_type=MessageType.BEARER,
            sender_kind=SenderKind.UAV,
            source_id=self.ctx.node_id,
            destination_id=partner,
            data_length=amount,
        ), partner)
        self.collected_data = 0
        self.ctx.record_data("handoff_tx", amount, partner, 0)

    def _after_pair(self, farther: bool, mine: SwarmMessage,
                    theirs: SwarmMessage) -> None:
        self.ctx.record_pair(theirs.source_id, "R" if farther else "L",
                             None, self.left_count, self.right_count)
        self.send_command(MobilityCommand(MobilityCommandType.REVERSE))
        self.initiate_timeout(self.quiet_time)
        self.phase = Phase.SOLO
        self.pair_partner = None

    # -- ground delivery ----------------------------------------------------------

    def _deliver_to_ground(self) -> None:
        if self.ground_id is None or self.collected_data <= 0:
            return
        amount = self.collected_data
        self.ctx.send_message(SwarmMessage(
            message_type=MessageType.BEARER,
            sender_kind=SenderKind.UAV,
            source_id=self.ctx.node_id,
            destination_id=self.ground_id,
            data_length=amount,
        ), self.ground_id)
        self.collected_data = 0
        self.ctx.record_data("deliver", amount, self.ground_id, 0)


class DadcaUav(ZigzagUav):
    """DADCA: ZigZag plus neighbour counting and section-boundary rendezvous."""

    def _after_pair(self, farther: bool, mine: SwarmMessage,
                    theirs: SwarmMessage) -> None:
        left_msg, right_msg = (theirs, mine) if farther else (mine, theirs)
        fraction = boundary_fraction(left_msg.left_neighbours,
                                     right_msg.right_neighbours)
        if farther:
            self.left_count = theirs.left_neighbours + 1
        else:
            self.right_count = theirs.right_neighbours + 1
        self.ctx.record_pair(theirs.source_id, "R" if farther else "L",
                             fraction, self.left_count, self.right_count)

        point, nxt, last = point_at_fraction(self.tour, fraction)
        if last < 0:
            # degenerate single-point tour: fall back to plain reversal
            self.send_command(MobilityCommand(MobilityCommandType.REVERSE))
        else:
            resume_next, resume_last = (nxt, last) if farther else (last, nxt)
            self.send_command(MobilityCommand(
                MobilityCommandType.GOTO_COORDS,
                param1=point.x, param2=point.y, param3=point.z,
                param4=float(resume_next), param5=float(resume_last)))
        self.initiate_timeout(self.quiet_time)
        self.phase = Phase.EXECUTING_RENDEZVOUS


def boundary_fraction(left_of_left: int, right_of_right: int) -> float:
    """Shared section boundary for a meeting pair, as a tour fraction.

    ``left_of_left`` is the closer-to-start UAV's left-neighbour count;
    ``right_of_right`` the farther UAV's right-neighbour count. Pooling the
    two counts sizes the swarm at left + right + 2, placing the boundary so
    that accurate counts yield the uniform partition points k/n exactly.
    """
    if left_of_left < 0 or right_of_right < 0:
        raise ValueError("neighbour counts must be non-negative")
    return (left_of_left + 1) / (left_of_left + right_of_right + 2)


register_protocol("ZigzagProtocol", ZigzagUav)
register_protocol("DadcaProtocol", DadcaUav)
