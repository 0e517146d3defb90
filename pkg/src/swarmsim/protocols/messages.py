"""The 34-byte wire message exchanged between UAVs, sensors and the ground station.

Fixed little-endian layout:

    offset  size  field
    0       1     messageType      (u8)
    1       1     senderKind       (u8)
    2       2     reserved         (u16, always 0)
    4       4     sourceID         (i32)
    8       4     destinationID    (i32, -1 = unaddressed)
    12      4     nextWaypointID   (i32)
    16      4     lastWaypointID   (i32)
    20      4     dataLength       (i32)
    24      4     leftNeighbours   (i32)
    28      4     rightNeighbours  (i32)
    32      1     reversed         (u8, 0/1)
    33      1     padding
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum

WIRE_SIZE = 34
_STRUCT = struct.Struct("<BBHiiiiiiiBx")
assert _STRUCT.size == WIRE_SIZE

DEFAULT_DATA_LENGTH = 5


class MessageType(IntEnum):
    HEARTBEAT = 0
    PAIR_REQUEST = 1
    PAIR_CONFIRM = 2
    BEARER = 3


class SenderKind(IntEnum):
    UAV = 0
    SENSOR = 1
    GROUND = 2


class MessageDecodeError(Exception):
    pass


@dataclass(frozen=True)
class SwarmMessage:
    message_type: MessageType = MessageType.HEARTBEAT
    sender_kind: SenderKind = SenderKind.UAV
    source_id: int = -1
    destination_id: int = -1
    next_waypoint_id: int = -1
    last_waypoint_id: int = -1
    data_length: int = DEFAULT_DATA_LENGTH
    left_neighbours: int = 0
    right_neighbours: int = 0
    reversed: bool = False

    def encode(self) -> bytes:
        return _STRUCT.pack(
            int(self.message_type), int(self.sender_kind), 0,
            self.source_id, self.destination_id,
            self.next_waypoint_id, self.last_waypoint_id,
            self.data_length, self.left_neighbours, self.right_neighbours,
            1 if self.reversed else 0,
        )


def decode(payload: bytes) -> SwarmMessage:
    if len(payload) != WIRE_SIZE:
        raise MessageDecodeError(f"expected {WIRE_SIZE} bytes, got {len(payload)}")
    (mtype, kind, _reserved, src, dst, nxt, last,
     data_len, left, right, rev) = _STRUCT.unpack(payload)
    try:
        message_type = MessageType(mtype)
        sender_kind = SenderKind(kind)
    except ValueError as e:
        raise MessageDecodeError(str(e)) from None
    if rev not in (0, 1):
        raise MessageDecodeError(f"bad reversed flag {rev}")
    return SwarmMessage(message_type, sender_kind, src, dst, nxt, last,
                        data_len, left, right, bool(rev))
