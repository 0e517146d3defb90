"""Concrete coordination protocols and their wire message format."""

from .messages import (DEFAULT_DATA_LENGTH, WIRE_SIZE, MessageDecodeError,
                       MessageType, SenderKind, SwarmMessage, decode)
from .uav import DadcaUav, ZigzagUav, boundary_fraction
from .sensor import SensorProtocol
from .ground import GroundStationProtocol

__all__ = [
    "DEFAULT_DATA_LENGTH", "WIRE_SIZE", "MessageDecodeError", "MessageType",
    "SenderKind", "SwarmMessage", "decode", "ZigzagUav", "DadcaUav",
    "boundary_fraction", "SensorProtocol", "GroundStationProtocol",
]
