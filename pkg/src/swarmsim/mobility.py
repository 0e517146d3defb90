"""Node movement: stationary placement and tour-following drone mobility.

DroneMobility follows the mission tour at constant speed, executes queued
MobilityCommands from the protocol (or a failure generator), and reports every
state transition as Telemetry. Movement is event-driven: the module registers
a wake-up for the next transition and interpolates positions in between, so a
run's motion history is exact and reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, Optional

from .engine import Engine, EventHandle, usec
from .mission import Coord3, Mission


class MobilityCommandType(IntEnum):
    REVERSE = 0
    GOTO_WAYPOINT = 1
    GOTO_COORDS = 2
    RETURN_TO_HOME = 3
    SHUTDOWN = 4


@dataclass
class MobilityCommand:
    command_type: MobilityCommandType
    param1: float = -1.0
    param2: float = -1.0
    param3: float = -1.0
    param4: float = -1.0
    param5: float = -1.0


class DroneActivity(IntEnum):
    IDLE = 0
    NAVIGATING = 1
    REACHED_EDGE = 2
    FOLLOWING_COMMAND = 3


@dataclass(frozen=True)
class Telemetry:
    """Mobility status snapshot shared with the protocol module."""

    next_waypoint_id: int = -1
    last_waypoint_id: int = -1
    current_command: int = -1
    is_reversed: bool = False
    activity: DroneActivity = DroneActivity.IDLE
    tour: Optional[Mission] = None   # attached only on the initialization telemetry


class InvalidWaypointIndex(Exception):
    pass


class InactiveNode(Exception):
    pass


# headroom for float fuzz when checking "already at the target"
ARRIVAL_TOLERANCE_M = 0.5

TelemetrySink = Callable[[Telemetry], None]


class StaticMobility:
    """Sensors and the ground station: a fixed position, no movement."""

    def __init__(self, position: Coord3):
        self._position = position
        self.active = True

    def position(self, now: int) -> Coord3:
        return self._position

    def current_telemetry(self) -> Telemetry:
        return Telemetry()

    def initialization_telemetry(self) -> Telemetry:
        return Telemetry()

    def handle_command(self, cmd: MobilityCommand) -> None:
        if cmd.command_type == MobilityCommandType.SHUTDOWN:
            self.active = False
            return
        if not self.active:
            raise InactiveNode("node is shut down")
        # stationary nodes ignore movement commands

    def start(self) -> None:
        pass

    def advance(self, to: int) -> list[Telemetry]:
        return []


class DroneMobility:
    """Tour-following UAV mobility.

    The drone idles at the mission home until ``start_time``, then flies the
    nav-waypoint tour at constant ``speed``. Reaching the tour's final (or,
    when reversed, first) waypoint parks it in REACHED_EDGE until a command
    arrives. GOTO commands queue FIFO and preempt plain navigation; REVERSE
    applies immediately.

    When constructed with an engine the module schedules its own transition
    wake-ups; without one (unit tests) the caller drives it via ``advance``.
    """

    def __init__(self, mission: Mission, speed: float, start_time: float = 0.0,
                 engine: Optional[Engine] = None, name: str = "",
                 telemetry_sink: Optional[TelemetrySink] = None):
        if speed <= 0:
            raise ValueError(f"speed must be positive, got {speed}")
        self.mission = mission
        self.tour = mission.tour
        self.holds = mission.tour_holds
        self.speed = speed
        self.start_time = usec(start_time)
        self.engine = engine
        self.name = name
        self.telemetry_sink = telemetry_sink

        self.active = True
        self.started = False
        self.activity = DroneActivity.IDLE
        self.reversed = False
        self.next_idx = -1
        self.last_idx = -1
        self.current_command = -1
        self.queue: list[MobilityCommand] = []

        # current leg: linear motion from (_anchor_pos, _anchor_t) to _target
        self._anchor_pos = mission.home
        self._anchor_t = 0
        self._target: Optional[Coord3] = None
        self._resume: Optional[tuple[int, int]] = None  # (next, last) after a GOTO leg
        self._dwell_until: Optional[int] = None
        self._wakeup: Optional[EventHandle] = None

    def start(self) -> None:
        """Arm the start-time wake-up (attached mode only)."""
        self._reschedule()

    # -- queries --------------------------------------------------------------

    def position(self, now: int) -> Coord3:
        if self._target is None:
            return self._anchor_pos
        travelled = self.speed * (now - self._anchor_t) / 1_000_000
        total = self._anchor_pos.dist(self._target)
        if total <= 0 or travelled >= total:
            return self._target
        t = travelled / total
        a, b = self._anchor_pos, self._target
        return Coord3(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t,
                      a.z + (b.z - a.z) * t)

    def current_telemetry(self) -> Telemetry:
        return Telemetry(
            next_waypoint_id=self.next_idx,
            last_waypoint_id=self.last_idx,
            current_command=self.current_command,
            is_reversed=self.reversed,
            activity=self.activity,
        )

    def initialization_telemetry(self) -> Telemetry:
        """First telemetry of the run; carries the tour for the protocol."""
        t = self.current_telemetry()
        return Telemetry(t.next_waypoint_id, t.last_waypoint_id,
                         t.current_command, t.is_reversed, t.activity,
                         tour=self.mission)

    # -- commands --------------------------------------------------------------

    def handle_command(self, cmd: MobilityCommand) -> list[Telemetry]:
        ct = cmd.command_type
        if ct == MobilityCommandType.SHUTDOWN:
            return self._shutdown()
        if not self.active:
            raise InactiveNode("node is shut down")

        if ct == MobilityCommandType.REVERSE:
            return self._reverse()
        if ct in (MobilityCommandType.GOTO_WAYPOINT, MobilityCommandType.GOTO_COORDS):
            self._validate_goto(cmd)
            self.queue.append(cmd)
            if self.started and self.activity != DroneActivity.FOLLOWING_COMMAND:
                return self._start_next_command(self._now())
            return []
        if ct == MobilityCommandType.RETURN_TO_HOME:
            return self._return_to_home()
        raise ValueError(f"unknown mobility command {ct}")

    def _validate_goto(self, cmd: MobilityCommand) -> None:
        n = len(self.tour)
        if cmd.command_type == MobilityCommandType.GOTO_WAYPOINT:
            if cmd.param1 != int(cmd.param1) or not 0 <= int(cmd.param1) < n:
                raise InvalidWaypointIndex(f"waypoint index {cmd.param1} outside [0, {n})")
        else:
            if not all(math.isfinite(p) for p in (cmd.param1, cmd.param2, cmd.param3)):
                raise ValueError("GOTO_COORDS target must be finite")
            for p in (cmd.param4, cmd.param5):
                if p != int(p) or not 0 <= int(p) < n:
                    raise InvalidWaypointIndex(f"waypoint index {p} outside [0, {n})")

    # -- time advancement --------------------------------------------------------

    def advance(self, to: int) -> list[Telemetry]:
        """Integrate motion up to ``to``, applying any transitions due by then."""
        out: list[Telemetry] = []
        if not self.active:
            return out
        guard = 0
        while True:
            due = self._next_transition_time()
            if due is None or due > to:
                break
            self._apply_transition(due, out)
            guard += 1
            assert guard < 10_000, "mobility transition loop did not settle"
        # re-anchor so later speed changes would not rewrite history
        pos = self.position(to)
        if self._target is not None:
            self._anchor_pos = pos
            self._anchor_t = to
        return out

    def _next_transition_time(self) -> Optional[int]:
        if not self.active:
            return None
        if not self.started:
            return self.start_time
        if self._dwell_until is not None:
            return self._dwell_until
        if self._target is not None:
            dist = self._anchor_pos.dist(self._target)
            return self._anchor_t + usec(dist / self.speed)
        return None

    def _apply_transition(self, at: int, out: list[Telemetry]) -> None:
        if not self.started:
            self.started = True
            self._anchor_t = at
            out.extend(self._begin_tour(at))
            return
        if self._dwell_until is not None:
            self._dwell_until = None
            self._anchor_t = at
            out.extend(self._depart_waypoint(at))
            return
        # arrival at the current leg's target
        self._anchor_pos = self._target
        self._anchor_t = at
        self._target = None
        out.extend(self._on_arrival(at))

    # -- transition logic ----------------------------------------------------------

    def _now(self) -> int:
        return self.engine.now if self.engine else self._anchor_t

    def _emit(self, out: list[Telemetry]) -> list[Telemetry]:
        if self.telemetry_sink:
            for t in out:
                self.telemetry_sink(t)
        return out

    def _begin_tour(self, at: int) -> list[Telemetry]:
        if self.queue:
            return self._start_next_command(at)
        self.last_idx = -1
        self.next_idx = 0
        self.activity = DroneActivity.NAVIGATING
        self._fly_to(self.tour[0], at)
        return self._emit([self.current_telemetry()])

    def _fly_to(self, target: Coord3, at: int) -> None:
        self._anchor_pos = self.position(at)
        self._anchor_t = at
        self._target = target
        self._reschedule()

    def _reschedule(self) -> None:
        if self.engine is None:
            return
        if self._wakeup is not None:
            self.engine.cancel(self._wakeup)
            self._wakeup = None
        due = self._next_transition_time()
        if due is not None:
            due = max(due, self.engine.now)
            self._wakeup = self.engine.schedule_at(
                due, self._on_wakeup, kind="timer", target=f"{self.name}.mobility")

    def _on_wakeup(self) -> None:
        self._wakeup = None
        self.advance(self.engine.now)
        self._reschedule()

    def _on_arrival(self, at: int) -> list[Telemetry]:
        out: list[Telemetry] = []
        if self.activity == DroneActivity.FOLLOWING_COMMAND:
            out.extend(self._finish_command(at))
            return out
        if self.activity != DroneActivity.NAVIGATING:
            return out
        # arrived at tour[next_idx]
        arrived = self.next_idx
        at_edge = (arrived == len(self.tour) - 1 and not self.reversed) or \
                  (arrived == 0 and self.reversed)
        if at_edge:
            if not self.reversed:
                self.last_idx = arrived - 1 if arrived > 0 else -1
            else:
                self.last_idx = arrived + 1 if arrived + 1 < len(self.tour) else -1
            self.next_idx = arrived
            self.activity = DroneActivity.REACHED_EDGE
            out.append(self.current_telemetry())
            self._emit(out[-1:])
            if self.queue:
                out.extend(self._start_next_command(at))
            return out
        self.last_idx = arrived
        self.next_idx = arrived + 1 if not self.reversed else arrived - 1
        hold = self.holds[arrived]
        if hold > 0:
            self._dwell_until = at + usec(hold)
            self._reschedule()
        else:
            self._fly_to(self.tour[self.next_idx], at)
        return self._emit([self.current_telemetry()])

    def _depart_waypoint(self, at: int) -> list[Telemetry]:
        self._fly_to(self.tour[self.next_idx], at)
        return []

    def _start_next_command(self, at: int) -> list[Telemetry]:
        cmd = self.queue.pop(0)
        self.current_command = int(cmd.command_type)
        self.activity = DroneActivity.FOLLOWING_COMMAND
        if cmd.command_type == MobilityCommandType.GOTO_COORDS:
            target = Coord3(cmd.param1, cmd.param2, cmd.param3)
            self._resume = (int(cmd.param4), int(cmd.param5))
        else:  # GOTO_WAYPOINT
            idx = int(cmd.param1)
            target = self.tour[idx]
            if self.reversed:
                nxt = idx - 1 if idx > 0 else min(idx + 1, len(self.tour) - 1)
            else:
                nxt = idx + 1 if idx < len(self.tour) - 1 else max(idx - 1, 0)
            self._resume = (nxt, idx)
        self._fly_to(target, at)
        return self._emit([self.current_telemetry()])

    def _finish_command(self, at: int) -> list[Telemetry]:
        out: list[Telemetry] = []
        if self.current_command == MobilityCommandType.RETURN_TO_HOME:
            self.current_command = -1
            self.next_idx = -1
            self.last_idx = -1
            self.activity = DroneActivity.IDLE
            out.append(self.current_telemetry())
            self._emit(out[-1:])
            return out
        nxt, last = self._resume or (self.next_idx, self.last_idx)
        self._resume = None
        self.current_command = -1
        if self.queue:
            out.extend(self._start_next_command(at))
            return out
        self.next_idx = nxt
        self.last_idx = last
        if nxt != last:
            self.reversed = nxt < last
        at_edge_pos = self.position(at).dist(self.tour[nxt]) <= ARRIVAL_TOLERANCE_M and \
            ((nxt == len(self.tour) - 1 and not self.reversed) or (nxt == 0 and self.reversed))
        if at_edge_pos:
            self.activity = DroneActivity.REACHED_EDGE
        else:
            self.activity = DroneActivity.NAVIGATING
            self._fly_to(self.tour[nxt], at)
        out.append(self.current_telemetry())
        self._emit(out[-1:])
        return out

    def _reverse(self) -> list[Telemetry]:
        self.reversed = not self.reversed
        if self.next_idx >= 0 and self.last_idx >= 0:
            self.next_idx, self.last_idx = self.last_idx, self.next_idx
        now = self._now()
        if self.activity in (DroneActivity.NAVIGATING, DroneActivity.REACHED_EDGE):
            self.activity = DroneActivity.NAVIGATING
            self._fly_to(self.tour[self.next_idx], now)
        return self._emit([self.current_telemetry()])

    def _return_to_home(self) -> list[Telemetry]:
        self.queue.clear()
        self._dwell_until = None
        self._resume = None
        self.current_command = int(MobilityCommandType.RETURN_TO_HOME)
        self.activity = DroneActivity.FOLLOWING_COMMAND
        self._fly_to(self.mission.home, self._now())
        return self._emit([self.current_telemetry()])

    def _shutdown(self) -> list[Telemetry]:
        now = self._now()
        self._anchor_pos = self.position(now)
        self._anchor_t = now
        self._target = None
        self.queue.clear()
        self._dwell_until = None
        self.active = False
        self.activity = DroneActivity.IDLE
        self.current_command = -1
        if self._wakeup is not None and self.engine is not None:
            self.engine.cancel(self._wakeup)
            self._wakeup = None
        return []
