"""Waypoint mission files and tour geometry.

Missions are tab-separated QGC-WPL-style text: a ``QGC WPL <version>`` header
followed by rows of
``index  current  frame  command  p1  p2  p3  p4  x/lat  y/lon  z/alt  autocontinue``.

Geodetic rows (frames 0 and 3) are projected to local east/north meters
relative to the first row with an equirectangular projection; frame-1 rows are
already local meters and are taken verbatim. Supported commands: 16
(nav waypoint), 20 (return to launch), 22 (takeoff). The tour used for
navigation and rendezvous geometry is the polyline of nav waypoints only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

HEADER_MAGIC = "QGC WPL"
EARTH_RADIUS_M = 6371000.0

CMD_NAV_WAYPOINT = 16
CMD_RETURN_TO_LAUNCH = 20
CMD_TAKEOFF = 22
SUPPORTED_COMMANDS = {CMD_NAV_WAYPOINT, CMD_RETURN_TO_LAUNCH, CMD_TAKEOFF}

FRAME_GLOBAL = 0
FRAME_LOCAL = 1
FRAME_GLOBAL_RELATIVE_ALT = 3


class MissionError(Exception):
    pass


class BadHeader(MissionError):
    pass


class BadRow(MissionError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


class UnsupportedCommand(MissionError):
    def __init__(self, code: int, line_no: int):
        super().__init__(f"line {line_no}: unsupported command {code}")
        self.code = code
        self.line_no = line_no


class EmptyMission(MissionError):
    pass


@dataclass(frozen=True)
class Coord3:
    """Local Cartesian position in meters: x east, y north, z up."""

    x: float
    y: float
    z: float

    def dist(self, other: "Coord3") -> float:
        return math.sqrt((self.x - other.x) ** 2
                         + (self.y - other.y) ** 2
                         + (self.z - other.z) ** 2)


@dataclass(frozen=True)
class Waypoint:
    index: int
    command: int
    position: Coord3
    hold: float = 0.0                # dwell seconds at the waypoint
    # raw columns preserved for lossless serialization
    current: int = 0
    frame: int = FRAME_LOCAL
    params: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    raw_xyz: tuple[float, float, float] = (0.0, 0.0, 0.0)
    autocontinue: int = 1


@dataclass(frozen=True)
class Mission:
    """Immutable parsed mission; shareable read-only between modules."""

    waypoints: tuple[Waypoint, ...]
    home: Coord3
    source_path: str = ""
    version: int = 110

    @property
    def tour(self) -> tuple[Coord3, ...]:
        """Positions of the nav waypoints, in file order."""
        return tuple(w.position for w in self.waypoints
                     if w.command == CMD_NAV_WAYPOINT)

    @property
    def tour_holds(self) -> tuple[float, ...]:
        return tuple(w.hold for w in self.waypoints
                     if w.command == CMD_NAV_WAYPOINT)


def _project(lat: float, lon: float, lat0: float, lon0: float) -> tuple[float, float]:
    x = math.radians(lon - lon0) * EARTH_RADIUS_M * math.cos(math.radians(lat0))
    y = math.radians(lat - lat0) * EARTH_RADIUS_M
    return x, y


def parse_mission(text: str, source_path: str = "") -> Mission:
    lines = text.splitlines()
    if not lines or not lines[0].strip().startswith(HEADER_MAGIC):
        raise BadHeader(f"line 1: expected '{HEADER_MAGIC} <version>' header")
    header_rest = lines[0].strip()[len(HEADER_MAGIC):].strip()
    try:
        version = int(header_rest)
    except ValueError:
        raise BadHeader(f"line 1: bad header version {header_rest!r}") from None

    rows: list[tuple[int, list[float]]] = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cols = line.rstrip("\n").split("\t")
        if len(cols) != 12:
            raise BadRow(line_no, f"expected 12 tab-separated columns, got {len(cols)}")
        try:
            values = [float(c) for c in cols]
        except ValueError:
            raise BadRow(line_no, "non-numeric column") from None
        rows.append((line_no, values))

    if not rows:
        raise EmptyMission("mission file has no waypoint rows")

    # first row anchors the local frame
    first = rows[0][1]
    first_frame = int(first[2])
    if first_frame == FRAME_LOCAL:
        lat0 = lon0 = alt0 = 0.0
        home = Coord3(first[8], first[9], first[10])
    else:
        lat0, lon0, alt0 = first[8], first[9], first[10]
        home = Coord3(0.0, 0.0, 0.0)

    waypoints: list[Waypoint] = []
    for i, (line_no, v) in enumerate(rows):
        index, current, frame, command = int(v[0]), int(v[1]), int(v[2]), int(v[3])
        if index != i:
            raise BadRow(line_no, f"index column {index} != row position {i}")
        if command not in SUPPORTED_COMMANDS:
            raise UnsupportedCommand(command, line_no)
        if frame == FRAME_LOCAL:
            pos = Coord3(v[8], v[9], v[10])
        elif frame in (FRAME_GLOBAL, FRAME_GLOBAL_RELATIVE_ALT):
            x, y = _project(v[8], v[9], lat0, lon0)
            z = v[10] if frame == FRAME_GLOBAL_RELATIVE_ALT else v[10] - alt0
            pos = Coord3(x, y, z)
        else:
            raise BadRow(line_no, f"unsupported coordinate frame {frame}")
        if not all(math.isfinite(c) for c in (pos.x, pos.y, pos.z)):
            raise BadRow(line_no, "non-finite coordinates")
        if pos.z < 0:
            raise BadRow(line_no, f"altitude {pos.z} below home")
        hold = v[4] if command == CMD_NAV_WAYPOINT else 0.0
        if hold < 0:
            raise BadRow(line_no, f"negative hold time {hold}")
        waypoints.append(Waypoint(
            index=index, command=command, position=pos, hold=hold,
            current=current, frame=frame,
            params=(v[4], v[5], v[6], v[7]),
            raw_xyz=(v[8], v[9], v[10]),
            autocontinue=int(v[11]),
        ))

    mission = Mission(tuple(waypoints), home, source_path, version)
    if not mission.tour:
        raise EmptyMission("mission has no nav waypoints (command 16)")
    return mission


def load_mission(path: str) -> Mission:
    with open(path, encoding="utf-8") as f:
        return parse_mission(f.read(), source_path=path)


def serialize_mission(mission: Mission) -> str:
    lines = [f"{HEADER_MAGIC} {mission.version}"]
    for w in mission.waypoints:
        cols = [w.index, w.current, w.frame, w.command,
                *w.params, *w.raw_xyz, w.autocontinue]
        lines.append("\t".join(repr(c) if isinstance(c, float) else str(c)
                               for c in cols))
    return "\n".join(lines) + "\n"


def cumulative_arcs(tour: tuple[Coord3, ...]) -> list[float]:
    """Arc length from tour start to each tour vertex."""
    arcs = [0.0]
    for a, b in zip(tour, tour[1:]):
        arcs.append(arcs[-1] + a.dist(b))
    return arcs


def tour_length(mission: Mission) -> float:
    return cumulative_arcs(mission.tour)[-1]


def point_at_fraction(mission: Mission, f: float) -> tuple[Coord3, int, int]:
    """Position at arc-length fraction f of the tour polyline.

    Returns (point, next_waypoint_index, last_waypoint_index) where the
    indices bracket the point on the tour, oriented toward the tour end.
    """
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"fraction {f} outside [0, 1]")
    tour = mission.tour
    if len(tour) == 1:
        return tour[0], -1, -1
    arcs = cumulative_arcs(tour)
    total = arcs[-1]
    s = f * total
    for i in range(len(tour) - 1):
        seg = arcs[i + 1] - arcs[i]
        if s <= arcs[i + 1] or i == len(tour) - 2:
            if seg == 0.0:
                continue
            t = (s - arcs[i]) / seg
            if t >= 1.0 and i < len(tour) - 2:
                # landed exactly on an interior vertex: it counts as "last"
                return tour[i + 1], i + 2, i + 1
            t = min(t, 1.0)
            a, b = tour[i], tour[i + 1]
            point = Coord3(a.x + (b.x - a.x) * t,
                           a.y + (b.y - a.y) * t,
                           a.z + (b.z - a.z) * t)
            return point, i + 1, i
    return tour[-1], len(tour) - 1, len(tour) - 2
