"""Deterministic discrete-event core: clock, event queue, seeded random streams.

Simulation time is kept as integer microseconds so that identical runs give
bit-identical event orderings on every platform. Simultaneous events fire in
insertion (FIFO) order.
"""

from __future__ import annotations

import hashlib
import heapq
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

MICROSECONDS = 1_000_000


def usec(seconds: float) -> int:
    """Convert seconds to the integer-microsecond simulation timebase."""
    return round(seconds * MICROSECONDS)


def seconds(t_us: int) -> float:
    return t_us / MICROSECONDS


class PastTime(Exception):
    """Raised when an event is scheduled before the current clock."""


class RngStream:
    """Counter-based random stream derived from (master seed, label).

    Streams with the same (seed, label) always produce the same draw sequence;
    different labels give statistically independent streams. Each call to
    ``Engine.rng_stream`` returns a fresh stream positioned at the start, so
    consumers should obtain their stream once and hold on to it.
    """

    def __init__(self, master_seed: int, label: str):
        self.label = label
        self.seed = master_seed
        digest = hashlib.sha256(f"{master_seed}:{label}".encode()).digest()
        key = int.from_bytes(digest[:16], "little")
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def random(self) -> float:
        """Uniform draw on [0, 1)."""
        return float(self._gen.random())

    def uniform(self, lo: float, hi: float) -> float:
        return float(self._gen.uniform(lo, hi))

    def normal(self, mean: float, std: float) -> float:
        return float(self._gen.normal(mean, std))

    def integers(self, lo: int, hi: int) -> int:
        """Uniform integer on [lo, hi)."""
        return int(self._gen.integers(lo, hi))


@dataclass
class Event:
    fire_at: int                      # microseconds
    sequence: int                     # insertion counter, unique per run
    kind: str                         # timer | packet | control
    target: str                       # "node.module" label, for the log
    fn: Callable[[], None] = field(repr=False, default=lambda: None)


class EventHandle:
    """Cancellation token returned by ``Engine.schedule``."""

    __slots__ = ("event", "cancelled", "fired")

    def __init__(self, event: Event):
        self.event = event
        self.cancelled = False
        self.fired = False


@dataclass
class EngineRunReport:
    events_processed: int
    final_clock: int                  # microseconds


class Engine:
    """Single-threaded event loop owning all simulation state.

    Event dispatch is a total order by (fire_at, sequence). Handlers may call
    ``schedule``/``cancel`` re-entrantly; nothing else in the engine is safe to
    re-enter.
    """

    def __init__(self, master_seed: int = 0, log_events: bool = False):
        self.master_seed = master_seed
        self.now: int = 0
        self._heap: list[tuple[int, int, EventHandle]] = []
        self._sequence = 0
        self._log_events = log_events
        self.event_log: list[tuple[int, int, str, str]] = []
        self.nodes: dict[int, object] = {}          # node-id -> Node
        self._names: dict[str, int] = {}            # node name -> id

    # -- scheduling ---------------------------------------------------------

    def schedule_at(self, fire_at: int, fn: Callable[[], None],
                    kind: str = "timer", target: str = "") -> EventHandle:
        if fire_at < self.now:
            raise PastTime(f"cannot schedule at {fire_at} us, clock is {self.now} us")
        event = Event(fire_at, self._sequence, kind, target, fn)
        self._sequence += 1
        handle = EventHandle(event)
        heapq.heappush(self._heap, (fire_at, event.sequence, handle))
        return handle

    def schedule_in(self, delay: int, fn: Callable[[], None],
                    kind: str = "timer", target: str = "") -> EventHandle:
        return self.schedule_at(self.now + delay, fn, kind, target)

    def cancel(self, handle: EventHandle) -> bool:
        """Remove a pending event. False if it already fired or was cancelled."""
        if handle.cancelled or handle.fired:
            return False
        handle.cancelled = True
        return True

    def run_until(self, t_end: int) -> EngineRunReport:
        """Process every event with fire_at <= t_end in (fire_at, sequence) order.

        If the queue drains early the clock stays at the last event time;
        otherwise it lands exactly on t_end.
        """
        processed = 0
        while self._heap and self._heap[0][0] <= t_end:
            fire_at, _, handle = heapq.heappop(self._heap)
            if handle.cancelled:
                continue
            handle.fired = True
            assert fire_at >= self.now, "event queue went back in time"
            self.now = fire_at
            if self._log_events:
                ev = handle.event
                self.event_log.append((ev.fire_at, ev.sequence, ev.kind, ev.target))
            handle.event.fn()
            processed += 1
        if self._heap:
            self.now = t_end
        return EngineRunReport(events_processed=processed, final_clock=self.now)

    def pending_events(self) -> int:
        return sum(1 for _, _, h in self._heap if not h.cancelled)

    # -- randomness ---------------------------------------------------------

    def rng_stream(self, label: str) -> RngStream:
        return RngStream(self.master_seed, label)

    # -- node registry ------------------------------------------------------

    def add_node(self, node) -> None:
        if node.id in self.nodes:
            raise ValueError(f"duplicate node id {node.id}")
        if node.name in self._names:
            raise ValueError(f"duplicate node name {node.name!r}")
        self.nodes[node.id] = node
        self._names[node.name] = node.id

    def node_by_name(self, name: str):
        node_id = self._names.get(name)
        return self.nodes[node_id] if node_id is not None else None
