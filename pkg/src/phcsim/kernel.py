"""Deterministic discrete-event kernel.

Processes are plain generators. A process yields either a non-negative
number (hold for that many minutes) or a :class:`Request` returned by
:meth:`Resource.request`; it resumes once the request is granted or
withdrawn. Simultaneous events fire in scheduling order.
"""

from __future__ import annotations

import heapq
import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator

import numpy as np

from .distributions import ServiceDistribution

DAY = 1440.0

# Order is part of the seed-splitting rule; append only.
STREAMS = (
    "outpatient_arrival",
    "outpatient_age",
    "outpatient_lab",
    "doctor_consult",
    "opd_nurse_check",
    "lab",
    "pharmacy",
    "inpatient_arrival",
    "inpatient_assessment",
    "inpatient_stay",
    "childbirth_arrival",
    "childbirth_assessment",
    "labour",
    "post_labour_stay",
)


class SimulationError(RuntimeError):
    """Raised on kernel misuse: scheduling in the past, bad releases."""


@dataclass(eq=False, slots=True)
class Event:
    time: float
    seq: int
    action: Callable
    args: tuple = ()
    cancelled: bool = False

    def cancel(self):
        self.cancelled = True


class Simulation:
    """Clock plus event calendar. One instance per replication; not thread-safe."""

    def __init__(self, trace: bool = False):
        self.now = 0.0
        self._heap: list = []
        self._seq = itertools.count()
        self.trace: list | None = [] if trace else None

    def schedule(self, t: float, action: Callable, *args) -> Event:
        if t < self.now:
            raise SimulationError(f"cannot schedule at {t} before clock {self.now}")
        ev = Event(t, next(self._seq), action, args)
        heapq.heappush(self._heap, (t, ev.seq, ev))
        return ev

    def process(self, gen: Iterator, at: float | None = None) -> Process:
        """Start a generator process now, or at time ``at``."""
        proc = Process(self, gen)
        self.schedule(self.now if at is None else at, proc._step, None)
        return proc

    def peek(self) -> float:
        return self._heap[0][0] if self._heap else math.inf

    def run(self, until: float = math.inf):
        """Fire events with time <= ``until``; the clock ends at ``until`` if finite."""
        heap = self._heap
        while heap and heap[0][0] <= until:
            t, _, ev = heapq.heappop(heap)
            if ev.cancelled:
                continue
            self.now = t
            ev.action(*ev.args)
        if until != math.inf and until > self.now:
            self.now = until

    def record(self, kind: str, *data):
        if self.trace is not None:
            self.trace.append((self.now, kind) + data)


class Process:
    __slots__ = ("sim", "gen", "done")

    def __init__(self, sim: Simulation, gen: Iterator):
        self.sim = sim
        self.gen = gen
        self.done = False

    def _step(self, value: Any):
        sim = self.sim
        while True:
            try:
                item = self.gen.send(value)
            except StopIteration:
                self.done = True
                return
            if isinstance(item, Request):
                if item.granted:
                    value = item
                    continue
                item.process = self
                return
            if item < 0:
                raise SimulationError(f"negative hold {item}")
            sim.schedule(sim.now + item, self._step, None)
            return

    def resume(self, value: Any):
        self.sim.schedule(self.sim.now, self._step, value)


@dataclass(eq=False, slots=True)
class Request:
    resource: Resource
    entity: Any
    joined_at: float
    granted: bool = False
    granted_at: float | None = None
    withdrawn: bool = False
    process: Process | None = None


class ShiftCalendar:
    """Daily OPD window and nurse shift boundaries, as minute offsets in a day."""

    def __init__(self, opd_open: float = 480.0, opd_close: float = 960.0,
                 shift_starts: tuple = (0.0, 480.0, 960.0)):
        if not 0 <= opd_open < opd_close <= DAY:
            raise ValueError(f"OPD window [{opd_open}, {opd_close}) must lie inside one day")
        if opd_close - opd_open != 480:
            raise ValueError("OPD window must be 480 minutes long")
        starts = tuple(float(s) for s in shift_starts)
        if not starts or starts[0] != 0 or list(starts) != sorted(set(starts)) or starts[-1] >= DAY:
            raise ValueError("shift starts must be increasing offsets beginning at 0")
        self.opd_open = float(opd_open)
        self.opd_close = float(opd_close)
        self.shift_starts = starts

    @property
    def opd_length(self) -> float:
        return self.opd_close - self.opd_open

    def is_opd_open(self, t: float) -> bool:
        return self.opd_open <= t % DAY < self.opd_close

    def shift_of(self, t: float) -> int:
        off = t % DAY
        idx = 0
        for i, s in enumerate(self.shift_starts):
            if off >= s:
                idx = i
        return idx

    def next_open(self, t: float) -> float:
        """Earliest opening instant >= t."""
        day = math.floor(t / DAY)
        start = day * DAY + self.opd_open
        return start if start >= t else start + DAY

    def next_close(self, t: float) -> float:
        """Earliest closing instant > t."""
        day = math.floor(t / DAY)
        end = day * DAY + self.opd_close
        return end if end > t else end + DAY

    def _open_before(self, t: float) -> float:
        day = math.floor(t / DAY)
        off = t - day * DAY
        return day * self.opd_length + min(max(off - self.opd_open, 0.0), self.opd_length)

    def open_minutes(self, t0: float, t1: float) -> float:
        """Minutes of [t0, t1) during which the OPD is open."""
        if t1 <= t0:
            return 0.0
        return self._open_before(t1) - self._open_before(t0)

    def advance_open(self, t: float, minutes: float) -> float:
        """Instant at which ``minutes`` of OPD-open time have elapsed after ``t``."""
        if not self.is_opd_open(t):
            t = self.next_open(t)
        while True:
            close = self.next_close(t)
            if minutes < close - t:
                return t + minutes
            minutes -= close - t
            t = self.next_open(close)

    def to_dict(self) -> dict:
        return {"opd_open": self.opd_open, "opd_close": self.opd_close,
                "shift_starts": list(self.shift_starts)}


class Resource:
    """Multi-unit resource with a FIFO wait queue and a busy-time integral.

    With a ``calendar``, units are granted only while the OPD is open and the
    busy integral counts open time only.
    """

    def __init__(self, sim: Simulation, name: str, capacity: int,
                 calendar: ShiftCalendar | None = None):
        if int(capacity) != capacity or capacity < 1:
            raise ValueError(f"{name}: capacity must be a positive integer")
        self.sim = sim
        self.name = name
        self.capacity = int(capacity)
        self.calendar = calendar
        self.busy_units = 0
        self.waiting: deque[Request] = deque()
        self.holders: dict[Any, Request] = {}
        self.busy_time = 0.0
        self._last = sim.now
        self._stats_from = sim.now
        self.grants = 0
        if calendar is not None:
            sim.schedule(calendar.next_open(sim.now), self._on_open)

    def _accumulate(self):
        now = self.sim.now
        if self.busy_units:
            if self.calendar is None:
                self.busy_time += self.busy_units * (now - self._last)
            else:
                self.busy_time += self.busy_units * self.calendar.open_minutes(self._last, now)
        self._last = now

    def reset_stats(self):
        self._accumulate()
        self.busy_time = 0.0
        self._stats_from = self.sim.now

    def busy_integral(self) -> float:
        self._accumulate()
        return self.busy_time

    def available_minutes(self, t0: float, t1: float) -> float:
        if self.calendar is None:
            return max(t1 - t0, 0.0)
        return self.calendar.open_minutes(t0, t1)

    def occupancy(self) -> float:
        """Busy fraction since the last stats reset."""
        window = self.available_minutes(self._stats_from, self.sim.now)
        if window <= 0:
            raise ValueError(f"{self.name}: empty observation window")
        return self.busy_integral() / (self.capacity * window)

    def is_available(self) -> bool:
        return self.calendar is None or self.calendar.is_opd_open(self.sim.now)

    def _grant(self, req: Request):
        self.holders[req.entity] = req
        req.granted = True
        req.granted_at = self.sim.now
        self.grants += 1
        if self.sim.trace is not None:
            self.sim.record("grant", self.name, getattr(req.entity, "id", None))

    def request(self, entity) -> Request:
        if entity in self.holders:
            raise SimulationError(f"{self.name}: entity already holds this resource")
        sim = self.sim
        req = Request(self, entity, sim.now)
        if sim.trace is not None:
            sim.record("request", self.name, getattr(entity, "id", None))
        if self.busy_units < self.capacity and not self.waiting and self.is_available():
            self._accumulate()
            self.busy_units += 1
            self._grant(req)
        else:
            self.waiting.append(req)
        return req

    def release(self, entity) -> Request | None:
        """Free the unit held by ``entity``; hands it to the queue head if allowed."""
        req = self.holders.pop(entity, None)
        if req is None:
            raise SimulationError(f"{self.name}: release by an entity that holds no unit")
        if self.sim.trace is not None:
            self.sim.record("release", self.name, getattr(entity, "id", None))
        if self.waiting and self.is_available():
            nxt = self.waiting.popleft()
            self._grant(nxt)
            if nxt.process is not None:
                nxt.process.resume(nxt)
            return nxt
        self._accumulate()
        self.busy_units -= 1
        return None

    def withdraw(self, req: Request):
        """Remove a still-waiting request and resume its process ungranted."""
        self.waiting.remove(req)
        req.withdrawn = True
        self.sim.record("withdraw", self.name, getattr(req.entity, "id", None))
        if req.process is not None:
            req.process.resume(req)

    def _on_open(self):
        self._accumulate()
        while self.waiting and self.busy_units < self.capacity:
            nxt = self.waiting.popleft()
            self.busy_units += 1
            self._grant(nxt)
            if nxt.process is not None:
                nxt.process.resume(nxt)
        self.sim.schedule(self.sim.now + DAY, self._on_open)

    @property
    def queue_length(self) -> int:
        return len(self.waiting)


class RandomStream:
    """One independently seeded uniform source; variates via inverse CDF."""

    _BATCH = 512

    def __init__(self, name: str, seed_seq: np.random.SeedSequence):
        self.name = name
        self.seed = seed_seq
        self._gen = np.random.Generator(np.random.PCG64(seed_seq))
        self._buf = np.empty(0)
        self._pos = 0

    def uniform(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self._gen.random(self._BATCH)
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return float(u)

    def sample(self, dist: ServiceDistribution) -> float:
        if dist.kind == "deterministic":
            return dist.a
        return dist.ppf(self.uniform())

    def bernoulli(self, p: float) -> bool:
        return self.uniform() < p


@dataclass
class StreamFactory:
    """Derives per-(replication, facility, process) streams from a master seed.

    The stream for process ``name`` at facility ``f`` in replication ``r`` is
    seeded by ``SeedSequence(master_seed, spawn_key=(r, f, STREAMS.index(name)))``.
    """

    master_seed: int
    replication: int = 0
    _cache: dict = field(default_factory=dict, repr=False)

    def stream(self, facility: int, name: str) -> RandomStream:
        key = (facility, name)
        if key not in self._cache:
            ss = np.random.SeedSequence(self.master_seed,
                                        spawn_key=(self.replication, facility, STREAMS.index(name)))
            self._cache[key] = RandomStream(f"{facility}:{name}", ss)
        return self._cache[key]
