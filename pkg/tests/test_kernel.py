import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phcsim.kernel import DAY, Resource, ShiftCalendar, Simulation, SimulationError


def test_same_time_events_fire_in_insertion_order():
    sim, fired = Simulation(), []
    sim.schedule(0.0, fired.append, "A")
    sim.schedule(0.0, fired.append, "B")
    sim.run()
    assert fired == ["A", "B"]


def test_events_fire_in_time_order():
    sim, fired = Simulation(), []
    sim.schedule(10, fired.append, "X")
    sim.schedule(5, fired.append, "Y")
    sim.run()
    assert fired == ["Y", "X"]


def test_scheduling_in_the_past_rejected():
    sim = Simulation()
    sim.schedule(7, lambda: None)
    sim.run()
    assert sim.now == 7
    with pytest.raises(SimulationError):
        sim.schedule(6, lambda: None)


def test_cancelled_event_does_not_fire():
    sim, fired = Simulation(), []
    ev = sim.schedule(1, fired.append, 1)
    ev.cancel()
    sim.run()
    assert fired == []


@given(st.lists(st.floats(0, 1000, allow_nan=False), max_size=60))
def test_calendar_dequeues_in_time_then_sequence_order(times):
    sim, fired = Simulation(), []
    for i, t in enumerate(times):
        sim.schedule(t, fired.append, (t, i))
    sim.run()
    assert fired == sorted(fired)


class Ent:
    def __init__(self, id):
        self.id = id


def test_seize_idle_and_queue_fifo():
    sim = Simulation()
    r = Resource(sim, "bed", 1)
    p0, p1, e = Ent(0), Ent(1), Ent(2)
    assert r.request(p0).granted and r.busy_units == 1
    q1, qe = r.request(p1), r.request(e)
    assert not q1.granted and [q.entity for q in r.waiting] == [p1, e]
    nxt = r.release(p0)
    assert nxt is q1 and q1.granted and r.busy_units == 1
    assert [q.entity for q in r.waiting] == [e]


def test_seize_with_spare_capacity():
    sim = Simulation()
    r = Resource(sim, "ipd", 6)
    for i in range(3):
        r.request(Ent(i))
    assert r.request(Ent(9)).granted and r.busy_units == 4


def test_release_empty_queue_and_non_holder():
    sim = Simulation()
    r = Resource(sim, "bed", 1)
    p = Ent(1)
    r.request(p)
    assert r.release(p) is None and r.busy_units == 0
    with pytest.raises(SimulationError):
        r.release(Ent(2))
    with pytest.raises(SimulationError):
        r.release(p)


def test_double_seize_rejected():
    sim = Simulation()
    r = Resource(sim, "ipd", 2)
    p = Ent(1)
    r.request(p)
    with pytest.raises(SimulationError):
        r.request(p)


def test_busy_integral_and_occupancy():
    sim = Simulation()
    r = Resource(sim, "bed", 1)
    p = Ent(1)
    sim.schedule(0, r.request, p)
    sim.schedule(50, r.release, p)
    sim.run(100)
    assert r.occupancy() == 0.5


def _user(sim, res, ent, hold, log):
    req = yield res.request(ent)
    log.append((sim.now, ent.id))
    yield hold
    res.release(ent)


@given(st.lists(st.tuples(st.floats(0, 200), st.floats(0.5, 30)), min_size=1, max_size=25),
       st.integers(1, 3))
@settings(max_examples=60)
def test_grant_order_equals_join_order(jobs, cap):
    sim = Simulation()
    res = Resource(sim, "r", cap)
    log = []
    for i, (t, hold) in enumerate(jobs):
        sim.process(_user(sim, res, Ent(i), hold, log), at=t)
    sim.run()
    joins = sorted(range(len(jobs)), key=lambda i: (jobs[i][0], i))
    assert [i for _, i in log] == joins
    assert 0 <= res.busy_units <= cap and not res.waiting


def test_opd_window_membership():
    cal = ShiftCalendar()
    assert cal.is_opd_open(500)
    assert not cal.is_opd_open(1000)
    assert cal.is_opd_open(1940)
    assert cal.is_opd_open(480) and not cal.is_opd_open(960)


def test_calendar_validation():
    with pytest.raises(ValueError):
        ShiftCalendar(480, 900)
    with pytest.raises(ValueError):
        ShiftCalendar(shift_starts=(480, 960))
    assert ShiftCalendar().shift_of(1000) == 2 and ShiftCalendar().shift_of(10) == 0


@given(st.floats(0, 5 * DAY), st.floats(0, 3 * DAY))
def test_open_minutes_matches_minute_stepping(t0, length):
    cal = ShiftCalendar()
    t0, t1 = math.floor(t0), math.floor(t0) + math.floor(length)
    brute = sum(cal.is_opd_open(m) for m in range(t0, t1))
    assert cal.open_minutes(t0, t1) == brute


@given(st.floats(0, 5 * DAY), st.floats(0, 2000))
def test_advance_open_consumes_open_time(t, minutes):
    cal = ShiftCalendar()
    end = cal.advance_open(t, minutes)
    assert cal.is_opd_open(end)
    assert cal.open_minutes(t, end) == pytest.approx(minutes, abs=1e-6)


def test_gated_resource_waits_for_opening():
    sim = Simulation()
    cal = ShiftCalendar()
    doc = Resource(sim, "doctor", 1, cal)
    log = []
    sim.process(_user(sim, doc, Ent(1), 60, log), at=100)
    sim.process(_user(sim, doc, Ent(2), 60, log), at=950)
    sim.run(3 * DAY)
    assert log == [(480, 1), (950, 2)]
    # busy 60 min on day 0 from 480 and 10 open minutes on day 0 from 950, plus none overnight
    assert doc.busy_integral() == 70


def test_withdraw_resumes_process_ungranted():
    sim = Simulation()
    r = Resource(sim, "r", 1)
    r.request(Ent(0))
    seen = []

    def proc():
        req = yield r.request(Ent(1))
        seen.append((sim.now, req.granted, req.withdrawn))

    sim.process(proc())
    sim.run(1)
    r.withdraw(r.waiting[0])
    sim.run(2)
    assert seen == [(1, False, True)]
