import math
from dataclasses import replace

import pytest

from phcsim import PHC1, PHC2, Phc, PhcConfig, ScenarioConfig, ServiceDistribution as Dist, simulate
from phcsim.facility import PatientClass
from phcsim.kernel import DAY, ShiftCalendar, Simulation, StreamFactory
from phcsim.predictors import LabourRoomState


def make_phc(cfg=PHC1, seed=0, keep_all=True):
    sim = Simulation(trace=True)
    phc = Phc(sim, 0, cfg, ShiftCalendar(), StreamFactory(seed), keep_all=keep_all)
    return sim, phc


def test_table_defaults():
    tup = lambda c: (c.ia_outpatient, c.ia_childbirth, c.ia_inpatient, c.n_doctors,
                     c.n_staff_nurse_per_shift, c.n_labour_beds, c.n_ipd_beds)
    assert tup(PHC1) == (4, 1440, 2880, 1, 1, 1, 6)
    assert tup(PHC2) == (4, 720, 2880, 1, 1, 1, 6)
    assert PHC1.labour == Dist.uniform(360, 600)
    assert PHC1.post_labour_stay == Dist.uniform(1440, 2880)
    assert PHC1.labour_load == pytest.approx(1 / 3) and PHC2.labour_load == pytest.approx(2 / 3)


@pytest.mark.parametrize("kw", [{"ia_childbirth": -1}, {"n_ipd_beds": 0}, {"p_lab": 1.5},
                                {"n_labour_beds": 2}, {"labour": (360, 600)}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        replace(PHC1, **kw)


def test_config_dict_round_trip():
    assert PhcConfig.from_dict(PHC2.to_dict()) == PHC2
    with pytest.raises(ValueError):
        PhcConfig.from_dict({"beds": 3})


def test_outpatient_paths():
    sim, phc = make_phc()
    phc.start()
    sim.run(3 * DAY)
    done = [p for p in phc.others if p.exit_at is not None and p.cls.value.startswith("outpatient")]
    assert done
    for p in done:
        names = [v.split(".")[1] for v in p.visits]
        if p.cls is PatientClass.OUTPATIENT_30PLUS:
            assert names[:2] == ["opd_nurse", "doctor"]
        else:
            assert names[0] == "doctor"
        assert names[-1] == "pharmacy"
        assert ("lab" in names) == p.needs_lab
        assert ShiftCalendar().is_opd_open(p.created_at)


def test_no_lab_when_probability_zero():
    sim, phc = make_phc(replace(PHC1, p_lab=0.0))
    phc.start()
    sim.run(2 * DAY)
    assert phc.others and all("phc0.lab" not in p.visits for p in phc.others)


def test_outpatient_under30_idle_resources_no_wait():
    sim, phc = make_phc(replace(PHC1, ia_outpatient=None, ia_inpatient=None, ia_childbirth=None,
                                p_age_30plus=0.0, p_lab=1.0))
    sim.schedule(500, phc._new_outpatient)
    sim.run(DAY)
    (p,) = phc.others
    assert p.exit_at == pytest.approx(500 + p.service + p.lab_time + p.pharmacy_time)


def quiet(**kw):
    return replace(PHC1, ia_outpatient=None, ia_inpatient=None, ia_childbirth=None, **kw)


def test_inpatient_doctor_in_opd_nurse_at_midnight():
    sim, phc = make_phc(quiet())
    sim.schedule(480, phc._new_inpatient)
    sim.schedule(DAY, phc._new_inpatient)
    sim.run(4 * DAY)
    day, night = phc.others
    assert day.assessed_by == "doctor" and day.visits[0] == "phc0.doctor"
    assert night.assessed_by == "staff_nurse" and "phc0.doctor" not in night.visits


def test_ipd_beds_queue_fifo():
    sim, phc = make_phc(quiet(inpatient_stay=Dist.deterministic(600), inpatient_assessment=Dist.deterministic(0)))
    for i in range(8):
        sim.schedule(i, phc._new_inpatient)
    sim.run(5 * DAY)
    grants = [e for e in sim.trace if e[1] == "grant" and e[2] == "phc0.ipd_beds"]
    assert [g[3] for g in grants] == sorted(g[3] for g in grants)
    assert [g[0] for g in grants[6:]] == [600, 601]


def test_waiting_childbirth_moves_to_nurse_at_closing():
    sim, phc = make_phc(quiet(childbirth_assessment=Dist.deterministic(10)))
    # an outpatient occupies the doctor across closing time
    phc.config = replace(phc.config, doctor_consult=Dist.deterministic(100))
    sim.schedule(900, phc._new_outpatient)
    sim.schedule(950, phc._new_childbirth)
    sim.run(2 * DAY)
    (cb,) = phc.childbirth
    assert cb.assessed_by == "staff_nurse" and cb.decision_at == 970


def labour_cfg(**kw):
    base = dict(childbirth_assessment=Dist.deterministic(0), labour=Dist.deterministic(100),
                post_labour_stay=Dist.deterministic(1000))
    base.update(kw)
    return quiet(**base)


def test_idle_bed_zero_wait_and_fifo_third():
    sim, phc = make_phc(labour_cfg())
    for t in (0, 1, 2):
        sim.schedule(t, phc._new_childbirth)
    sim.run(3 * DAY)
    a, b, c = phc.childbirth
    assert a.realized_wait == 0
    assert c.labour_admit_at == 200 and c.realized_wait == 198
    assert b.labour_admit_at == a.labour_end_at and c.labour_admit_at == b.labour_end_at


def test_blocking_hold_with_seven_overlapping_births():
    # Eight births at t=0; bed serves 100 min each; 6 IPD beds hold 1000 min each.
    # Births 1..6 get IPD beds at 100..600. Birth 7 finishes at 700 but keeps the
    # labour bed until birth 1 leaves IPD at 1100; birth 8 is admitted then and
    # takes the bed birth 2 frees at 1200, exactly when its labour ends.
    sim, phc = make_phc(labour_cfg(hold_labour_bed=True))
    for _ in range(8):
        sim.schedule(0, phc._new_childbirth)
    sim.run(5 * DAY)
    ps = phc.childbirth
    assert [p.labour_admit_at for p in ps] == [0, 100, 200, 300, 400, 500, 600, 1100]
    seventh = ps[6]
    assert seventh.labour_end_at == 700 and seventh.labour_release_at == 1100
    assert seventh.exit_at == 2100
    assert ps[7].labour_end_at == 1200 and ps[7].labour_release_at == 1200


def test_without_hold_labour_bed_frees_at_completion():
    sim, phc = make_phc(labour_cfg())
    for _ in range(8):
        sim.schedule(0, phc._new_childbirth)
    sim.run(5 * DAY)
    assert [p.labour_admit_at for p in phc.childbirth] == [0, 100, 200, 300, 400, 500, 600, 700]
    assert phc.childbirth[6].exit_at == 2100


def test_labour_snapshot_examples():
    sim, phc = make_phc(labour_cfg(labour=Dist.deterministic(500)))
    assert phc.labour_snapshot() == LabourRoomState()
    sim.schedule(0, phc._new_childbirth)
    sim.run(50)
    phc.config = replace(phc.config, labour=Dist.deterministic(400))
    sim.schedule(50, phc._new_childbirth)
    sim.run(100)
    s = phc.labour_snapshot()
    assert (s.busy, s.t_e, s.queue_len) == (True, 100, 1)
    assert s.actual_remaining == 400 and s.queued_services == (400,)


def test_conservation_after_drain():
    sim, phc = make_phc(PHC2)
    for i in range(40):
        sim.schedule(i * 37.0, phc._new_outpatient)
        sim.schedule(i * 180.0, phc._new_childbirth)
        sim.schedule(i * 300.0, phc._new_inpatient)
    sim.run(40 * DAY)
    assert sum(phc.created.values()) == sum(phc.exited.values()) == 120
    assert phc.in_system() == 0


def test_timestamps_monotone_and_labour_fifo(short_cfg):
    run = simulate(short_cfg, "none", 0)
    for p in run.patients:
        stamps = [p.created_at, p.decision_at, p.labour_queue_join_at, p.labour_admit_at,
                  p.labour_end_at, p.exit_at]
        known = [s for s in stamps if s is not None]
        assert known == sorted(known)
    for f in (0, 1):
        served = [p for p in run.patients if p.served == f and p.labour_admit_at is not None]
        by_join = sorted(served, key=lambda p: (p.labour_queue_join_at, p.id))
        assert [p.labour_admit_at for p in by_join] == sorted(p.labour_admit_at for p in by_join)


def test_doctor_never_granted_outside_opd(short_cfg):
    run = simulate(replace(short_cfg, warmup_days=0, horizon_days=20), "est", 0, trace=True)
    cal = ShiftCalendar()
    grants = [e for e in run.trace if e[1] == "grant" and e[2].endswith(".doctor")]
    assert grants and all(cal.is_opd_open(t) for t, *_ in grants)


def test_childbirth_arrivals_are_poisson_counts():
    cfg = ScenarioConfig(warmup_days=0, horizon_days=730, facilities=(PHC1.isolated(), PHC2.isolated()))
    run = simulate(cfg, "none", 0)
    horizon = 730 * DAY
    for f, ia in ((0, 1440), (1, 720)):
        n = sum(p.origin == f for p in run.patients)
        mean = horizon / ia
        assert abs(n - mean) < 3 * math.sqrt(mean)


def test_isolated_mode_skips_assessment_and_ipd():
    cfg = PHC1.isolated()
    assert cfg.ia_outpatient is None and cfg.n_ipd_beds is None and cfg.isolated_labour
    sim, phc = make_phc(cfg)
    phc.start()
    sim.run(30 * DAY)
    assert all(p.decision_at == p.created_at for p in phc.childbirth)
    assert phc.ipd_beds.grants == 0 and phc.doctor.grants == 0
