"""Patient flow through one primary health center.

Outpatients (OPD hours only), inpatients and childbirth patients (24/7)
share a doctor who works OPD hours only, a staff nurse on every shift,
inpatient (IPD) beds and one labour bed. Every random attribute of a
patient is drawn at creation from the origin facility's own streams, so
two runs with the same seed see the same patients whatever the routing.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum

from .distributions import ServiceDistribution as Dist
from .kernel import Resource, ShiftCalendar, Simulation, StreamFactory
from .predictors import MODES, LabourRoomState, predict

UNLIMITED = 10**9


class PatientClass(str, Enum):
    OUTPATIENT_UNDER30 = "outpatient_under30"
    OUTPATIENT_30PLUS = "outpatient_30plus"
    INPATIENT = "inpatient"
    CHILDBIRTH = "childbirth"


@dataclass(eq=False)
class Patient:
    id: int
    cls: PatientClass
    origin: int
    created_at: float
    served: int | None = None
    # drawn at creation
    assessment: float = 0.0
    service: float = 0.0
    stay: float = 0.0
    needs_lab: bool = False
    nurse_check: float = 0.0
    lab_time: float = 0.0
    pharmacy_time: float = 0.0
    # childbirth timeline
    decision_at: float | None = None
    labour_queue_join_at: float | None = None
    labour_admit_at: float | None = None
    labour_end_at: float | None = None
    labour_release_at: float | None = None
    exit_at: float | None = None
    diverted: bool = False
    assessed_by: str | None = None
    join_predictions: dict = field(default_factory=dict)
    decision: object = None
    visits: list = field(default_factory=list)

    @property
    def realized_wait(self) -> float | None:
        """Decision instant to labour admission; travel of a diverted patient counts."""
        if self.labour_admit_at is None:
            return None
        return self.labour_admit_at - self.decision_at

    @property
    def realized_wait_excl_travel(self) -> float | None:
        if self.labour_admit_at is None:
            return None
        return self.labour_admit_at - self.labour_queue_join_at


_DIST_FIELDS = (
    "doctor_consult", "opd_nurse_check", "lab", "pharmacy", "inpatient_assessment",
    "childbirth_assessment", "labour", "post_labour_stay", "inpatient_stay",
)


@dataclass(frozen=True)
class PhcConfig:
    """Parameters of one PHC; times in minutes.

    The first seven fields follow the facility tuple outpatient load /
    childbirth load / inpatient load / doctors / staff nurses per shift /
    labour beds / IPD beds, with loads read as mean interarrival minutes.
    A load of ``None`` switches that arrival stream off.
    """

    ia_outpatient: float | None = 4.0
    ia_childbirth: float | None = 1440.0
    ia_inpatient: float | None = 2880.0
    n_doctors: int = 1
    n_staff_nurse_per_shift: int = 1
    n_labour_beds: int = 1
    n_ipd_beds: int | None = 6
    doctor_consult: Dist = Dist.uniform(2, 5)
    opd_nurse_check: Dist = Dist.uniform(2, 5)
    lab: Dist = Dist.uniform(5, 10)
    pharmacy: Dist = Dist.uniform(1, 3)
    inpatient_assessment: Dist = Dist.deterministic(10)
    childbirth_assessment: Dist = Dist.deterministic(10)
    labour: Dist = Dist.uniform(360, 600)
    post_labour_stay: Dist = Dist.uniform(1440, 2880)
    inpatient_stay: Dist = Dist.uniform(240, 1440)
    p_age_30plus: float = 0.5
    p_lab: float = 0.3
    hold_labour_bed: bool = False
    isolated_labour: bool = False

    def __post_init__(self):
        for name in ("ia_outpatient", "ia_childbirth", "ia_inpatient"):
            v = getattr(self, name)
            if v is not None and not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be a positive mean interarrival time, got {v}")
        for name in ("n_doctors", "n_staff_nurse_per_shift", "n_labour_beds", "n_ipd_beds"):
            v = getattr(self, name)
            if name == "n_ipd_beds" and v is None:
                continue
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if self.n_labour_beds != 1:
            raise ValueError("the labour room model supports exactly one labour bed")
        for name in ("p_age_30plus", "p_lab"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must be a probability, got {v}")
        for name in _DIST_FIELDS:
            if not isinstance(getattr(self, name), Dist):
                raise ValueError(f"{name} must be a ServiceDistribution")

    @property
    def labour_load(self) -> float:
        """Offered load of the labour bed, E[S] / mean interarrival."""
        if self.ia_childbirth is None:
            return 0.0
        return self.labour.mean / self.ia_childbirth

    def isolated(self) -> PhcConfig:
        """The labour bed alone: childbirth arrivals only, no assessment, no IPD limit."""
        return replace(self, ia_outpatient=None, ia_inpatient=None,
                       childbirth_assessment=Dist.deterministic(0), n_ipd_beds=None,
                       isolated_labour=True)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.to_dict() if isinstance(v, Dist) else v
        return out

    @classmethod
    def from_dict(cls, d: dict, base: PhcConfig | None = None) -> PhcConfig:
        base = base or cls()
        known = {f.name for f in fields(cls)}
        kw = {}
        for key, v in d.items():
            if key not in known:
                raise ValueError(f"unknown facility field {key!r}")
            kw[key] = Dist.from_dict(v) if key in _DIST_FIELDS else v
        return replace(base, **kw)


PHC1 = PhcConfig()
PHC2 = PhcConfig(ia_childbirth=720.0)


class Phc:
    """One facility wired onto a simulation.

    ``router`` is consulted once per childbirth patient after assessment;
    it returns ``(facility, travel_minutes)``. Without one, patients stay.
    """

    def __init__(self, sim: Simulation, index: int, config: PhcConfig,
                 calendar: ShiftCalendar, streams: StreamFactory, ids=None,
                 keep_all: bool = False):
        self.sim = sim
        self.index = index
        self.config = config
        self.calendar = calendar
        self.streams = streams
        self.ids = ids if ids is not None else itertools.count(1)
        self.keep_all = keep_all
        self.router = None
        self._streams = {}

        self.doctor = Resource(sim, f"phc{index}.doctor", config.n_doctors, calendar)
        self.opd_nurse = Resource(sim, f"phc{index}.opd_nurse", 1)
        self.staff_nurse = Resource(sim, f"phc{index}.staff_nurse", config.n_staff_nurse_per_shift)
        self.lab = Resource(sim, f"phc{index}.lab", 1)
        self.pharmacy = Resource(sim, f"phc{index}.pharmacy", 1)
        self.ipd_beds = Resource(sim, f"phc{index}.ipd_beds", config.n_ipd_beds or UNLIMITED)
        self.labour_bed = Resource(sim, f"phc{index}.labour_bed", config.n_labour_beds)

        self.childbirth: list[Patient] = []
        self.others: list[Patient] = []
        self.created = dict.fromkeys(PatientClass, 0)
        self.exited = dict.fromkeys(PatientClass, 0)
        sim.schedule(calendar.next_close(sim.now), self._on_opd_close)

    def _stream(self, name):
        s = self._streams.get(name)
        if s is None:
            s = self._streams[name] = self.streams.stream(self.index, name)
        return s

    # -- arrivals --------------------------------------------------------

    def start(self):
        cfg = self.config
        if cfg.ia_outpatient is not None:
            self.sim.process(self._outpatient_arrivals())
        if cfg.ia_inpatient is not None:
            self.sim.process(self._poisson(cfg.ia_inpatient, "inpatient_arrival", self._new_inpatient))
        if cfg.ia_childbirth is not None:
            self.sim.process(self._poisson(cfg.ia_childbirth, "childbirth_arrival", self._new_childbirth))

    def _poisson(self, mean, stream_name, make):
        stream = self._stream(stream_name)
        law = Dist.exponential(mean)
        while True:
            yield stream.sample(law)
            make()

    def _outpatient_arrivals(self):
        stream = self._stream("outpatient_arrival")
        law = Dist.exponential(self.config.ia_outpatient)
        while True:
            t = self.calendar.advance_open(self.sim.now, stream.sample(law))
            yield t - self.sim.now
            self._new_outpatient()

    def _patient(self, cls):
        p = Patient(next(self.ids), cls, self.index, self.sim.now)
        self.created[cls] += 1
        return p

    def _new_outpatient(self):
        cfg = self.config
        older = self._stream("outpatient_age").bernoulli(cfg.p_age_30plus)
        p = self._patient(PatientClass.OUTPATIENT_30PLUS if older else PatientClass.OUTPATIENT_UNDER30)
        p.nurse_check = self._stream("opd_nurse_check").sample(cfg.opd_nurse_check)
        p.service = self._stream("doctor_consult").sample(cfg.doctor_consult)
        p.needs_lab = self._stream("outpatient_lab").bernoulli(cfg.p_lab)
        p.lab_time = self._stream("lab").sample(cfg.lab)
        p.pharmacy_time = self._stream("pharmacy").sample(cfg.pharmacy)
        if self.keep_all:
            self.others.append(p)
        self.sim.process(self.outpatient_process(p))

    def _new_inpatient(self):
        cfg = self.config
        p = self._patient(PatientClass.INPATIENT)
        p.assessment = self._stream("inpatient_assessment").sample(cfg.inpatient_assessment)
        p.stay = self._stream("inpatient_stay").sample(cfg.inpatient_stay)
        if self.keep_all:
            self.others.append(p)
        self.sim.process(self.inpatient_process(p))

    def _new_childbirth(self):
        cfg = self.config
        p = self._patient(PatientClass.CHILDBIRTH)
        p.assessment = self._stream("childbirth_assessment").sample(cfg.childbirth_assessment)
        p.service = self._stream("labour").sample(cfg.labour)
        p.stay = self._stream("post_labour_stay").sample(cfg.post_labour_stay)
        self.childbirth.append(p)
        self.sim.process(self.childbirth_process(p))
        return p

    def _on_opd_close(self):
        # Inpatients and childbirth patients still waiting for the doctor go to the staff nurse.
        for req in list(self.doctor.waiting):
            if req.entity.cls in (PatientClass.INPATIENT, PatientClass.CHILDBIRTH):
                self.doctor.withdraw(req)
        self.sim.schedule(self.calendar.next_close(self.sim.now), self._on_opd_close)

    # -- processes -------------------------------------------------------

    def _use(self, res, p, minutes):
        req = yield res.request(p)
        if req.withdrawn:
            return False
        p.visits.append(res.name)
        yield minutes
        res.release(p)
        return True

    def _exit(self, p):
        p.exit_at = self.sim.now
        self.exited[p.cls] += 1

    def outpatient_process(self, p: Patient):
        if p.cls is PatientClass.OUTPATIENT_30PLUS:
            yield from self._use(self.opd_nurse, p, p.nurse_check)
        yield from self._use(self.doctor, p, p.service)
        if p.needs_lab:
            yield from self._use(self.lab, p, p.lab_time)
        yield from self._use(self.pharmacy, p, p.pharmacy_time)
        self._exit(p)

    def _assess(self, p: Patient):
        seen = False
        if self.calendar.is_opd_open(self.sim.now):
            seen = yield from self._use(self.doctor, p, p.assessment)
            if seen:
                p.assessed_by = "doctor"
        if not seen:
            yield from self._use(self.staff_nurse, p, p.assessment)
            p.assessed_by = "staff_nurse"

    def inpatient_process(self, p: Patient):
        yield from self._assess(p)
        yield from self._use(self.ipd_beds, p, p.stay)
        self._exit(p)

    def childbirth_process(self, p: Patient):
        if not self.config.isolated_labour:
            yield from self._assess(p)
        p.decision_at = self.sim.now
        target, travel = self, 0.0
        if self.router is not None:
            target, travel = self.router.route(p, self)
        if travel > 0:
            yield travel
        yield from target.labour_stage(p)

    def labour_stage(self, p: Patient):
        """Labour-queue join through discharge at this facility."""
        sim = self.sim
        p.served = self.index
        p.labour_queue_join_at = sim.now
        state = self.labour_snapshot()
        cfg = self.config
        rho = cfg.labour_load
        for mode in MODES:
            if mode == "rst_steady" and rho >= 1:
                continue
            p.join_predictions[mode] = predict(mode, state, cfg.labour, rho).value

        yield self.labour_bed.request(p)
        p.labour_admit_at = sim.now
        p.visits.append(self.labour_bed.name)
        yield p.service
        p.labour_end_at = sim.now
        if cfg.isolated_labour:
            self.labour_bed.release(p)
            p.labour_release_at = sim.now
            self._exit(p)
            return
        if cfg.hold_labour_bed:
            yield self.ipd_beds.request(p)
            self.labour_bed.release(p)
            p.labour_release_at = sim.now
        else:
            self.labour_bed.release(p)
            p.labour_release_at = sim.now
            yield self.ipd_beds.request(p)
        p.visits.append(self.ipd_beds.name)
        yield p.stay
        self.ipd_beds.release(p)
        self._exit(p)

    # -- observation -----------------------------------------------------

    def labour_snapshot(self) -> LabourRoomState:
        bed = self.labour_bed
        if not bed.holders:
            return LabourRoomState()
        (req,) = bed.holders.values()
        now = self.sim.now
        p = req.entity
        return LabourRoomState(
            busy=True,
            t_e=now - req.granted_at,
            queue_len=len(bed.waiting),
            actual_remaining=max(req.granted_at + p.service - now, 0.0),
            queued_services=tuple(r.entity.service for r in bed.waiting),
            observed_at=now,
            busy_until=req.granted_at + p.service,
        )

    def reset_stats(self):
        for res in self.resources().values():
            res.reset_stats()

    def resources(self) -> dict:
        return {
            "doctor": self.doctor,
            "opd_nurse": self.opd_nurse,
            "staff_nurse": self.staff_nurse,
            "lab": self.lab,
            "pharmacy": self.pharmacy,
            "ipd_beds": self.ipd_beds,
            "labour_bed": self.labour_bed,
        }

    def in_system(self) -> int:
        return sum(self.created.values()) - sum(self.exited.values())
