"""Scenario x replication experiments and their report files.

Every scenario of an experiment reuses the same master seed, so all
policies see the same patients (common random numbers): arrival times and
every service duration come from per-facility, per-process streams that no
routing decision can perturb.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
import shutil
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .diversion import POLICY_MODES, Coordinator, DiversionPolicy
from .facility import PHC1, PHC2, Phc, PhcConfig
from .kernel import DAY, ShiftCalendar, Simulation, StreamFactory
from .metrics import RESOURCE_KEYS, DELTA_KEYS, OutcomeReport, ReplicationOutcome, outcome_from_patients
from .predictors import MODES


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending field."""


def normalize_mode(name: str) -> str:
    """Canonical policy string: a mode, ``all``, or a comma-separated list of modes."""
    parts = [p.strip().lower().replace("-", "_") for p in str(name).split(",")]
    for mode in parts:
        if mode not in POLICY_MODES + ("all",):
            raise ConfigError(f"policy: unknown mode {mode!r}")
    if "all" in parts:
        if len(parts) > 1:
            raise ConfigError("policy: 'all' cannot be combined with other modes")
        return "all"
    return ",".join(dict.fromkeys(parts))


@dataclass(frozen=True)
class ScenarioConfig:
    policy: str = "all"
    travel_time: float = 60.0
    threshold: float = 120.0
    seed: int = 0
    replications: int = 10
    warmup_days: float = 180.0
    horizon_days: float = 365.0
    min_home_wait_gate: float | None = None
    opd_open: float = 480.0
    opd_close: float = 960.0
    shift_starts: tuple = (0.0, 480.0, 960.0)
    facilities: tuple = (PHC1, PHC2)
    out_dir: str = "results"
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "policy", normalize_mode(self.policy))
        object.__setattr__(self, "shift_starts", tuple(float(s) for s in self.shift_starts))
        object.__setattr__(self, "facilities", tuple(self.facilities))
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError(f"seed: must be a non-negative integer, got {self.seed!r}")
        if not isinstance(self.replications, int) or self.replications < 1:
            raise ConfigError(f"replications: must be >= 1, got {self.replications!r}")
        if not self.warmup_days >= 0:
            raise ConfigError(f"warmup_days: must be >= 0, got {self.warmup_days}")
        if not (self.horizon_days > 0 and math.isfinite(self.horizon_days)):
            raise ConfigError(f"horizon_days: must be positive, got {self.horizon_days}")
        if not self.threshold > 0:
            raise ConfigError(f"threshold: must be positive, got {self.threshold}")
        if len(self.facilities) != 2:
            raise ConfigError("facilities: exactly two facilities are required")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError(f"workers: must be >= 1, got {self.workers!r}")
        try:
            self.calendar()
            DiversionPolicy("none", self.travel_time, self.min_home_wait_gate)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def scenarios(self) -> tuple:
        return POLICY_MODES if self.policy == "all" else tuple(self.policy.split(","))

    @property
    def warmup_minutes(self) -> float:
        return self.warmup_days * DAY

    @property
    def end_minutes(self) -> float:
        return (self.warmup_days + self.horizon_days) * DAY

    def calendar(self) -> ShiftCalendar:
        return ShiftCalendar(self.opd_open, self.opd_close, self.shift_starts)

    def policy_for(self, mode: str) -> DiversionPolicy:
        return DiversionPolicy(mode, self.travel_time, self.min_home_wait_gate)

    def to_dict(self) -> dict:
        scenario = {}
        for f in fields(self):
            if f.name in ("facilities", "opd_open", "opd_close", "shift_starts"):
                continue
            scenario[f.name] = getattr(self, f.name)
        return {
            "scenario": scenario,
            "calendar": self.calendar().to_dict(),
            "facilities": {f"phc{i + 1}": c.to_dict() for i, c in enumerate(self.facilities)},
        }

    @classmethod
    def from_dict(cls, d: dict) -> ScenarioConfig:
        if not isinstance(d, dict):
            raise ConfigError("config: top level must be an object")
        unknown = set(d) - {"scenario", "calendar", "facilities"}
        if unknown:
            raise ConfigError(f"config: unknown section {sorted(unknown)[0]!r}")
        kw = {}
        scen_fields = {f.name for f in fields(cls)} - {"facilities", "opd_open", "opd_close", "shift_starts"}
        for key, v in d.get("scenario", {}).items():
            if key not in scen_fields:
                raise ConfigError(f"scenario.{key}: unknown field")
            kw[key] = v
        for key, v in d.get("calendar", {}).items():
            if key not in ("opd_open", "opd_close", "shift_starts"):
                raise ConfigError(f"calendar.{key}: unknown field")
            kw[key] = v
        facs = list(cls().facilities)
        for key, block in d.get("facilities", {}).items():
            if key not in ("phc1", "phc2"):
                raise ConfigError(f"facilities.{key}: expected phc1 or phc2")
            i = int(key[-1]) - 1
            try:
                facs[i] = PhcConfig.from_dict(block, facs[i])
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"facilities.{key}: {exc}") from None
        kw["facilities"] = tuple(facs)
        try:
            return cls(**kw)
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"scenario: {exc}") from None

    @classmethod
    def load(cls, path) -> ScenarioConfig:
        text = Path(path).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(data)


@dataclass
class RunResult:
    scenario: str
    replication: int
    patients: list  # every childbirth patient created, by id
    decisions: list
    outcome: ReplicationOutcome
    measured_ids: frozenset = field(default_factory=frozenset)
    created: int = 0
    in_system: int = 0
    trace: list | None = None


def build_model(cfg: ScenarioConfig, mode: str, replication: int = 0, *,
                trace: bool = False, coordinator: bool = True, keep_all: bool = False):
    """Wire two facilities (and, unless told otherwise, the coordinator) onto a fresh simulation."""
    sim = Simulation(trace=trace)
    calendar = cfg.calendar()
    streams = StreamFactory(cfg.seed, replication)
    ids = itertools.count(1)
    facs = [Phc(sim, i, c, calendar, streams, ids, keep_all) for i, c in enumerate(cfg.facilities)]
    coord = Coordinator(cfg.policy_for(mode), facs) if coordinator else None
    for f in facs:
        f.start()
    if cfg.warmup_minutes > 0:
        sim.schedule(cfg.warmup_minutes, lambda: [f.reset_stats() for f in facs])
    return sim, facs, coord


def simulate(cfg: ScenarioConfig, mode: str, replication: int = 0, *,
             trace: bool = False, coordinator: bool = True) -> RunResult:
    """One replication of one scenario."""
    mode = normalize_mode(mode)
    if mode not in POLICY_MODES:
        raise ConfigError("simulate() runs a single scenario")
    sim, facs, coord = build_model(cfg, mode, replication, trace=trace, coordinator=coordinator)
    sim.run(cfg.end_minutes)

    occupancies = {f.index: {k: f.resources()[k].occupancy() for k in RESOURCE_KEYS} for f in facs}
    patients = sorted((p for f in facs for p in f.childbirth), key=lambda p: p.id)
    warm = cfg.warmup_minutes
    measured = [p for p in patients
                if p.decision_at is not None and p.decision_at >= warm and p.labour_admit_at is not None]
    outcome = outcome_from_patients(measured, occupancies, cfg.threshold)
    return RunResult(
        scenario=mode,
        replication=replication,
        patients=patients,
        decisions=list(coord.log) if coord else [],
        outcome=outcome,
        measured_ids=frozenset(p.id for p in measured),
        created=sum(sum(f.created.values()) for f in facs),
        in_system=sum(f.in_system() for f in facs),
        trace=sim.trace,
    )


def _simulate_job(args):
    cfg, mode, rep = args
    return simulate(cfg, mode, rep)


def run_scenario(cfg: ScenarioConfig, mode: str) -> tuple[OutcomeReport, list[RunResult]]:
    jobs = [(cfg, mode, r) for r in range(cfg.replications)]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            runs = list(pool.map(_simulate_job, jobs))
    else:
        runs = [_simulate_job(j) for j in jobs]
    runs.sort(key=lambda r: r.replication)
    return OutcomeReport.from_replications(mode, [r.outcome for r in runs]), runs


# -- output files ----------------------------------------------------------

PATIENT_COLUMNS = (
    "replication", "patient_id", "class", "origin_phc", "served_phc", "diverted", "created_at",
    "labour_queue_join_at", "labour_admit_at", "exit_at", "realized_wait",
    "realized_wait_excl_travel", "prediction_at_decision_home", "prediction_at_decision_remote",
    "measured",
)
DECISION_COLUMNS = (
    "replication", "patient_id", "issued_at", "origin_phc", "destination_phc", "w_home",
    "w_remote_projected", "travel_time", "diverted",
)


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return int(v)
    return v


def patients_csv(runs: list[RunResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PATIENT_COLUMNS)
    for run in runs:
        for p in run.patients:
            dec = p.decision
            w.writerow([_cell(v) for v in (
                run.replication, p.id, p.cls.value, p.origin + 1,
                None if p.served is None else p.served + 1, p.diverted, p.created_at,
                p.labour_queue_join_at, p.labour_admit_at, p.exit_at, p.realized_wait,
                p.realized_wait_excl_travel, dec.w_home if dec else None,
                dec.w_remote_projected if dec else None, p.id in run.measured_ids,
            )])
    return buf.getvalue()


def decisions_csv(runs: list[RunResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DECISION_COLUMNS)
    for run in runs:
        for d in run.decisions:
            w.writerow([_cell(v) for v in (
                run.replication, d.patient_id, d.issued_at, d.origin + 1, d.destination + 1,
                d.w_home, d.w_remote_projected, d.travel_time, d.diverted,
            )])
    return buf.getvalue()


def summary_csv(reports: list[OutcomeReport]) -> str:
    keys = list(dict.fromkeys(k for r in reports for k in r.fields))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scenario", "replications"] + [f"{k}_{s}" for k in keys for s in ("mean", "hw")])
    for r in reports:
        row = [r.scenario, len(r.replications)]
        for k in keys:
            m, h = r.fields.get(k, (None, None))
            row += [_cell(m), _cell(h)]
        w.writerow(row)
    return buf.getvalue()


def _fmt(report: OutcomeReport, key: str, scale: float = 1.0, digits: int = 2) -> str:
    m, h = report.fields.get(key, (None, None))
    if m is None:
        return "n/a"
    if h is None:
        return f"{m * scale:.{digits}f}"
    return f"{m * scale:.{digits}f} ({h * scale:.{digits}f})"


def comparison_md(reports: list[OutcomeReport], cfg: ScenarioConfig) -> str:
    lines = [
        "# Percentage difference in operational outcomes by diversion case",
        "",
        f"Replications: {cfg.replications}; warm-up {cfg.warmup_days:g} d; "
        f"measured {cfg.horizon_days:g} d; travel time {cfg.travel_time:g} min; "
        f"seed {cfg.seed}. Values are mean (95% half-width).",
        "",
        "| Diversion case | Δρ_doc | Δρ_nurse | Δρ_IPD | Δρ_lb | Labour bed wait (min) | α (%) | MAPE (%) |",
        "|---|---|---|---|---|---|---|---|",
    ]
    for r in reports:
        mape_key = f"mape_{r.scenario}" if r.scenario in MODES else None
        cells = [_fmt(r, DELTA_KEYS[k]) for k in RESOURCE_KEYS]
        cells += [_fmt(r, "mean_labour_wait"), _fmt(r, "alpha", 100.0),
                  _fmt(r, mape_key) if mape_key else "n/a"]
        lines.append(f"| {r.scenario} | " + " | ".join(cells) + " |")
    lines += ["", "Δρ is 100·(max − min)/max of the two facilities' utilizations; "
              "α is the share of childbirth patients waiting more than "
              f"{cfg.threshold:g} min for the labour bed.", ""]
    return "\n".join(lines)


def _write_atomic(out_dir, files: dict):
    """Write all files into a scratch directory first, then move them in place."""
    out = Path(out_dir)
    out.parent.mkdir(parents=True, exist_ok=True)
    scratch = Path(tempfile.mkdtemp(prefix=".phcsim-", dir=out.parent))
    try:
        for name, text in files.items():
            (scratch / name).write_text(text)
        out.mkdir(parents=True, exist_ok=True)
        for name in files:
            os.replace(scratch / name, out / name)
    finally:
        shutil.rmtree(scratch, ignore_errors=True)


@dataclass
class ExperimentResult:
    config: ScenarioConfig
    reports: dict  # scenario -> OutcomeReport
    runs: dict  # scenario -> list[RunResult]
    files: dict  # file name -> text


def run_experiment(cfg: ScenarioConfig, write: bool = True) -> ExperimentResult:
    reports, runs, files = {}, {}, {}
    for mode in cfg.scenarios:
        reports[mode], runs[mode] = run_scenario(cfg, mode)
        files[f"patients_{mode}.csv"] = patients_csv(runs[mode])
        files[f"decisions_{mode}.csv"] = decisions_csv(runs[mode])
    ordered = [reports[m] for m in cfg.scenarios]
    files["summary.csv"] = summary_csv(ordered)
    files["comparison.md"] = comparison_md(ordered, cfg)
    files["config_effective.json"] = json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n"
    if write:
        _write_atomic(cfg.out_dir, files)
    return ExperimentResult(cfg, reports, runs, files)


SWEEP_PARAMS = ("ia_childbirth", "phc1.ia_childbirth", "phc2.ia_childbirth", "travel_time")
SWEEP_FIELDS = ("alpha", "mean_labour_wait", "delta_rho_lb", "n_diverted") + tuple(f"mape_{m}" for m in MODES)


def with_parameter(cfg: ScenarioConfig, parameter: str, value: float) -> ScenarioConfig:
    if parameter == "travel_time":
        return replace(cfg, travel_time=float(value))
    if parameter in ("ia_childbirth", "phc1.ia_childbirth", "phc2.ia_childbirth"):
        i = 1 if parameter.startswith("phc2") else 0
        facs = list(cfg.facilities)
        facs[i] = replace(facs[i], ia_childbirth=float(value))
        return replace(cfg, facilities=tuple(facs))
    raise ConfigError(f"sweep: unknown parameter {parameter!r}; expected one of {SWEEP_PARAMS}")


def sensitivity_sweep(cfg: ScenarioConfig, parameter: str, values, write: bool = True):
    """One row per grid value; ``ia_childbirth`` alone refers to the first facility."""
    values = list(values)
    if not values:
        raise ConfigError("sweep: empty value grid")
    grid = [with_parameter(cfg, parameter, v) for v in values]
    rows, results = [], []
    for v, c in zip(values, grid):
        res = run_experiment(c, write=False)
        results.append(res)
        row = {"parameter": parameter, "value": v}
        for mode, rep in res.reports.items():
            for key in SWEEP_FIELDS:
                m, h = rep.fields.get(key, (None, None))
                row[f"{mode}.{key}_mean"] = m
                row[f"{mode}.{key}_hw"] = h
        rows.append(row)
    if write:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _cell(v) for k, v in row.items()})
        _write_atomic(cfg.out_dir, {
            "sweep.csv": buf.getvalue(),
            "config_effective.json": json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n",
        })
    return rows, results
