"""Outcome measures and replication statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats


def occupancy(busy_minutes: float, capacity: int, window_minutes: float) -> float:
    """Busy integral over capacity times the observable window.

    For the doctor, pass only the OPD-open minutes of the window.
    """
    if window_minutes <= 0:
        raise ValueError("occupancy needs a non-empty observation window")
    return busy_minutes / (capacity * window_minutes)


def alpha(waits, threshold: float = 120.0) -> float | None:
    """Fraction of waits strictly above ``threshold``; None for no patients."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    waits = list(waits)
    if not waits:
        return None
    return sum(w > threshold for w in waits) / len(waits)


def delta_rho(rho_1: float, rho_2: float) -> float:
    """Relative gap between two utilizations, in percent of the larger one."""
    hi, lo = max(rho_1, rho_2), min(rho_1, rho_2)
    if hi == 0:
        return 0.0
    return 100.0 * (hi - lo) / hi


def mape(pairs) -> float | None:
    """Mean absolute percentage error over (actual, predicted) pairs with actual > 0."""
    errs = [abs(a - p) / a for a, p in pairs if a > 0]
    if not errs:
        return None
    return 100.0 * math.fsum(errs) / len(errs)


def replicate_summary(values, confidence: float = 0.95) -> tuple[float, float | None]:
    """Sample mean and Student-t confidence half-width (None below two values)."""
    vals = np.asarray([v for v in values if v is not None], dtype=float)
    if len(vals) == 0:
        raise ValueError("no values to summarize")
    mean = float(math.fsum(vals) / len(vals))
    if len(vals) < 2:
        return mean, None
    s = float(np.std(vals, ddof=1))
    q = stats.t.ppf(0.5 + confidence / 2, len(vals) - 1)
    return mean, float(q * s / math.sqrt(len(vals)))


RESOURCE_KEYS = ("doctor", "staff_nurse", "ipd_beds", "labour_bed")
DELTA_KEYS = {"doctor": "delta_rho_doc", "staff_nurse": "delta_rho_nurse",
              "ipd_beds": "delta_rho_ipd", "labour_bed": "delta_rho_lb"}


@dataclass
class ReplicationOutcome:
    """Scalar outcomes of one replication of one scenario."""

    occupancy: dict  # facility index -> resource key -> fraction
    alpha: float | None
    alpha_by_facility: dict
    mean_wait: float | None
    mean_wait_by_facility: dict
    mape: dict  # predictor -> percent or None
    n_childbirth: int
    n_diverted: int
    deltas: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.deltas:
            for key in RESOURCE_KEYS:
                self.deltas[DELTA_KEYS[key]] = delta_rho(self.occupancy[0][key], self.occupancy[1][key])

    def scalars(self) -> dict:
        out = {}
        for f, occ in self.occupancy.items():
            for key, v in occ.items():
                out[f"phc{f + 1}.{key}_occupancy"] = v
        out["alpha"] = self.alpha
        for f, v in self.alpha_by_facility.items():
            out[f"phc{f + 1}.alpha"] = v
        out["mean_labour_wait"] = self.mean_wait
        for f, v in self.mean_wait_by_facility.items():
            out[f"phc{f + 1}.mean_labour_wait"] = v
        out.update(self.deltas)
        for k, v in self.mape.items():
            out[f"mape_{k}"] = v
        out["n_childbirth"] = self.n_childbirth
        out["n_diverted"] = self.n_diverted
        return out


def outcome_from_patients(patients, occupancies: dict, threshold: float = 120.0) -> ReplicationOutcome:
    """Outcomes over measured childbirth patients, attributed to the serving facility."""
    waits = [p.realized_wait for p in patients]
    by_fac: dict = {f: [] for f in occupancies}
    for p in patients:
        by_fac[p.served].append(p.realized_wait)
    pairs: dict = {}
    for p in patients:
        actual = p.realized_wait_excl_travel
        for mode, pred in p.join_predictions.items():
            pairs.setdefault(mode, []).append((actual, pred))
    return ReplicationOutcome(
        occupancy=occupancies,
        alpha=alpha(waits, threshold),
        alpha_by_facility={f: alpha(w, threshold) for f, w in by_fac.items()},
        mean_wait=_mean(waits),
        mean_wait_by_facility={f: _mean(w) for f, w in by_fac.items()},
        mape={mode: mape(pr) for mode, pr in sorted(pairs.items())},
        n_childbirth=len(patients),
        n_diverted=sum(p.diverted for p in patients),
    )


def _mean(xs):
    return math.fsum(xs) / len(xs) if xs else None


@dataclass
class OutcomeReport:
    """Replication summary of one scenario: field name -> (mean, half-width)."""

    scenario: str
    replications: list
    fields: dict

    @classmethod
    def from_replications(cls, scenario: str, reps: list[ReplicationOutcome], confidence=0.95):
        per_field: dict = {}
        for r in reps:
            for k, v in r.scalars().items():
                per_field.setdefault(k, []).append(v)
        summary = {}
        for k, vals in per_field.items():
            if all(v is None for v in vals):
                summary[k] = (None, None)
            else:
                summary[k] = replicate_summary(vals, confidence)
        return cls(scenario, reps, summary)

    def mean(self, key):
        return self.fields[key][0]

    def half_width(self, key):
        return self.fields[key][1]

    def interval(self, key) -> tuple[float, float]:
        m, h = self.fields[key]
        h = h or 0.0
        return m - h, m + h
