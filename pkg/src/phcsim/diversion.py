"""Centralized diversion of childbirth patients between two facilities.

At each childbirth patient's decision instant the coordinator predicts the
home wait and the wait at the other facility as it will look after the
trip, and sends the patient only if trip plus remote wait is strictly less.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .distributions import ServiceDistribution
from .predictors import LabourRoomState, predict, project_state

POLICY_MODES = ("none", "actual", "rst_state", "rst_steady", "est")


@dataclass(frozen=True)
class DiversionPolicy:
    mode: str = "none"
    travel_time: float = 60.0
    # Divert only when the home prediction exceeds this many minutes; None disables.
    min_home_wait_gate: float | None = None

    def __post_init__(self):
        if self.mode not in POLICY_MODES:
            raise ValueError(f"unknown diversion mode {self.mode!r}; expected one of {POLICY_MODES}")
        if not (self.travel_time >= 0 and math.isfinite(self.travel_time)):
            raise ValueError(f"travel_time must be finite and non-negative, got {self.travel_time}")
        if self.min_home_wait_gate is not None and self.min_home_wait_gate < 0:
            raise ValueError("min_home_wait_gate must be non-negative")


@dataclass(frozen=True)
class DiversionDecision:
    patient_id: int
    origin: int
    destination: int
    w_home: float
    w_remote_projected: float
    travel_time: float
    issued_at: float
    diverted: bool

    @property
    def arrival_at(self) -> float:
        return self.issued_at + (self.travel_time if self.diverted else 0.0)


def decide(patient_id: int, home: LabourRoomState, remote: LabourRoomState,
           policy: DiversionPolicy, d: ServiceDistribution, *, origin: int = 0,
           remote_id: int = 1, issued_at: float = 0.0, rho_home: float | None = None,
           rho_remote: float | None = None, d_remote: ServiceDistribution | None = None,
           ) -> DiversionDecision:
    """Route one patient; equality keeps the patient at home."""
    if policy.mode == "none":
        raise ValueError("decide() needs an active diversion mode")
    d_remote = d_remote or d
    w_home = predict(policy.mode, home, d, rho_home).value
    ahead = project_state(remote, policy.travel_time, d_remote)
    w_remote = predict(policy.mode, ahead, d_remote, rho_remote).value
    diverted = w_remote + policy.travel_time < w_home
    if policy.min_home_wait_gate is not None and w_home <= policy.min_home_wait_gate:
        diverted = False
    return DiversionDecision(
        patient_id=patient_id,
        origin=origin,
        destination=remote_id if diverted else origin,
        w_home=w_home,
        w_remote_projected=w_remote,
        travel_time=policy.travel_time,
        issued_at=issued_at,
        diverted=diverted,
    )


def enact(decision: DiversionDecision) -> float:
    """Instant at which a diverted patient joins the remote labour queue."""
    if not decision.diverted:
        raise ValueError("only a diverted decision can be enacted")
    return decision.issued_at + decision.travel_time


class Coordinator:
    """Observes both facilities synchronously and routes each childbirth patient once."""

    def __init__(self, policy: DiversionPolicy, facilities):
        if len(facilities) != 2:
            raise ValueError("diversion is defined between exactly two facilities")
        self.policy = policy
        self.facilities = list(facilities)
        self.log: list[DiversionDecision] = []
        self._routed: set[int] = set()
        for f in self.facilities:
            f.router = self

    def route(self, p, home):
        if p.id in self._routed:
            raise RuntimeError(f"patient {p.id} already routed")
        self._routed.add(p.id)
        if self.policy.mode == "none":
            return home, 0.0
        remote = self.facilities[1 - self.facilities.index(home)]
        hc, rc = home.config, remote.config
        dec = decide(
            p.id, home.labour_snapshot(), remote.labour_snapshot(), self.policy, hc.labour,
            origin=home.index, remote_id=remote.index, issued_at=home.sim.now,
            rho_home=hc.labour_load, rho_remote=rc.labour_load, d_remote=rc.labour,
        )
        self.log.append(dec)
        p.decision = dec
        if not dec.diverted:
            return home, 0.0
        p.diverted = True
        return remote, enact(dec) - dec.issued_at
