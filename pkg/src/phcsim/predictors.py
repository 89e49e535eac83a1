"""Real-time delay predictors for a single labour bed treated as an M/G/1 queue."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .distributions import ServiceDistribution

MODES = ("actual", "rst_state", "rst_steady", "est")


@dataclass(frozen=True)
class LabourRoomState:
    """What a coordinator can see of one labour room at an instant.

    ``busy``, ``t_e`` and ``queue_len`` are observable. ``actual_remaining``
    and ``queued_services`` are the clairvoyant extension, read off service
    durations the simulation has already drawn.
    """

    busy: bool = False
    t_e: float = 0.0
    queue_len: int = 0
    actual_remaining: float = 0.0
    queued_services: tuple = ()
    # absolute clock and in-service completion time, when known
    observed_at: float | None = None
    busy_until: float | None = None

    def __post_init__(self):
        if self.t_e < 0 or self.queue_len < 0 or self.actual_remaining < 0:
            raise ValueError("labour room state fields must be non-negative")
        if not self.busy and (self.queue_len or self.t_e):
            raise ValueError("an idle labour room cannot have a queue or elapsed service")

    @property
    def workload(self) -> float:
        if self.observed_at is not None and self.busy_until is not None:
            # Same additions the event calendar performs, so the result is bit-exact.
            t = self.busy_until
            for s in self.queued_services:
                t += s
            return max(t - self.observed_at, 0.0)
        return self.actual_remaining + sum(self.queued_services)


IDLE = LabourRoomState()


@dataclass(frozen=True)
class DelayPrediction:
    predictor: str
    value: float
    facility: int | None = None
    issued_at: float | None = None


@dataclass(frozen=True)
class Predictor:
    """Binds a predictor mode to the service law and offered load of one facility."""

    mode: str
    dist: ServiceDistribution
    rho: float | None = field(default=None)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown predictor {self.mode!r}")
        if self.mode == "est" and not self.dist.bounded:
            raise ValueError("est predictor needs a service law with bounded support")
        if self.mode == "rst_steady" and self.rho is None:
            raise ValueError("rst_steady predictor needs the offered load rho")

    def __call__(self, state: LabourRoomState) -> float:
        return predict(self.mode, state, self.dist, self.rho).value


def residual_mean(d: ServiceDistribution) -> float:
    """E[S^2] / (2 E[S]): mean remaining service seen at a random busy instant."""
    if d.mean <= 0:
        raise ValueError("residual mean needs a positive service mean")
    return d.second_moment / (2 * d.mean)


def clamp_elapsed(t_e: float, d: ServiceDistribution) -> float:
    return min(max(t_e, 0.0), d.t_max)


def predict_rst_state(s: LabourRoomState, d: ServiceDistribution, **kw) -> DelayPrediction:
    value = s.queue_len * d.mean + (residual_mean(d) if s.busy else 0.0)
    return DelayPrediction("rst_state", value, **kw)


def predict_rst_steady(rho: float, d: ServiceDistribution, **kw) -> DelayPrediction:
    """Closed form ((1 + C^2) / 2) (rho / (1 - rho)) E[S]; ignores the current state."""
    if not 0 <= rho < 1:
        raise ValueError(f"rho must lie in [0, 1) for a stable queue, got {rho}")
    value = (1 + d.scv) / 2 * (rho / (1 - rho)) * d.mean
    return DelayPrediction("rst_steady", value, **kw)


def predict_est(s: LabourRoomState, d: ServiceDistribution, **kw) -> DelayPrediction:
    if not d.bounded:
        raise ValueError("est predictor needs a service law with bounded support")
    if not s.busy:
        return DelayPrediction("est", 0.0, **kw)
    t_e = clamp_elapsed(s.t_e, d)
    t_avg, t_max = d.t_avg, d.t_max
    remaining = max(t_avg - t_e, min(t_e - t_avg, t_max - t_e))
    return DelayPrediction("est", s.queue_len * d.mean + remaining, **kw)


def predict_actual(s: LabourRoomState, **kw) -> DelayPrediction:
    """Virtual waiting time of the work already present, exact for FIFO absent new arrivals."""
    return DelayPrediction("actual", s.workload, **kw)


def predict(mode: str, s: LabourRoomState, d: ServiceDistribution,
            rho: float | None = None, **kw) -> DelayPrediction:
    if mode == "actual":
        return predict_actual(s, **kw)
    if mode == "rst_state":
        return predict_rst_state(s, d, **kw)
    if mode == "rst_steady":
        if rho is None:
            raise ValueError("rst_steady needs rho")
        return predict_rst_steady(rho, d, **kw)
    if mode == "est":
        return predict_est(s, d, **kw)
    raise ValueError(f"unknown predictor {mode!r}")


def project_state(s: LabourRoomState, delta: float, d: ServiceDistribution) -> LabourRoomState:
    """State expected ``delta`` minutes ahead, ignoring arrivals in between.

    The observable part assumes at most one service completion, forced only
    when elapsed time would pass the support maximum. The clairvoyant part
    drains the known workload FIFO, completing as many services as it must.
    """
    if delta < 0:
        raise ValueError("projection horizon must be non-negative")
    if delta == 0:
        return s
    s = replace(s, observed_at=None, busy_until=None)

    remaining = s.actual_remaining - delta
    queued = list(s.queued_services)
    while remaining <= 0 and queued:
        remaining += queued.pop(0)
    remaining = max(remaining, 0.0)

    if not s.busy:
        return replace(s, actual_remaining=remaining, queued_services=tuple(queued))
    t_max = d.t_max
    t_e = clamp_elapsed(s.t_e, d) + delta
    if t_e < t_max:
        busy, queue_len = True, s.queue_len
    elif s.queue_len > 0:
        busy, queue_len = True, s.queue_len - 1
        t_e = min(max(t_e - t_max, 0.0), t_max)
    else:
        return LabourRoomState(actual_remaining=remaining, queued_services=tuple(queued))
    return LabourRoomState(busy, t_e, queue_len, remaining, tuple(queued))
