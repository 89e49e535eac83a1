"""Parametric service and interarrival laws.

Every law samples by inverse CDF from a single uniform draw, so a stream
advances by exactly one uniform per variate regardless of the law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

KINDS = ("exponential", "uniform", "deterministic")


@dataclass(frozen=True)
class ServiceDistribution:
    """A service-time or interarrival law in minutes.

    Build instances with :meth:`exponential`, :meth:`uniform` or
    :meth:`deterministic`; the raw constructor validates its fields.
    """

    kind: str
    a: float
    b: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("distribution parameters must be finite")
        if self.kind == "exponential" and self.a <= 0:
            raise ValueError(f"exponential mean must be positive, got {self.a}")
        if self.kind == "uniform" and not 0 <= self.a <= self.b:
            raise ValueError(f"uniform needs 0 <= low <= high, got ({self.a}, {self.b})")
        if self.kind == "deterministic" and self.a < 0:
            raise ValueError(f"deterministic value must be non-negative, got {self.a}")

    @classmethod
    def exponential(cls, mean: float) -> ServiceDistribution:
        return cls("exponential", float(mean))

    @classmethod
    def uniform(cls, low: float, high: float) -> ServiceDistribution:
        return cls("uniform", float(low), float(high))

    @classmethod
    def deterministic(cls, value: float) -> ServiceDistribution:
        return cls("deterministic", float(value))

    @property
    def mean(self) -> float:
        if self.kind == "uniform":
            return (self.a + self.b) / 2
        return self.a

    @property
    def variance(self) -> float:
        if self.kind == "exponential":
            return self.a**2
        if self.kind == "uniform":
            return (self.b - self.a) ** 2 / 12
        return 0.0

    @property
    def second_moment(self) -> float:
        return self.variance + self.mean**2

    @property
    def scv(self) -> float:
        """Squared coefficient of variation, Var[S] / E[S]^2."""
        if self.mean == 0:
            return 0.0
        return self.variance / self.mean**2

    @property
    def t_min(self) -> float:
        return self.a if self.kind != "exponential" else 0.0

    @property
    def t_max(self) -> float:
        if self.kind == "exponential":
            return math.inf
        return self.b if self.kind == "uniform" else self.a

    @property
    def t_avg(self) -> float:
        """Midpoint of the support; infinite for unbounded laws."""
        return (self.t_min + self.t_max) / 2

    @property
    def bounded(self) -> bool:
        return self.kind != "exponential"

    def ppf(self, u: float) -> float:
        """Inverse CDF at ``u`` in [0, 1)."""
        if self.kind == "exponential":
            return -self.a * math.log1p(-u)
        if self.kind == "uniform":
            return self.a + (self.b - self.a) * u
        return self.a

    def to_dict(self) -> dict:
        if self.kind == "exponential":
            return {"kind": "exponential", "mean": self.a}
        if self.kind == "uniform":
            return {"kind": "uniform", "low": self.a, "high": self.b}
        return {"kind": "deterministic", "value": self.a}

    @classmethod
    def from_dict(cls, d: dict) -> ServiceDistribution:
        kind = d.get("kind")
        try:
            if kind == "exponential":
                return cls.exponential(d["mean"])
            if kind == "uniform":
                return cls.uniform(d["low"], d["high"])
            if kind == "deterministic":
                return cls.deterministic(d["value"])
        except KeyError as exc:
            raise ValueError(f"{kind} distribution missing field {exc.args[0]!r}") from None
        raise ValueError(f"unknown distribution kind {kind!r}")

    def __str__(self):
        if self.kind == "exponential":
            return f"exponential({self.a:g})"
        if self.kind == "uniform":
            return f"uniform({self.a:g}, {self.b:g})"
        return f"deterministic({self.a:g})"

