"""Exact Caratheodory values on the egg-ring domain.

Bounded holomorphic functions on the domain extend to its hull, the unit
ball, so the Caratheodory metric is the ball metric at the same point.
Complex lines that avoid the egg give exact values for all three metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import DomainError, NotApplicableError
from .geometry import (
    BasePoint,
    EggRingDomain,
    TangentVector2,
    contains,
    line_misses_inner,
    pushforward_norm,
)

METRICS = ("kobayashi", "sibony", "caratheodory")
KINDS = ("lower", "upper", "exact")


@dataclass(frozen=True)
class MetricBound:
    metric: str
    kind: str
    value: float
    method: str
    delta: float
    direction: TangentVector2

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown bound kind {self.kind!r}")
        if not (math.isfinite(self.value) and self.value >= 0):
            raise ValueError(f"bound value must be finite and >= 0, got {self.value}")

    def scaled(self, t: complex) -> "MetricBound":
        """Bound for the direction t*xi; every metric is absolutely homogeneous."""
        return replace(self, value=abs(t) * self.value, direction=self.direction * t)


def _require_inside(base: BasePoint, m: int) -> None:
    if not contains(EggRingDomain(m), base.point):
        raise DomainError(f"base point {base.point} is outside the domain")


def caratheodory_ring(base: BasePoint, xi: TangentVector2, m: int = 2) -> MetricBound:
    _require_inside(base, m)
    return MetricBound(
        metric="caratheodory",
        kind="exact",
        value=pushforward_norm(base.p, xi),
        method="hull-mobius",
        delta=base.delta,
        direction=xi,
    )


def lemma4_value(base: BasePoint, xi: TangentVector2, m: int = 2) -> dict[str, MetricBound]:
    """Common exact value of the three metrics when the line P + C*xi avoids the egg.

    Returns one exact bound per metric.  Raises NotApplicableError when the
    line meets the egg; callers then fall back to bounds.
    """
    domain = EggRingDomain(m)
    _require_inside(base, m)
    if xi.is_zero() or not line_misses_inner(domain, base.point, xi):
        raise NotApplicableError(f"line through P_delta in direction {xi} meets the inner egg")
    value = pushforward_norm(base.p, xi)
    return {
        name: MetricBound(name, "exact", value, "complex-line", base.delta, xi)
        for name in METRICS
    }
