"""Points, directions and the egg-ring model domain in C^2.

The domain is the unit ball with the closed "egg" {|z|^2 + |w|^m <= 1/4}
removed.  Base points sit on the real z-axis at distance ``delta`` from the
inner boundary point (1/2, 0).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDirectionError, DomainError

INNER_LEVEL = 0.25

# line_misses_inner search parameters
LINE_GRID = 256
LINE_REFINE_ROUNDS = 5
LINE_ZOOM = 4.0
LINE_MARGIN = 1e-9


def _finite(c: complex) -> bool:
    return cmath.isfinite(c)


@dataclass(frozen=True)
class ComplexPoint2:
    z: complex
    w: complex

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "w", complex(self.w))
        if not (_finite(self.z) and _finite(self.w)):
            raise DomainError(f"non-finite point ({self.z}, {self.w})")

    def __add__(self, other: "TangentVector2") -> "ComplexPoint2":
        return ComplexPoint2(self.z + other.xi_z, self.w + other.xi_w)

    def as_array(self) -> np.ndarray:
        return np.array([self.z, self.w], dtype=complex)


@dataclass(frozen=True)
class TangentVector2:
    xi_z: complex
    xi_w: complex

    def __post_init__(self):
        object.__setattr__(self, "xi_z", complex(self.xi_z))
        object.__setattr__(self, "xi_w", complex(self.xi_w))
        if not (_finite(self.xi_z) and _finite(self.xi_w)):
            raise DomainError(f"non-finite direction ({self.xi_z}, {self.xi_w})")

    def __mul__(self, t: complex) -> "TangentVector2":
        return TangentVector2(self.xi_z * t, self.xi_w * t)

    __rmul__ = __mul__

    def __add__(self, other: "TangentVector2") -> "TangentVector2":
        return TangentVector2(self.xi_z + other.xi_z, self.xi_w + other.xi_w)

    def __neg__(self) -> "TangentVector2":
        return TangentVector2(-self.xi_z, -self.xi_w)

    def norm(self) -> float:
        return math.hypot(abs(self.xi_z), abs(self.xi_w))

    def is_zero(self) -> bool:
        return self.xi_z == 0 and self.xi_w == 0

    def as_array(self) -> np.ndarray:
        return np.array([self.xi_z, self.xi_w], dtype=complex)


NORMAL = TangentVector2(1, 0)
TANGENTIAL = TangentVector2(0, 1)


@dataclass(frozen=True)
class EggRingDomain:
    """Unit ball minus the egg {|z|^2 + |w|^m <= inner_level}.

    ``variant`` records which outer boundary is used; only ``"ball"`` is
    implemented.
    """

    m: int = 2
    inner_level: float = INNER_LEVEL
    outer: float = 1.0
    variant: str = field(default="ball")

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise DomainError(f"m must be an integer >= 2, got {self.m}")
        object.__setattr__(self, "m", int(self.m))
        if not 0 < self.inner_level < self.outer:
            raise DomainError("need 0 < inner_level < outer")
        if self.variant != "ball":
            raise DomainError(f"unsupported domain variant {self.variant!r}")
        # the egg reaches |w| = inner_level^(1/m) on the w-axis
        if self.inner_level + self.inner_level ** (2.0 / self.m) >= self.outer ** 2:
            raise DomainError("inner egg is not strictly inside the ball")


@dataclass(frozen=True)
class BasePoint:
    """The point (1/2 + delta, 0) at distance delta from the inner boundary."""

    delta: float

    def __post_init__(self):
        d = float(self.delta)
        if not (0 < d < 0.25):
            raise DomainError(f"delta must lie in (0, 1/4), got {self.delta}")
        object.__setattr__(self, "delta", d)

    @property
    def p(self) -> float:
        return 0.5 + self.delta

    @property
    def point(self) -> ComplexPoint2:
        return ComplexPoint2(self.p, 0)


def egg_level(domain: EggRingDomain, q: ComplexPoint2) -> float:
    return abs(q.z) ** 2 + abs(q.w) ** domain.m


def egg_level_array(m: int, z, w):
    return np.abs(z) ** 2 + np.abs(w) ** m


def contains_array(domain: EggRingDomain, z, w, margin: float = 0.0):
    """Vectorized membership: strict inequalities against both boundaries."""
    z = np.asarray(z)
    w = np.asarray(w)
    inner = egg_level_array(domain.m, z, w) > domain.inner_level + margin
    outer = np.abs(z) ** 2 + np.abs(w) ** 2 < domain.outer ** 2 - margin
    return inner & outer


def contains(domain: EggRingDomain, q: ComplexPoint2, margin: float = 0.0) -> bool:
    if margin < 0:
        raise DomainError("margin must be nonnegative")
    return bool(contains_array(domain, q.z, q.w, margin))


def pushforward_norm(p: float, xi: TangentVector2) -> float:
    """Length of the ball automorphism's derivative applied to ``xi`` at (p, 0).

    This is the Caratheodory (and Kobayashi) metric of the unit ball at
    (p, 0).
    """
    if not 0 < p < 1:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    s = 1.0 - p * p
    return math.sqrt(abs(xi.xi_z) ** 2 / (s * s) + abs(xi.xi_w) ** 2 / s)


def ball_automorphism(p: float, z, w):
    """Ball automorphism sending (p, 0) to the origin.

    The second component uses the denominator 1 - p z.
    """
    den = 1.0 - p * z
    return (z - p) / den, math.sqrt(1.0 - p * p) * w / den


def line_min_level(
    domain: EggRingDomain,
    P: ComplexPoint2,
    xi: TangentVector2,
    grid: int = LINE_GRID,
    rounds: int = LINE_REFINE_ROUNDS,
) -> tuple[float, complex]:
    """Minimize egg_level(P + zeta*xi) over the part of the line near the ball.

    egg_level is convex along complex lines, so a grid search followed by
    zooming on the best cell finds the global minimum.
    """
    n = xi.norm()
    if n == 0:
        raise DegenerateDirectionError("direction must be nonzero")
    # |zeta*xi| > 2 puts the point outside the ball and far from the egg
    half = 2.0 / n
    center = 0j
    t = np.linspace(-1.0, 1.0, grid)
    best_val, best_zeta = math.inf, 0j
    for _ in range(rounds + 1):
        zeta = center + half * (t[:, None] + 1j * t[None, :])
        lev = egg_level_array(domain.m, P.z + zeta * xi.xi_z, P.w + zeta * xi.xi_w)
        k = np.unravel_index(np.argmin(lev), lev.shape)
        if lev[k] < best_val:
            best_val, best_zeta = float(lev[k]), complex(zeta[k])
        center = best_zeta
        half /= LINE_ZOOM
    return best_val, best_zeta


def line_misses_inner(
    domain: EggRingDomain,
    P: ComplexPoint2,
    xi: TangentVector2,
    margin: float = LINE_MARGIN,
) -> bool:
    """True when the complex line through P in direction xi avoids the egg."""
    lo, _ = line_min_level(domain, P, xi)
    return lo > domain.inner_level + margin
