"""Kobayashi metric bounds at P_delta from explicit analytic discs.

Any holomorphic disc phi: D -> domain with phi(0) = P and phi'(0) = (lam, 0)
certifies F_K(P, (1, 0)) <= 1/lam.  The family

    phi(zeta) = (p + lam*zeta + a2*zeta^2, mu*zeta^2)

keeps the w-component of order zeta^2 so the initial direction stays
normal, while mu^m |zeta|^(2m) lifts the disc over the egg.  Balancing
delta - lam*t + mu^m t^(2m) > 0 gives lam ~ delta^(1 - 1/(2m)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .caratheodory import MetricBound, caratheodory_ring
from .errors import OptimizationError
from .geometry import (
    NORMAL,
    TANGENTIAL,
    BasePoint,
    EggRingDomain,
    TangentVector2,
    pushforward_norm,
)
from .search import golden_section_max
from .sibony import sibony_lower

R_MAX = 1.0 - 1e-6
GRID_STEPS = 256
CERTIFY_FACTOR = 4
DISC_MARGIN = 1e-9
DEFAULT_BUDGET = 800
MIN_BUDGET = 100
LAM_FLOOR = 1e-3  # lower end of the lam search, relative to delta


@dataclass(frozen=True)
class CandidateDisc:
    lam: float
    mu: float
    base: BasePoint
    a2: complex = 0j
    w_degree: int = 2

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        z = self.base.p + self.lam * zeta + self.a2 * zeta * zeta
        w = self.mu * zeta ** self.w_degree
        return z, w

    @property
    def derivative(self) -> TangentVector2:
        return TangentVector2(self.lam, self.mu if self.w_degree == 1 else 0)


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    worst_margin: float
    worst_zeta: complex
    samples_checked: int


@lru_cache(maxsize=8)
def _disc_grid(radial_steps: int, angular_steps: int) -> np.ndarray:
    r = np.linspace(0.0, R_MAX, radial_steps)
    theta = 2.0 * np.pi * np.arange(angular_steps) / angular_steps
    grid = r[:, None] * np.exp(1j * theta)[None, :]
    grid.setflags(write=False)
    return grid


def disc_feasible(
    disc: CandidateDisc,
    domain: EggRingDomain,
    radial_steps: int = GRID_STEPS,
    angular_steps: int = GRID_STEPS,
    margin: float = DISC_MARGIN,
) -> FeasibilityReport:
    """Sample the disc on a polar grid of |zeta| <= 1 - 1e-6 and check membership.

    The inner constraint can be violated in the interior, so the whole
    grid is checked, not just the boundary circle.
    """
    if radial_steps < 64 or angular_steps < 64:
        raise ValueError("need at least 64 radial and 64 angular steps")
    zeta = _disc_grid(radial_steps, angular_steps)
    z, w = disc(zeta)
    az2 = z.real ** 2 + z.imag ** 2
    aw = np.abs(w)
    inner = az2 + aw ** domain.m - domain.inner_level
    outer = domain.outer ** 2 - az2 - aw * aw
    slack = np.minimum(inner, outer)
    k = np.unravel_index(np.argmin(slack), slack.shape)
    worst = float(slack[k])
    return FeasibilityReport(worst > margin, worst, complex(zeta[k]), int(slack.size))


@dataclass
class DiscSearchResult:
    disc: CandidateDisc
    lam_effective: float
    evaluations: int
    certified: FeasibilityReport
    mu_grid: list = field(default_factory=list)

    @property
    def bound(self) -> float:
        return 1.0 / self.lam_effective


def _budget_split(budget: int) -> tuple[int, int, int]:
    n_lam = min(40, max(10, budget // 25))
    n_grid = 6 if budget < 300 else 10
    n_mu = max(2, (budget - n_grid * n_lam) // n_lam)
    return n_lam, n_grid, n_mu


def search_disc(
    base: BasePoint,
    m: int,
    search_budget: int = DEFAULT_BUDGET,
    restrict_mu_zero: bool = False,
    radial_steps: int = GRID_STEPS,
    angular_steps: int = GRID_STEPS,
    margin: float = DISC_MARGIN,
) -> DiscSearchResult:
    """Maximize lam over feasible discs (p + lam*zeta, mu*zeta^2).

    Log-spaced grid over mu in [sqrt(delta), 1], golden section on lam for
    each mu, then golden section on mu around the best grid value.  The
    winner is re-checked on a grid 4x denser in each direction.
    """
    if search_budget < MIN_BUDGET:
        raise ValueError(f"search_budget must be >= {MIN_BUDGET}")
    domain = EggRingDomain(m)
    p = base.p
    evals = 0

    def feasible(lam: float, mu: float) -> bool:
        nonlocal evals
        evals += 1
        disc = CandidateDisc(lam, mu, base)
        return disc_feasible(disc, domain, radial_steps, angular_steps, margin).feasible

    def best_lam(mu: float, n: int) -> float:
        # outer ball at zeta -> 1 forces (p + lam)^2 + mu^2 < 1
        hi = math.sqrt(max(0.0, 1.0 - mu * mu)) - p
        if hi <= 0:
            return 0.0
        found = [0.0]

        # feasibility is monotone in lam; searching log(lam) resolves small optima
        def g(t):
            lam = math.exp(t)
            if feasible(lam, mu):
                found[0] = max(found[0], lam)
                return t
            return -math.inf

        golden_section_max(g, math.log(LAM_FLOOR * base.delta), math.log(hi), n)
        return found[0]

    if restrict_mu_zero:
        lam, mu = best_lam(0.0, min(search_budget, 60)), 0.0
        grid_vals = []
    else:
        n_lam, n_grid, n_mu = _budget_split(search_budget)
        mus = np.geomspace(math.sqrt(base.delta), 1.0, n_grid)
        grid_vals = [(float(mu), best_lam(float(mu), n_lam)) for mu in mus]
        k = int(np.argmax([v for _, v in grid_vals]))
        lo = mus[max(k - 1, 0)]
        hi = mus[min(k + 1, n_grid - 1)]
        cache: dict[float, float] = {}

        def h(mu):
            cache[mu] = best_lam(mu, n_lam)
            return cache[mu]

        if n_mu >= 2:
            golden_section_max(h, float(lo), float(hi), n_mu)
        cache.update(dict(grid_vals))
        mu, lam = max(cache.items(), key=lambda kv: (kv[1], -kv[0]))

    if lam <= 0:
        raise OptimizationError(f"no feasible disc with lam > 0 at delta={base.delta}")

    # re-certify on the denser grid, backing off lam if needed
    dense_r = radial_steps * CERTIFY_FACTOR
    dense_a = angular_steps * CERTIFY_FACTOR
    report = disc_feasible(CandidateDisc(lam, mu, base), domain, dense_r, dense_a, margin)
    shrink = 1e-6
    while not report.feasible:
        lam *= 1.0 - shrink
        shrink *= 2.0
        if shrink > 0.5:
            raise OptimizationError("dense re-certification failed for every backed-off disc")
        report = disc_feasible(CandidateDisc(lam, mu, base), domain, dense_r, dense_a, margin)

    # phi(R_MAX * zeta) is a disc on the full unit disc with derivative R_MAX * lam
    return DiscSearchResult(CandidateDisc(lam, mu, base), lam * R_MAX, evals, report, grid_vals)


def kobayashi_upper_disc(
    base: BasePoint,
    m: int,
    search_budget: int = DEFAULT_BUDGET,
    restrict_mu_zero: bool = False,
) -> MetricBound:
    res = search_disc(base, m, search_budget, restrict_mu_zero=restrict_mu_zero)
    method = "disc-search-linear" if restrict_mu_zero else "disc-search"
    return MetricBound("kobayashi", "upper", res.bound, method, base.delta, NORMAL)


def kobayashi_lower(base: BasePoint, m: int, xi: TangentVector2 = NORMAL) -> MetricBound:
    """The Kobayashi metric dominates both the Caratheodory and Sibony metrics."""
    c = caratheodory_ring(base, xi, m)
    s = sibony_lower(base, m, xi)
    top = c if c.value >= s.value else s
    return MetricBound("kobayashi", "lower", top.value, f"chain:{top.method}", base.delta, xi)


@dataclass(frozen=True)
class TangentialReport:
    delta: float
    exact: float
    disc_value: float
    mu: float
    relative_deviation: float
    tolerance: float = 0.05

    @property
    def passed(self) -> bool:
        return self.relative_deviation <= self.tolerance


def tangential_crosscheck(base: BasePoint, m: int, n_evals: int = 60) -> TangentialReport:
    """Disc search along (0, 1) against the exact ball value.

    The line through P_delta in the w-direction keeps |z| = p > 1/2, so the
    best disc (p, mu*zeta) is limited only by the outer ball.
    """
    domain = EggRingDomain(m)
    found = [0.0]

    def g(mu):
        disc = CandidateDisc(0.0, mu, base, w_degree=1)
        if disc_feasible(disc, domain).feasible:
            found[0] = max(found[0], mu)
            return mu
        return -mu

    golden_section_max(g, 0.0, 1.0, n_evals)
    mu = found[0]
    if mu <= 0:
        raise OptimizationError("no feasible tangential disc")
    disc_value = 1.0 / (mu * R_MAX)
    exact = pushforward_norm(base.p, TANGENTIAL)
    return TangentialReport(base.delta, exact, disc_value, mu, abs(disc_value - exact) / exact)
