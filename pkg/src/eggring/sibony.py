"""Two-sided bounds for the Sibony metric at P_delta.

Lower bound: an explicit admissible function whose complex Hessian at
P_delta is known in closed form.  Upper bound: split the normal direction
into two directions whose complex lines miss the egg, then add the exact
ball values (the metric is subadditive).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import qmc

from .caratheodory import MetricBound
from .errors import ConstructionError, DomainError, InvalidWitnessError, PoleError
from .geometry import (
    NORMAL,
    BasePoint,
    ComplexPoint2,
    EggRingDomain,
    TangentVector2,
    contains,
    contains_array,
)
from .psh import AdmissibleCandidate, HermitianForm2, PSD_TOLERANCE

DEFAULT_C = 1.0 / 3.0
DEFAULT_L = 200.0
DEFAULT_L_PRIME = math.log(200.0)
SUBADDITIVE_SLACK = 1e-12

__all__ = [
    "AdmissibleCandidate",
    "SibonyWitness",
    "witness_f",
    "witness_U",
    "witness_candidate",
    "sibony_lower",
    "beta_threshold",
    "sibony_upper",
    "subadditive_bound",
    "localize_admissible",
    "localization_level",
]


def epsilon_bound(delta: float, m: int) -> float:
    """Exclusive upper limit on the exponent perturbation epsilon."""
    return m * math.log(0.96) / math.log(delta)


@dataclass(frozen=True)
class SibonyWitness:
    delta: float
    m: int
    c: float = DEFAULT_C
    L: float = DEFAULT_L
    L_prime: float = DEFAULT_L_PRIME
    epsilon: Optional[float] = field(default=None)

    def __post_init__(self):
        if not 0 < self.delta < 0.25:
            raise DomainError(f"delta must lie in (0, 1/4), got {self.delta}")
        if int(self.m) != self.m or self.m < 2:
            raise DomainError(f"m must be an integer >= 2, got {self.m}")
        if not 0 < self.c <= DEFAULT_C:
            raise DomainError(f"c must lie in (0, 1/3], got {self.c}")
        bound = epsilon_bound(self.delta, self.m)
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", 0.5 * bound)
        elif not 0 < self.epsilon < bound:
            raise DomainError(f"epsilon must lie in (0, {bound:.6g}), got {self.epsilon}")

    @property
    def p(self) -> float:
        return 0.5 + self.delta

    @property
    def pole(self) -> float:
        return self.p - 2.0 * self.delta

    @property
    def scale(self) -> float:
        """exp(-L') normalization."""
        return math.exp(-self.L_prime)

    @property
    def patch_radius(self) -> float:
        """|w| beyond which only the power branch is used."""
        return self.c ** (2.0 / self.m) * self.delta ** (1.0 / self.m)

    @property
    def ring(self) -> tuple[float, float]:
        """|w|-ring on which the power branch must dominate the max."""
        return (self.delta / 16.0) ** (1.0 / self.m), (self.delta / 9.0) ** (1.0 / self.m)

    @property
    def smooth_radius(self) -> float:
        """|w| below which exp(u) reduces to exp(-L') f near P_delta (may underflow to 0)."""
        return (1.0 / self.L) ** (1.0 / self.epsilon)

    def f(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.delta ** (2.0 / self.m) * np.abs((z - self.p) / (z - self.pole)) ** 2

    def branches(self, z, w):
        """The two quantities compared by the max: f + |w|^2 and L|w|^(2+eps)."""
        aw = np.abs(np.asarray(w, dtype=complex))
        return self.f(z) + aw ** 2, self.L * aw ** (2.0 + self.epsilon)

    def evaluate(self, z, w):
        a, b = self.branches(z, w)
        inner = np.abs(np.asarray(w)) < self.patch_radius
        return self.scale * np.where(inner, np.maximum(a, b), b)

    def branch(self, z, w):
        a, b = self.branches(z, w)
        inner = np.abs(np.asarray(w)) < self.patch_radius
        return np.where(inner, np.where(a >= b, 0, 1), 2)

    def fd_steps(self, z, w):
        z = np.asarray(z, dtype=complex)
        aw = np.abs(np.asarray(w, dtype=complex))
        hz = np.clip(1e-3 * np.abs(z - self.pole), 1e-9, 1e-4)
        # |w|^2 is exact under any step, but the power branch needs steps relative to |w|
        hw = np.where(self.branch(z, w) == 0, 1e-4, np.clip(1e-2 * aw, 1e-7, 1e-4))
        return hz, hw

    def submean_radius(self, z, w):
        z = np.asarray(z, dtype=complex)
        r = np.minimum(0.5 * np.abs(np.asarray(w)), 0.5 * np.abs(z - self.p))
        r = np.minimum(r, self.delta / 100.0)
        return np.where(r > 0, r, self.delta / 100.0)

    def focus_boxes(self):
        d = self.delta
        rho = self.ring[1]
        near = 0.08 * d ** (1.0 / self.m)
        zbox = ((self.p - 8 * d, self.p + 8 * d), (-8 * d, 8 * d))
        return [
            ((-1.0, 1.0), (-1.0, 1.0), (-2 * rho, 2 * rho), (-2 * rho, 2 * rho)),
            zbox + ((-2 * rho, 2 * rho), (-2 * rho, 2 * rho)),
            zbox + ((-near, near), (-near, near)),
        ]

    def base_hessian(self) -> HermitianForm2:
        """Complex Hessian of exp(u) at P_delta.

        Near P_delta exp(u) = exp(-L')(f(z) + |w|^2) and the z-second
        derivative of f at p is delta^(2/m) / (4 delta^2).
        """
        s = self.scale
        return HermitianForm2(s * self.delta ** (2.0 / self.m - 2.0) / 4.0, s, 0j)


def witness_f(z: complex, delta: float, m: int) -> float:
    p = 0.5 + delta
    den = z - (p - 2.0 * delta)
    if den == 0:
        raise PoleError(f"z = {z} is the pole p - 2 delta")
    val = delta ** (2.0 / m) * abs((z - p) / den) ** 2
    if not math.isfinite(val):
        raise PoleError(f"z = {z} is numerically at the pole")
    return val


def witness_U(q: ComplexPoint2, witness: SibonyWitness) -> float:
    """exp(u)(q): the admissible function, which lies in [0, 1] on the domain."""
    if not contains(EggRingDomain(witness.m), q):
        raise DomainError(f"{q} is outside the domain")
    return float(witness.evaluate(np.array([q.z]), np.array([q.w]))[0])


def witness_candidate(witness: SibonyWitness) -> AdmissibleCandidate:
    return AdmissibleCandidate(
        evaluate=witness.evaluate,
        base=ComplexPoint2(witness.p, 0),
        tag=f"sibony-witness(m={witness.m}, delta={witness.delta:g})",
        branch=witness.branch,
        fd_steps=witness.fd_steps,
        submean_radius=witness.submean_radius,
        focus=witness.focus_boxes(),
        base_hessian=witness.base_hessian(),
    )


def sibony_lower(
    base: BasePoint,
    m: int,
    xi: TangentVector2 = NORMAL,
    witness: Optional[SibonyWitness] = None,
) -> MetricBound:
    """sqrt of the witness Hessian at P_delta in direction xi."""
    witness = witness or SibonyWitness(base.delta, m)
    val = witness.base_hessian()(xi)
    return MetricBound("sibony", "lower", math.sqrt(max(val, 0.0)), "witness-hessian", base.delta, xi)


def beta_threshold(delta: float, m: int) -> float:
    """Slope |v| beyond which every line P_delta + C(1, v) misses the egg.

    Closed form (K_m / delta)^((m-1)/m) with K_m = m^(-1/(m-1)) - m^(-m/(m-1)).
    Sufficient, not necessary.
    """
    if not 0 < delta <= 0.25:
        raise DomainError(f"delta must lie in (0, 1/4], got {delta}")
    if m < 2:
        raise DomainError("m must be >= 2")
    k = m ** (-1.0 / (m - 1)) - m ** (-m / (m - 1.0))
    return (k / delta) ** ((m - 1.0) / m)


def sibony_upper(base: BasePoint, m: int) -> MetricBound:
    """Upper bound in the normal direction from the split (1/2, v) + (1/2, -v) at |v| = beta."""
    beta = beta_threshold(base.delta, m)
    s = 1.0 - base.p ** 2
    val = (2.0 / s) * math.sqrt(0.25 + s * beta * beta)
    return MetricBound("sibony", "upper", val, "beta-split", base.delta, NORMAL)


def subadditive_bound(H, xi1: TangentVector2, xi2: TangentVector2, tolerance: float = PSD_TOLERANCE) -> bool:
    """Check sqrt(H(xi1 + xi2)) <= sqrt(H(xi1)) + sqrt(H(xi2)) for one PSD form."""
    if not isinstance(H, HermitianForm2):
        H = HermitianForm2.from_matrix(H)
    if H.min_eigenvalue() < -tolerance:
        raise InvalidWitnessError(f"form is not PSD (min eigenvalue {H.min_eigenvalue():.3e})")
    lhs = math.sqrt(max(H(xi1 + xi2), 0.0))
    rhs = math.sqrt(max(H(xi1), 0.0)) + math.sqrt(max(H(xi2), 0.0))
    return lhs <= rhs + SUBADDITIVE_SLACK


# --- localization ------------------------------------------------------------------

def localization_level(r: float, diameter: float = 2.0) -> float:
    """Smallest shift L keeping exp(-L) * 2|Z - q|^4 / r^4 <= 1 on a set of given diameter."""
    return math.log(2.0 * diameter ** 4 / r ** 4)


def localize_admissible(
    u: AdmissibleCandidate,
    q: ComplexPoint2,
    r: float,
    eps_loc: float,
    L_loc: float,
    domain: Optional[EggRingDomain] = None,
    diameter: float = 2.0,
    seam_samples: int = 4096,
) -> AdmissibleCandidate:
    """Extend a candidate known near q to the whole domain.

    Inside B(q, r) the result is exp(-L)*max(u + eps|Z-q|^2, 2|Z-q|^4/r^4),
    outside it is exp(-L)*2|Z-q|^4/r^4.  Near q the first branch wins, so
    the Hessian at q is exp(-L)*(H_u + eps*I).
    """
    if r <= 0:
        raise ValueError("r must be positive")
    if eps_loc <= 0 or eps_loc * diameter ** 2 > 0.5:
        raise ValueError("need 0 < eps_loc * diameter^2 <= 1/2")
    qz, qw = q.z, q.w
    r4 = r ** 4
    scale = math.exp(-L_loc)

    def parts(z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        d2 = np.abs(z - qz) ** 2 + np.abs(w - qw) ** 2
        far = 2.0 * d2 * d2 / r4
        inside = d2 < r * r
        near = np.full(z.shape, -np.inf)
        if inside.any():
            near[inside] = u.evaluate(z[inside], w[inside]) + eps_loc * d2[inside]
        return inside, near, far

    # the two branches must agree in the max at the sphere |Z - q| = r
    x = qmc.Sobol(d=3, scramble=True, seed=12345).random(seam_samples)
    a = np.sqrt(x[:, 0])
    b = np.sqrt(1.0 - x[:, 0])
    sz = qz + 0.999999 * r * a * np.exp(2j * np.pi * x[:, 1])
    sw = qw + 0.999999 * r * b * np.exp(2j * np.pi * x[:, 2])
    keep = contains_array(domain, sz, sw) if domain is not None else np.ones(sz.shape, dtype=bool)
    with np.errstate(all="ignore"):
        uv = u.evaluate(sz[keep], sw[keep])
    ok = np.isfinite(uv)
    if np.any(uv[ok] + eps_loc * r * r > 2.0 + 1e-12):
        raise ConstructionError("inner branch exceeds the outer branch on the patch sphere")

    def evaluate(z, w):
        inside, near, far = parts(z, w)
        return scale * np.where(inside, np.maximum(near, far), far)

    def branch(z, w):
        inside, near, far = parts(z, w)
        if u.branch is not None:
            inner = np.zeros(inside.shape, dtype=int)
            if inside.any():
                inner[inside] = u.branch(np.asarray(z)[inside], np.asarray(w)[inside])
        else:
            inner = 0
        return np.where(inside & (near >= far), 10 + inner, 100)

    def fd_steps(z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        inside, near, far = parts(z, w)
        use_u = inside & (near >= far)
        hz = np.full(z.shape, 1e-4)
        hw = np.full(z.shape, 1e-4)
        if u.fd_steps is not None and use_u.any():
            uz, uw = u.fd_steps(z[use_u], w[use_u])
            hz[use_u] = uz
            hw[use_u] = uw
        return hz, hw

    def submean_radius(z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        out = np.full(z.shape, 1e-3)
        if u.submean_radius is not None:
            inside = np.abs(z - qz) ** 2 + np.abs(w - qw) ** 2 < r * r
            if inside.any():
                out[inside] = np.minimum(1e-3, u.submean_radius(z[inside], w[inside]))
        return out

    base_h = None
    if u.base_hessian is not None:
        base_h = scale * (u.base_hessian + HermitianForm2(eps_loc, eps_loc, 0j))

    return AdmissibleCandidate(
        evaluate=evaluate,
        base=q,
        tag=f"localized[{u.tag}](r={r:g})",
        branch=branch,
        fd_steps=fd_steps,
        submean_radius=submean_radius,
        focus=list(u.focus),
        base_hessian=base_h,
    )


# --- sample-based checks of the witness construction -----------------------------

def _sobol(d: int, n: int, seed: int) -> np.ndarray:
    k = max(1, int(math.ceil(math.log2(n))))
    return qmc.Sobol(d=d, scramble=True, seed=seed).random_base2(k)[:n]


def _annulus_points(r_in: float, r_out: float, n: int, seed: int, pack: float):
    """Area-uniform Sobol points of {r_in < |z| < r_out}; half packed within ``pack`` of z = r_in."""
    x = _sobol(2, n, seed)
    k = n // 2
    rad = np.sqrt(r_in ** 2 + x[:, 0] * (r_out ** 2 - r_in ** 2))
    ang = 2 * np.pi * x[:, 1]
    # f peaks on the inner circle next to the pole
    rad[:k] = r_in + x[:k, 0] * pack
    ang[:k] = (2 * x[:k, 1] - 1) * pack / r_in
    return rad * np.exp(1j * ang)


def annulus_f_max(witness: SibonyWitness, n: int = 10_000, seed: int = 0) -> float:
    """max f / delta^(2/m) over samples of {1/4 - c^2 delta < |z|^2 < 1}."""
    r_in = math.sqrt(0.25 - witness.c ** 2 * witness.delta)
    z = _annulus_points(r_in, 1.0, n, seed, pack=2 * witness.delta)
    return float(witness.f(z).max() / witness.delta ** (2.0 / witness.m))


def patch_ring_dominance(witness: SibonyWitness, n: int = 10_000, seed: int = 0) -> float:
    """min of L|w|^(2+eps) - (f + |w|^2) over domain samples with |w| in the patch ring.

    Positive means the power branch serves the whole ring.
    """
    lo, hi = witness.ring
    x = _sobol(4, n, seed)
    aw = np.sqrt(lo ** 2 + x[:, 0] * (hi ** 2 - lo ** 2))
    w = aw * np.exp(2j * np.pi * x[:, 1])
    # |z|^2 > 1/4 - |w|^m keeps the point outside the egg
    r_in = np.sqrt(np.maximum(0.25 - aw ** witness.m, 0.0))
    rad = np.sqrt(r_in ** 2 + x[:, 2] * (1.0 - aw ** 2 - r_in ** 2))
    z = rad * np.exp(2j * np.pi * x[:, 3])
    dom = EggRingDomain(witness.m)
    keep = contains_array(dom, z, w)
    a, b = witness.branches(z[keep], w[keep])
    return float((b - a).min())
