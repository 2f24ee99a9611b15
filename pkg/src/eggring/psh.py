"""Numerical certification of admissible functions.

A candidate U is admissible at P when 0 <= U <= 1, U(P) = 0 and log U is
plurisubharmonic.  Away from the seams of a max-construction the complex
Hessian of U is estimated with central differences in Wirtinger form and
checked for positive semidefiniteness; at seam points, where U is only
Lipschitz, log U is checked for the sub-mean-value property on sampled
complex lines instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import qmc

from .errors import InvalidWitnessError, SamplingError
from .geometry import ComplexPoint2, EggRingDomain, TangentVector2, contains_array

PSD_TOLERANCE = 1e-6
SUBMEAN_TOLERANCE = 1e-9
BASE_TOLERANCE = 1e-12
SEAM_FACTOR = 10.0
MIN_ACCEPTANCE = 0.01

Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]
Box = tuple[tuple[float, float], tuple[float, float], tuple[float, float], tuple[float, float]]


@dataclass(frozen=True)
class HermitianForm2:
    """Complex Hessian [[h_zz, h_zw], [conj(h_zw), h_ww]]."""

    h_zz: float
    h_ww: float
    h_zw: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "h_zz", float(np.real(self.h_zz)))
        object.__setattr__(self, "h_ww", float(np.real(self.h_ww)))
        object.__setattr__(self, "h_zw", complex(self.h_zw))

    @classmethod
    def from_matrix(cls, H) -> "HermitianForm2":
        H = np.asarray(H, dtype=complex)
        if H.shape != (2, 2):
            raise ValueError("expected a 2x2 matrix")
        if abs(H[0, 0].imag) > 1e-12 or abs(H[1, 1].imag) > 1e-12 or abs(H[0, 1] - np.conj(H[1, 0])) > 1e-12:
            raise ValueError("matrix is not Hermitian")
        return cls(H[0, 0].real, H[1, 1].real, H[0, 1])

    def matrix(self) -> np.ndarray:
        return np.array([[self.h_zz, self.h_zw], [np.conj(self.h_zw), self.h_ww]], dtype=complex)

    def eigenvalues(self) -> tuple[float, float]:
        mid = 0.5 * (self.h_zz + self.h_ww)
        rad = math.hypot(0.5 * (self.h_zz - self.h_ww), abs(self.h_zw))
        return mid - rad, mid + rad

    def min_eigenvalue(self) -> float:
        return self.eigenvalues()[0]

    def __call__(self, xi: TangentVector2) -> float:
        """Value of the form on (xi, conj(xi))."""
        a, b = xi.xi_z, xi.xi_w
        return (
            self.h_zz * abs(a) ** 2
            + self.h_ww * abs(b) ** 2
            + 2.0 * (self.h_zw * a * b.conjugate()).real
        )

    def sesquilinear(self, xi1: TangentVector2, xi2: TangentVector2) -> complex:
        return complex(xi1.as_array() @ self.matrix() @ np.conj(xi2.as_array()))

    def __add__(self, other: "HermitianForm2") -> "HermitianForm2":
        return HermitianForm2(self.h_zz + other.h_zz, self.h_ww + other.h_ww, self.h_zw + other.h_zw)

    def __mul__(self, s: float) -> "HermitianForm2":
        return HermitianForm2(s * self.h_zz, s * self.h_ww, s * self.h_zw)

    __rmul__ = __mul__


@dataclass
class AdmissibleCandidate:
    """A candidate admissible function together with its certification hints.

    ``evaluate`` is vectorized over complex arrays (z, w).  ``branch`` labels
    the active piece of a max-construction so seams can be located exactly;
    ``fd_steps`` and ``submean_radius`` give local step sizes; ``focus`` lists
    boxes (re z, im z, re w, im w) that receive extra samples.
    """

    evaluate: Evaluator
    base: ComplexPoint2
    tag: str
    branch: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    fd_steps: Optional[Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]] = None
    submean_radius: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    focus: Sequence[Box] = ()
    base_hessian: Optional[HermitianForm2] = None

    def __call__(self, q: ComplexPoint2) -> float:
        return float(self.evaluate(np.array([q.z]), np.array([q.w]))[0])


# --- finite differences ------------------------------------------------------

def _stencil(hz, hw):
    """Offsets (dz, dw) of the 25-point Wirtinger stencil, as a list."""
    offs = [(0, 0)]
    for u in (1, -1, 1j, -1j):
        offs.append((u * hz, 0 * hw))
    for u in (1, -1, 1j, -1j):
        offs.append((0 * hz, u * hw))
    for a in (1, 1j):
        for b in (1, 1j):
            for sa, sb in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                offs.append((sa * a * hz, sb * b * hw))
    return offs


def fd_hessian_arrays(U: Evaluator, z, w, hz, hw):
    """Vectorized central-difference complex Hessian.

    Returns (h_zz, h_ww, h_zw) arrays.  ``hz``/``hw`` are step sizes per
    point (scalars broadcast).
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    hz = np.broadcast_to(np.asarray(hz, dtype=float), z.shape)
    hw = np.broadcast_to(np.asarray(hw, dtype=float), z.shape)
    vals = [U(z + dz, w + dw) for dz, dw in _stencil(hz, hw)]
    c = vals[0]
    h_zz = (vals[1] + vals[2] + vals[3] + vals[4] - 4.0 * c) / (4.0 * hz * hz)
    h_ww = (vals[5] + vals[6] + vals[7] + vals[8] - 4.0 * c) / (4.0 * hw * hw)
    mixed = []
    for k in range(4):
        pp, pm, mp, mm = vals[9 + 4 * k: 13 + 4 * k]
        mixed.append((pp - pm - mp + mm) / (4.0 * hz * hw))
    u_xu, u_xv, u_yu, u_yv = mixed
    h_zw = 0.25 * ((u_xu + u_yv) + 1j * (u_xv - u_yu))
    return h_zz, h_ww, h_zw


def _stencil_inside(domain: EggRingDomain, z, w, hz, hw, scale=1.0):
    ok = np.ones(np.shape(z), dtype=bool)
    for dz, dw in _stencil(hz * scale, hw * scale):
        ok &= contains_array(domain, z + dz, w + dw)
    return ok


def fd_complex_hessian(
    U: Evaluator,
    q: ComplexPoint2,
    h: float | tuple[float, float] = 1e-5,
    domain: Optional[EggRingDomain] = None,
) -> HermitianForm2:
    """Complex Hessian of U at q by central differences (error O(h^2)).

    ``h`` may be one step or a pair (step in z, step in w).  When a domain
    is given the whole stencil must lie inside it.
    """
    hz, hw = (h, h) if np.isscalar(h) else h
    z = np.array([q.z])
    w = np.array([q.w])
    if domain is not None and not _stencil_inside(domain, z, w, hz, hw)[0]:
        raise SamplingError(f"finite-difference stencil around {q} leaves the domain")
    a, b, c = fd_hessian_arrays(U, z, w, hz, hw)
    return HermitianForm2(a[0], b[0], c[0])


def min_eigenvalue_arrays(h_zz, h_ww, h_zw):
    mid = 0.5 * (h_zz + h_ww)
    rad = np.hypot(0.5 * (h_zz - h_ww), np.abs(h_zw))
    return mid - rad


# --- sub-mean-value test --------------------------------------------------------

def line_directions(n_lines: int) -> list[TangentVector2]:
    """Deterministic unit directions in C^2, starting with the two axes."""
    dirs = [TangentVector2(1, 0), TangentVector2(0, 1)]
    golden = (math.sqrt(5) - 1) / 2
    k = 1
    while len(dirs) < n_lines:
        t = (k * golden) % 1.0
        s = ((k * golden * golden) % 1.0) * 2 * math.pi
        r = ((k * 0.7548776662466927) % 1.0) * 2 * math.pi
        a = math.sqrt(t)
        b = math.sqrt(1 - t)
        dirs.append(TangentVector2(a * complex(math.cos(s), math.sin(s)), b * complex(math.cos(r), math.sin(r))))
        k += 1
    return dirs[:n_lines]


def submean_gaps(U: Evaluator, z, w, radius, directions, n_angles: int = 64):
    """Per point, min over directions of (circle mean of log U) - log U(center).

    Points where U(center) == 0 get +inf (the test passes vacuously).
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    radius = np.broadcast_to(np.asarray(radius, dtype=float), z.shape)
    theta = np.exp(2j * np.pi * np.arange(n_angles) / n_angles)
    with np.errstate(divide="ignore"):
        center = np.log(U(z, w))
    worst = np.full(z.shape, np.inf)
    for d in directions:
        ring = radius[..., None] * theta
        zz = z[..., None] + ring * d.xi_z
        ww = w[..., None] + ring * d.xi_w
        with np.errstate(divide="ignore"):
            mean = np.log(U(zz, ww)).mean(axis=-1)
        worst = np.minimum(worst, mean - center)
    worst[np.isneginf(center)] = np.inf
    return worst


def _circles_inside(domain, z, w, radius, directions, n_angles):
    theta = np.exp(2j * np.pi * np.arange(n_angles) / n_angles)
    ok = contains_array(domain, z, w)
    for d in directions:
        ring = radius[..., None] * theta
        ok &= contains_array(domain, z[..., None] + ring * d.xi_z, w[..., None] + ring * d.xi_w).all(axis=-1)
    return ok


def submean_test(
    U: Evaluator,
    q: ComplexPoint2,
    radius: float,
    n_lines: int = 8,
    n_angles: int = 64,
    domain: Optional[EggRingDomain] = None,
    directions: Optional[Sequence[TangentVector2]] = None,
) -> bool:
    """log U(q) <= mean of log U over circles of ``radius`` on complex lines."""
    dirs = list(directions) if directions is not None else line_directions(n_lines)
    z = np.array([q.z])
    w = np.array([q.w])
    r = np.array([float(radius)])
    if domain is not None and not _circles_inside(domain, z, w, r, dirs, n_angles)[0]:
        raise SamplingError(f"sub-mean circles of radius {radius} around {q} leave the domain")
    return bool(submean_gaps(U, z, w, r, dirs, n_angles)[0] >= -SUBMEAN_TOLERANCE)


# --- domain sampling ------------------------------------------------------------------

FULL_BOX: Box = ((-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0))


def sample_domain(domain: EggRingDomain, n: int, seed: int, box: Box = FULL_BOX):
    """Scrambled Sobol points of the box, rejected against the domain.

    Returns complex arrays (z, w) of length n.
    """
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    sobol = qmc.Sobol(d=4, scramble=True, seed=seed)
    zs, ws = [], []
    kept = drawn = 0
    batch = 1 << max(10, int(math.ceil(math.log2(max(n, 2)))))
    while kept < n:
        x = qmc.scale(sobol.random(batch), lo, hi)
        drawn += batch
        z = x[:, 0] + 1j * x[:, 1]
        w = x[:, 2] + 1j * x[:, 3]
        ok = contains_array(domain, z, w)
        zs.append(z[ok])
        ws.append(w[ok])
        kept += int(ok.sum())
        if kept / drawn < MIN_ACCEPTANCE and drawn >= 4 * batch:
            raise SamplingError(f"rejection sampling acceptance {kept / drawn:.2%} is below 1%")
    return np.concatenate(zs)[:n], np.concatenate(ws)[:n]


# --- certification ---------------------------------------------------------------------

@dataclass
class PshCertificate:
    min_eigenvalue_seen: float
    worst_point: Optional[ComplexPoint2]
    points_checked: int
    seam_points_skipped: int
    range_ok: bool
    base_value_ok: bool
    submean_failures: int = 0
    boundary_points_skipped: int = 0
    max_value: float = 0.0
    min_value: float = 0.0
    tolerance: float = PSD_TOLERANCE
    tag: str = ""
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (
            self.min_eigenvalue_seen >= -self.tolerance
            and self.range_ok
            and self.base_value_ok
            and self.submean_failures == 0
        )

    def summary(self) -> str:
        wp = "-" if self.worst_point is None else f"({self.worst_point.z:.6g}, {self.worst_point.w:.6g})"
        lines = [
            f"candidate            {self.tag}",
            f"passed               {self.passed}",
            f"points checked       {self.points_checked}",
            f"range [0,1]          {self.range_ok}  (min {self.min_value:.3e}, max {self.max_value:.6f})",
            f"base value 0         {self.base_value_ok}",
            f"min FD eigenvalue    {self.min_eigenvalue_seen:.3e}  (tolerance -{self.tolerance:g})",
            f"worst FD point       {wp}",
            f"seam points          {self.seam_points_skipped}  (sub-mean failures {self.submean_failures})",
            f"boundary skipped     {self.boundary_points_skipped}",
        ]
        return "\n".join(lines + self.notes)


def _draw_samples(candidate: AdmissibleCandidate, domain: EggRingDomain, n: int, seed: int):
    boxes = list(candidate.focus)
    if not boxes:
        return sample_domain(domain, n, seed)
    # half over the whole domain, the rest split evenly across focus boxes
    n_global = n - (n // 2)
    parts = [sample_domain(domain, n_global, seed)]
    rest = n - n_global
    for k, box in enumerate(boxes):
        share = rest // len(boxes) + (1 if k < rest % len(boxes) else 0)
        parts.append(sample_domain(domain, share, seed + 1 + k, box))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _near_seam(candidate, z, w, hz, hw):
    b0 = candidate.branch(z, w)
    seam = np.zeros(z.shape, dtype=bool)
    for scale in (1.0, 0.5 * SEAM_FACTOR, SEAM_FACTOR):
        for dz, dw in _stencil(hz * scale, hw * scale)[1:]:
            seam |= candidate.branch(z + dz, w + dw) != b0
    return seam


def certify_admissible(
    candidate: AdmissibleCandidate,
    domain: EggRingDomain,
    sample_count: int = 10_000,
    seed: int = 0,
    tolerance: float = PSD_TOLERANCE,
    n_lines: int = 8,
    n_angles: int = 64,
    default_step: float = 1e-4,
) -> PshCertificate:
    """Sample the domain and check every admissibility condition numerically."""
    if sample_count < 1:
        raise ValueError("sample_count must be positive")
    z, w = _draw_samples(candidate, domain, sample_count, seed)
    U = candidate.evaluate

    vals = U(z, w)
    range_ok = bool(np.all(np.isfinite(vals)) and vals.min() >= 0.0 and vals.max() <= 1.0)
    base_val = candidate(candidate.base)
    base_ok = abs(base_val) <= BASE_TOLERANCE

    if candidate.fd_steps is not None:
        hz, hw = candidate.fd_steps(z, w)
    else:
        hz = np.full(z.shape, default_step)
        hw = np.full(z.shape, default_step)
    hz = np.broadcast_to(hz, z.shape).astype(float)
    hw = np.broadcast_to(hw, z.shape).astype(float)

    inside = _stencil_inside(domain, z, w, hz, hw)
    if candidate.branch is not None:
        seam = _near_seam(candidate, z, w, hz, hw)
    else:
        seam = np.zeros(z.shape, dtype=bool)

    smooth = inside & ~seam
    min_eig = math.inf
    worst = None
    if smooth.any():
        hzz, hww, hzw = fd_hessian_arrays(U, z[smooth], w[smooth], hz[smooth], hw[smooth])
        eig = min_eigenvalue_arrays(hzz, hww, hzw)
        eig = np.where(np.isfinite(eig), eig, -np.inf)
        k = int(np.argmin(eig))
        min_eig = float(eig[k])
        worst = ComplexPoint2(z[smooth][k], w[smooth][k])

    # seam points: sub-mean-value test on shrinking circles that stay inside
    boundary = int((~inside).sum())
    failures = 0
    n_seam = int(seam.sum())
    if n_seam:
        dirs = line_directions(n_lines)
        zs, ws = z[seam], w[seam]
        if candidate.submean_radius is not None:
            r = np.asarray(candidate.submean_radius(zs, ws), dtype=float).copy()
        else:
            r = np.full(zs.shape, 1e-3)
        ok = _circles_inside(domain, zs, ws, r, dirs, n_angles)
        for _ in range(12):
            if ok.all():
                break
            r = np.where(ok, r, 0.5 * r)
            ok = _circles_inside(domain, zs, ws, r, dirs, n_angles)
        boundary += int((~ok).sum())
        gaps = submean_gaps(U, zs[ok], ws[ok], r[ok], dirs, n_angles)
        failures = int((gaps < -SUBMEAN_TOLERANCE).sum())

    return PshCertificate(
        min_eigenvalue_seen=min_eig if worst is not None else 0.0,
        worst_point=worst,
        points_checked=int(z.size),
        seam_points_skipped=n_seam,
        range_ok=range_ok,
        base_value_ok=base_ok,
        submean_failures=failures,
        boundary_points_skipped=boundary,
        max_value=float(vals.max()),
        min_value=float(vals.min()),
        tolerance=tolerance,
        tag=candidate.tag,
    )


def check_psd(H: HermitianForm2, tolerance: float = PSD_TOLERANCE) -> None:
    if H.min_eigenvalue() < -tolerance:
        raise InvalidWitnessError(f"Hessian is not positive semidefinite (min eigenvalue {H.min_eigenvalue():.3e})")
