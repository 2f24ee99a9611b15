"""Invariant metrics on the egg-ring domain {1/4 < |z|^2 + |w|^m, |z|^2 + |w|^2 < 1}."""

from .caratheodory import MetricBound, caratheodory_ring, lemma4_value
from .geometry import (
    NORMAL,
    TANGENTIAL,
    BasePoint,
    ComplexPoint2,
    EggRingDomain,
    TangentVector2,
    contains,
    egg_level,
    line_misses_inner,
    pushforward_norm,
)
from .kobayashi import (
    CandidateDisc,
    disc_feasible,
    kobayashi_lower,
    kobayashi_upper_disc,
    tangential_crosscheck,
)
from .psh import AdmissibleCandidate, HermitianForm2, certify_admissible, fd_complex_hessian, submean_test
from .sibony import (
    SibonyWitness,
    beta_threshold,
    localize_admissible,
    sibony_lower,
    sibony_upper,
    subadditive_bound,
    witness_candidate,
    witness_f,
    witness_U,
)

__version__ = "0.1.0"

__all__ = [
    "NORMAL",
    "TANGENTIAL",
    "AdmissibleCandidate",
    "BasePoint",
    "CandidateDisc",
    "ComplexPoint2",
    "EggRingDomain",
    "HermitianForm2",
    "MetricBound",
    "SibonyWitness",
    "TangentVector2",
    "beta_threshold",
    "caratheodory_ring",
    "certify_admissible",
    "contains",
    "disc_feasible",
    "egg_level",
    "fd_complex_hessian",
    "kobayashi_lower",
    "kobayashi_upper_disc",
    "lemma4_value",
    "line_misses_inner",
    "localize_admissible",
    "pushforward_norm",
    "sibony_lower",
    "sibony_upper",
    "subadditive_bound",
    "submean_test",
    "tangential_crosscheck",
    "witness_candidate",
    "witness_f",
    "witness_U",
]
