"""Derivative-free maximization on an interval."""

from __future__ import annotations

import math
from typing import Callable

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI2 = (3 - math.sqrt(5)) / 2  # 1 / phi^2


def golden_section_max(f: Callable[[float], float], a: float, b: float, n_evals: int):
    """Golden-section search for the maximum of a unimodal f on [a, b].

    Uses exactly ``n_evals`` evaluations (at least 2).  Returns
    (a, b, x_best, f_best) where [a, b] is the final bracket and x_best
    the best point evaluated.
    """
    if n_evals < 2:
        raise ValueError("golden section needs at least two evaluations")
    a, b = min(a, b), max(a, b)
    h = b - a
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    fc = f(c)
    fd = f(d)
    best = (c, fc) if fc >= fd else (d, fd)
    for _ in range(n_evals - 2):
        if fc >= fd:
            b, d, fd = d, c, fc
            h = INV_PHI * h
            c = a + INV_PHI2 * h
            fc = f(c)
            if fc > best[1]:
                best = (c, fc)
        else:
            a, c, fc = c, d, fd
            h = INV_PHI * h
            d = a + INV_PHI * h
            fd = f(d)
            if fd > best[1]:
                best = (d, fd)
    return a, b, best[0], best[1]


def bisect_threshold(pred: Callable[[float], bool], lo: float, hi: float, n_iter: int = 60):
    """Boundary of a monotone predicate: pred(lo) true, pred(hi) false.

    Returns (lo, hi) after ``n_iter`` halvings.
    """
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo, hi
