import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eggring.errors import DegenerateDirectionError, DomainError
from eggring.geometry import (
    BasePoint,
    ComplexPoint2,
    EggRingDomain,
    TangentVector2,
    ball_automorphism,
    contains,
    contains_array,
    egg_level,
    line_min_level,
    line_misses_inner,
    pushforward_norm,
)

from conftest import ball_metric


@pytest.mark.parametrize(
    "m, q, expected",
    [
        (2, (0.5, 0), 0.25),
        (2, (0.51, 0), 0.2601),
        (4, (0, 0.5), 0.0625),
    ],
)
def test_egg_level(m, q, expected):
    assert egg_level(EggRingDomain(m), ComplexPoint2(*q)) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize(
    "q, inside",
    [((0.6, 0), True), ((0.5, 0), False), ((0.9, 0.5), False), ((0.3, 0.6), True), ((0, 0), False)],
)
def test_contains(egg2, q, inside):
    assert contains(egg2, ComplexPoint2(*q)) is inside


def test_contains_margin(egg2):
    q = ComplexPoint2(0.51, 0)
    assert contains(egg2, q, 0.0)
    assert not contains(egg2, q, 0.02)
    with pytest.raises(DomainError):
        contains(egg2, q, -1.0)


def test_contains_agrees_with_defining_functions():
    rng = np.random.default_rng(7)
    x = rng.uniform(-1.1, 1.1, size=(1_000_000, 4))
    z = x[:, 0] + 1j * x[:, 1]
    w = x[:, 2] + 1j * x[:, 3]
    for m in (2, 3):
        dom = EggRingDomain(m)
        rho_inner = 0.25 - (np.abs(z) ** 2 + np.abs(w) ** m)
        rho_outer = np.abs(z) ** 2 + np.abs(w) ** 2 - 1.0
        expected = (rho_inner < 0) & (rho_outer < 0)
        assert np.array_equal(contains_array(dom, z, w), expected)


def test_domain_validation():
    with pytest.raises(DomainError):
        EggRingDomain(1)
    with pytest.raises(DomainError):
        EggRingDomain(2, variant="egg")
    with pytest.raises(DomainError):
        BasePoint(0.3)
    with pytest.raises(DomainError):
        BasePoint(0.0)
    with pytest.raises(DomainError):
        ComplexPoint2(float("nan"), 0)
    with pytest.raises(DomainError):
        TangentVector2(0, complex(float("inf"), 0))


def test_base_point():
    b = BasePoint(0.01)
    assert b.p == pytest.approx(0.51)
    assert b.point == ComplexPoint2(0.51, 0)


@pytest.mark.parametrize(
    "p, xi, expected",
    [
        (0.6, (1, 0), 1.5625),
        (0.6, (0, 1), 1.25),
        (0.5 + 1e-9, (0, 0), 0.0),
    ],
)
def test_pushforward_norm_examples(p, xi, expected):
    assert pushforward_norm(p, TangentVector2(*xi)) == pytest.approx(expected, rel=1e-14, abs=0)


def test_pushforward_matches_finite_difference_of_automorphism():
    p, h = 0.6, 1e-6
    for xi in [TangentVector2(1, 0), TangentVector2(0, 1), TangentVector2(0.3 - 0.2j, 0.7j)]:
        plus = ball_automorphism(p, p + h * xi.xi_z, h * xi.xi_w)
        minus = ball_automorphism(p, p - h * xi.xi_z, -h * xi.xi_w)
        d = [(a - b) / (2 * h) for a, b in zip(plus, minus)]
        fd = math.hypot(abs(d[0]), abs(d[1]))
        assert pushforward_norm(p, xi) == pytest.approx(fd, rel=1e-8)


def test_automorphism_sends_base_to_origin_and_preserves_ball():
    p = 0.7
    assert ball_automorphism(p, p, 0) == (0, 0)
    rng = np.random.default_rng(1)
    v = rng.normal(size=(1000, 4))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    z = v[:, 0] + 1j * v[:, 1]
    w = v[:, 2] + 1j * v[:, 3]
    a, b = ball_automorphism(p, z, w)
    assert np.allclose(np.abs(a) ** 2 + np.abs(b) ** 2, 1.0)


def test_pushforward_domain_error():
    with pytest.raises(DomainError):
        pushforward_norm(1.0, TangentVector2(1, 0))
    with pytest.raises(DomainError):
        pushforward_norm(0.0, TangentVector2(1, 0))


complexes = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@given(p=st.floats(0.01, 0.99), a=complexes, b=complexes)
@settings(max_examples=200)
def test_pushforward_agrees_with_ball_metric(p, a, b):
    xi = TangentVector2(a, b)
    assert pushforward_norm(p, xi) == pytest.approx(ball_metric([p, 0], [a, b]), rel=1e-12, abs=1e-100)


@given(p=st.floats(0.01, 0.99), a=complexes, b=complexes, t=st.floats(-50, 50))
@settings(max_examples=200)
def test_pushforward_homogeneous(p, a, b, t):
    xi = TangentVector2(a, b)
    assert pushforward_norm(p, xi * t) == pytest.approx(abs(t) * pushforward_norm(p, xi), rel=1e-12, abs=1e-100)


def test_pushforward_tends_to_euclidean_at_center():
    xi = TangentVector2(0.3 + 0.4j, -1.2)
    assert pushforward_norm(1e-9, xi) == pytest.approx(xi.norm(), rel=1e-12)


@pytest.mark.parametrize(
    "P, xi, expected",
    [
        ((0.6, 0), (0, 1), True),
        ((0.51, 0), (1, 0), False),
        ((0.51, 0), (1, 10), True),
    ],
)
def test_line_misses_inner_examples(egg2, P, xi, expected):
    assert line_misses_inner(egg2, ComplexPoint2(*P), TangentVector2(*xi)) is expected


def test_line_minimum_matches_closed_form(egg2):
    # min over zeta of |0.51 + zeta|^2 + |10 zeta|^2 is 0.51^2 * 100/101 at zeta = -0.51/101
    lo, zeta = line_min_level(egg2, ComplexPoint2(0.51, 0), TangentVector2(1, 10))
    assert lo == pytest.approx(0.51 ** 2 * 100 / 101, rel=1e-9)
    assert zeta == pytest.approx(-0.51 / 101, abs=1e-6)


def test_line_minimum_brute_force_higher_m():
    dom = EggRingDomain(3)
    P = ComplexPoint2(0.52, 0.05j)
    xi = TangentVector2(1 - 0.5j, 3)
    lo, _ = line_min_level(dom, P, xi)
    t = np.linspace(-1, 1, 3001)
    zeta = t[:, None] + 1j * t[None, :]
    brute = (np.abs(P.z + zeta * xi.xi_z) ** 2 + np.abs(P.w + zeta * xi.xi_w) ** 3).min()
    assert lo <= brute + 1e-12
    assert lo == pytest.approx(brute, abs=1e-6)


def test_line_misses_inner_zero_direction(egg2):
    with pytest.raises(DegenerateDirectionError):
        line_misses_inner(egg2, ComplexPoint2(0.6, 0), TangentVector2(0, 0))


@pytest.mark.parametrize("m", [2, 3, 4])
def test_line_misses_inner_monotone_in_slope(m):
    dom = EggRingDomain(m)
    P = BasePoint(0.01).point
    vs = np.geomspace(0.1, 100, 25)
    flags = [line_misses_inner(dom, P, TangentVector2(1, v)) for v in vs]
    first = flags.index(True)
    assert all(flags[first:]) and not any(flags[:first])
