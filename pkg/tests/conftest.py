import math

import numpy as np
import pytest

from eggring.geometry import BasePoint, EggRingDomain


def ball_metric(P, xi):
    """Kobayashi/Caratheodory metric of the unit ball, written in Bergman form."""
    P = np.asarray(P, dtype=complex)
    xi = np.asarray(xi, dtype=complex)
    s = 1.0 - float(np.vdot(P, P).real)
    inner = abs(np.vdot(P, xi))
    return math.sqrt(float(np.vdot(xi, xi).real) / s + inner ** 2 / s ** 2)


@pytest.fixture
def egg2():
    return EggRingDomain(2)


@pytest.fixture(params=[1e-1, 1e-2, 1e-3, 1e-4])
def base(request):
    return BasePoint(request.param)


# acceptance criterion -> (passed, detail); filled in by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
