import math

import warnings

import mpmath
import numpy as np
import pytest
from scipy.integrate import IntegrationWarning, quad


def lobachevsky_quad(theta: float) -> float:
    """-int_0^theta log|2 sin u| du by adaptive quadrature, split at multiples of pi."""
    mpmath.mp.dps = 30
    f = lambda u: -mpmath.log(abs(2 * mpmath.sin(u)))
    sign = 1 if theta >= 0 else -1
    b = abs(theta)
    pts = [0.0] + [k * math.pi for k in range(1, int(b // math.pi) + 1)] + [b]
    pts = sorted(set(pts))
    return sign * float(mpmath.quad(f, pts))


def lobachevsky_quad_fast(theta: float) -> float:
    """Same integral in double precision with QUADPACK.

    QUADPACK loses accuracy when theta sits just short of a multiple of pi,
    where the log singularity is outside but very close to the interval; those
    cases and any with a large error estimate go to the mpmath oracle.
    """
    f = lambda u: -math.log(abs(2 * math.sin(u)))
    sign = 1 if theta >= 0 else -1
    b = abs(theta)
    gap = b - math.pi * math.floor(b / math.pi)
    if math.pi - gap < 1e-2:
        return lobachevsky_quad(theta)
    pts = sorted(set([0.0] + [k * math.pi for k in range(1, int(b // math.pi) + 1)] + [b]))
    total, err = 0.0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for a, c in zip(pts, pts[1:]):
            v, e = quad(f, a, c, epsabs=1e-14, epsrel=1e-14, limit=200)
            total += v
            err += e
    if err > 1e-12:
        return lobachevsky_quad(theta)
    return sign * total


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE: list[str] = []


@pytest.fixture
def record():
    """Print and keep one PASS/FAIL line per acceptance criterion."""

    def _rec(n: int, title: str, ok: bool, detail: str = "") -> bool:
        line = f"criterion {n} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
        print(line)
        ACCEPTANCE.append(line)
        return ok

    return _rec


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
