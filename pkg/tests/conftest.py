import numpy as np
import pytest

from slidearea.area import Configuration
from slidearea.curves import Circle, Ellipse, Line

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def record(number: int, passed: bool, detail: str = ""):
    ACCEPTANCE[number] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


# ---------------------------------------------------------------------------
# oracles and generators
# ---------------------------------------------------------------------------

def fd_gradient(f, x, h=1e-5):
    x = np.asarray(x, float)
    g = np.empty_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def fd_hessian(f, x, h=1e-4):
    x = np.asarray(x, float)
    n = len(x)
    H = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = h
            ej[j] = h
            H[i, j] = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4 * h * h)
    return H


def brute_area(points):
    """Shoelace sum written out independently of the package."""
    s = 0.0
    n = len(points)
    for i in range(n):
        x1, y1 = points[i]
        x2, y2 = points[(i + 1) % n]
        s += x1 * y2 - x2 * y1
    return s


def random_curve(rng):
    kind = rng.integers(3)
    c = rng.normal(size=2)
    if kind == 0:
        return Line(c, rng.normal(size=2))
    if kind == 1:
        return Circle(c, rng.uniform(0.3, 3.0), int(rng.choice([-1, 1])))
    return Ellipse(c, rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0), rng.uniform(0, np.pi),
                   int(rng.choice([-1, 1])))


def random_config(rng, n=None):
    n = n or int(rng.integers(3, 9))
    curves = tuple(random_curve(rng) for _ in range(n))
    t = np.array([rng.uniform(-2, 2) if c.kind == "line" else rng.uniform(0, 2 * np.pi) for c in curves])
    return Configuration(curves, t)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
