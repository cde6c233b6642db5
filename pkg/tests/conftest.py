import math

import pytest

# criterion id -> (title, passed)
ACCEPTANCE_RESULTS: dict[str, tuple[str, bool]] = {}


def record(criterion: str, title: str, passed: bool) -> None:
    prev = ACCEPTANCE_RESULTS.get(criterion)
    ok = passed and (prev is None or prev[1])
    ACCEPTANCE_RESULTS[criterion] = (title, ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")

    def order(key):
        head, _, tail = key.partition(".")
        return int(head), tail

    for key in sorted(ACCEPTANCE_RESULTS, key=order):
        title, ok = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"criterion {key:6s} {'PASS' if ok else 'FAIL'}  {title}")


def rel_err(a, b) -> float:
    diff = abs(a - b)
    if diff == 0:
        return 0.0
    return diff / max(abs(a), abs(b))


@pytest.fixture
def mp():
    mpmath = pytest.importorskip("mpmath")
    with mpmath.workdps(40):
        yield mpmath


def mp_faddeeva(mpmath, z: complex) -> complex:
    zz = mpmath.mpc(z.real, z.imag)
    return complex(mpmath.exp(-zz * zz) * mpmath.erfc(-1j * zz))


def mp_kernel_direct(mpmath, a: float, b: float) -> float:
    """K(a, b) from its defining expression with erf(b + i a)."""
    a, b = mpmath.mpf(a), mpmath.mpf(b)
    val = mpmath.exp(-a * a) * (
        mpmath.im(mpmath.exp(2j * a * b) * mpmath.erf(mpmath.mpc(b, a))) - mpmath.sin(2 * a * b)
    )
    return float(val)


def finite(x) -> bool:
    return math.isfinite(abs(x))
