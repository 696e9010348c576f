import numpy as np
import pytest

from mkdvlab.scattering import forward_scatter, preset_potential


@pytest.fixture(scope="session")
def sech01():
    y0 = preset_potential("sech", 0.1, spacing=0.01)
    return y0, forward_scatter(y0)


@pytest.fixture(scope="session")
def sech001():
    y0 = preset_potential("sech", 0.01, spacing=0.01)
    return y0, forward_scatter(y0)


def exact_sech_abs_r(z, eps):
    """|r| for y0 = eps sech(x) in the defocusing case (closed form)."""
    z = np.asarray(z, dtype=float)
    s = np.sinh(np.pi * eps)
    return s / np.sqrt(np.cosh(np.pi * z) ** 2 + s**2)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
