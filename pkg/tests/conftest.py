import numpy as np
import pytest

from shiftcraft.imgcore import _backend

try:
    from shiftcraft.imgcore import _ckernels
except ImportError:  # extension not built
    _ckernels = None

KERNEL_BACKENDS = [pytest.param(_backend.python_kernels, id="python")]
if _ckernels is not None:
    KERNEL_BACKENDS.append(pytest.param(_ckernels, id="cython"))


@pytest.fixture(params=KERNEL_BACKENDS)
def kernels(request):
    """Each available kernel implementation in turn."""
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def square_image(n=32, lo=0, hi=24, fg=0.0, bg=1.0):
    img = np.full((n, n), bg)
    img[lo:hi, lo:hi] = fg
    return img


_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    """``criterion(n, ok, detail)`` records and prints one acceptance verdict line."""

    def report(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'} - {detail}"
        _CRITERIA[number] = line
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
