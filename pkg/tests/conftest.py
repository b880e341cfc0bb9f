import numpy as np
import pytest

from borda_ae import _fallback
from borda_ae.kernels import KernelSpec

try:
    from borda_ae import _native
except ImportError:  # pragma: no cover - exercised only without a compiler
    _native = None

BACKENDS = [pytest.param(_fallback, id="python")]
if _native is not None:
    BACKENDS.append(pytest.param(_native, id="native"))


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Route every module through one kernel backend for the test."""
    from borda_ae import acquisition, kernels, krr, policy

    for mod in (acquisition, kernels, krr, policy):
        monkeypatch.setattr(mod, "_k", request.param)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def se2():
    return KernelSpec.isotropic("squared-exponential", 0.3, 2)


ACCEPTANCE_LINES = []


@pytest.fixture
def report(capsys):
    """Emit one PASS/FAIL line per acceptance criterion, live and in the summary."""
    def emit(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print(f"\n{line}")
        return ok
    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
