import numpy as np
import pytest

from edslab import _kernels_py, kernels

try:
    from edslab import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = ["python"] + (["cython"] if _ckernels is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a test once per available kernel backend."""
    impl = _kernels_py if request.param == "python" else _ckernels
    monkeypatch.setattr(kernels, "eval_batch", impl.eval_batch)
    monkeypatch.setattr(kernels, "point_frames", impl.point_frames)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# ---------------------------------------------------------------- acceptance summary

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, title): acceptance criterion k")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    k, title = mark.args
    passed = call.excinfo is None
    detail = "; ".join(f"{v}" for name, v in item.user_properties if name == "detail")
    prev = _CRITERIA.get(k)
    _CRITERIA[k] = (title, passed and (prev is None or prev[1]), detail or (prev[2] if prev else ""))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        title, passed, detail = _CRITERIA[k]
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {k:2d}: {title}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
