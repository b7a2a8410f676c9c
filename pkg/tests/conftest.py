import pytest

from rankrecovery import _kernels_py, kernels

try:
    from rankrecovery import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["cython"] = _compiled


@pytest.fixture(params=sorted(BACKENDS))
def backend(request, monkeypatch):
    """Run the test once per available redistribution kernel."""
    monkeypatch.setattr(kernels, "_impl", BACKENDS[request.param])
    return request.param


_acceptance: dict[str, bool] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    label = dict(report.user_properties).get("acceptance")
    if label:
        _acceptance[label] = _acceptance.get(label, True) and report.outcome == "passed"


@pytest.hookimpl(tryfirst=True)
def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker and not any(k == "acceptance" for k, _ in item.user_properties):
        item.user_properties.append(("acceptance", marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok in _acceptance.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}")
