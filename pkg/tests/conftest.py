import pytest

CRITERIA = {
    1: "pressure ground truths",
    2: "Ruelle variational identity",
    3: "zero-allowed potentials vs characteristic-polynomial oracle",
    4: "Gibbs and eigendata residuals, Markov cylinder masses",
    5: "equilibrium attainment",
    6: "spectral-radius square-root law",
    7: "Cuntz example",
    8: "t-entropy consistency",
    9: "tree lab certification of the two-sided/one-sided example",
    10: "component-count bound and lab agreement on random trees",
    11: "freeness oracle",
}

_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): acceptance criterion number k")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    k = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        ok = rep.outcome == "passed"
        _outcomes[k] = _outcomes.get(k, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        if k in _outcomes:
            status = "PASS" if _outcomes[k] else "FAIL"
            terminalreporter.write_line(f"criterion {k:2d}: {status}  {CRITERIA[k]}")
