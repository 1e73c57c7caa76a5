import numpy as np
import pytest

from growthcenters.scenarios import paper_six_group

# six-group dominant eigenvalue/eigenvector from the secular equation
# 1 = c * sum_i 1 / (lam - (a_i - 6c)), solved with brentq (see test_spectral)
SIX_GROUP_LAMBDA = -0.035459202138916075
SIX_GROUP_X = np.array([0.9544486222062833, 0.9738122420545453, 0.9939778205967923,
                        1.0149962318988075, 1.025842337177531, 1.0369227460660406])


@pytest.fixture(scope="session")
def six_group():
    return paper_six_group()


@pytest.fixture(scope="session")
def six_group_run(six_group):
    return six_group.run()


# -- acceptance summary: one PASS/FAIL line per criterion -------------------------

_criteria: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1].removeprefix("test_")
        detail = dict(report.user_properties).get("detail", "")
        _criteria[name] = ("PASS" if report.outcome == "passed" else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria):
        status, detail = _criteria[name]
        terminalreporter.write_line(f"{status} {name}: {detail}")
