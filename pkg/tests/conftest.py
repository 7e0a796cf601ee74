import math

import numpy as np
import pytest

from wfmarl.farm import FarmLayout, FarmState
from wfmarl.wake import Ambient, Setpoint

# Regression constants printed by tests/oracles/gauss_chain.py (mpmath, 40 digits).
ORACLE = {
    "ti_5d": 0.2036157743559013606577914,
    "x0_greedy": 419.2727267270822968,
    "theta_c0_20deg": 0.066211861522878054739,
    "delta_7d_20deg": 40.404812551524491531,
    "u_7d_greedy": 6.8240809382802284777,
    "row3_u": (8.0, 6.82408093828022854594, 6.42890071909934406881),
    "row13_p_greedy": 16983479.14046971731,
    "c_beta_10deg_shifted": 0.97797720366985632612,
    "p_single_u8": 2317198.5289018655,
}


def random_setpoint(rng: np.random.Generator) -> Setpoint:
    return Setpoint(rng.uniform(0.0, 1.0 / 3.0), math.radians(rng.uniform(-45, 45)),
                    math.radians(rng.uniform(-15, 15)))


def random_state(rng: np.random.Generator, n: int, spacing: float | None = None,
                 ambient: Ambient | None = None) -> FarmState:
    layout = FarmLayout.row(n, spacing if spacing is not None else rng.uniform(3.0, 9.0),
                            ambient=ambient or Ambient(I0=rng.uniform(0.04, 0.15)))
    return FarmState(layout, [random_setpoint(rng) for _ in range(n)])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# Acceptance verdicts: tests marked ``criterion(n, title)`` get one PASS/FAIL line in the summary.
_VERDICTS: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    mark = dict(report.user_properties).get("criterion")
    if mark is None or (report.when != "call" and report.passed):
        return
    number, title = mark
    if report.skipped:
        verdict = "SKIP"
    else:
        verdict = "PASS" if report.passed else "FAIL"
    if number not in _VERDICTS or verdict != "PASS":
        _VERDICTS[number] = (verdict, title, dict(report.user_properties).get("detail", ""))


def pytest_runtest_setup(item):
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        item.user_properties.append(("criterion", tuple(mark.args)))


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        verdict, title, detail = _VERDICTS[number]
        line = f"{verdict} criterion {number}: {title}"
        terminalreporter.write_line(f"{line} ({detail})" if detail else line)


@pytest.fixture
def detail(record_property, capsys):
    """Attach a measured summary to the criterion line and echo it in the verbose log."""
    def put(text: str) -> None:
        record_property("detail", text)
        with capsys.disabled():
            print(f"\n    {text}  ", end="")
    return put
