import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

from hameig.presets import PRESETS, constant_neumann_problem  # noqa: E402


@pytest.fixture(params=list(PRESETS))
def preset(request):
    return PRESETS[request.param]


@pytest.fixture
def example1():
    return PRESETS["example1"].problem


@pytest.fixture
def constant_problem():
    return constant_neumann_problem()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    grouped = {}
    for key, (ok, text) in results.items():
        crit, _, part = key.partition(".")
        grouped.setdefault(int(crit), []).append((part, ok, text))
    terminalreporter.section("acceptance criteria")
    for crit in sorted(grouped):
        parts = grouped[crit]
        ok = all(p[1] for p in parts)
        if len(parts) == 1 and not parts[0][0]:
            detail = parts[0][2]
        else:
            bad = [f"{p[0]}: {p[2]}" for p in parts if not p[1]]
            detail = " | ".join(bad) if bad else ", ".join(p[0] for p in parts) + " ok"
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {crit}: {detail}")
