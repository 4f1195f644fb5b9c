import numpy as np
import pytest

from normalbundle import get_preset, sample_normal_points

PRESET_NAMES = (
    "plane_r2_in_r4",
    "curve_in_r2",
    "helix_r1_in_r3",
    "sphere_s2_in_r3",
    "graph_surface_r2_in_r4",
    "lagrangian_rk_in_r2k",
    "lagrangian_graph_r2_in_r4",
)


@pytest.fixture(scope="session")
def presets():
    """One shared instance per builtin preset (keeps geometry caches warm)."""
    return {name: get_preset(name) for name in PRESET_NAMES}


@pytest.fixture(scope="session")
def samples():
    """Deterministic quasi-random (u, t) samples per preset."""
    cache = {}

    def get(sub, count=8, t_scale=0.75):
        key = (id(sub), count, t_scale)
        if key not in cache:
            U, T, _ = sample_normal_points(sub, count, t_scale=t_scale)
            cache[key] = (U, T)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def lagrangian_graph(presets):
    return presets["lagrangian_graph_r2_in_r4"]


@pytest.fixture(scope="session")
def sphere(presets):
    return presets["sphere_s2_in_r3"]


def pytest_addoption(parser):
    parser.addoption("--run-slow-grid", action="store_true", default=False,
                     help="run the widest oracle grids even outside the "
                          "acceptance module")


# -- acceptance verdict lines ----------------------------------------------
ACCEPTANCE_RESULTS = {}


def record_acceptance(number, passed, detail=""):
    """Store (and immediately print) one criterion verdict."""
    ACCEPTANCE_RESULTS[number] = (bool(passed), detail)
    line = f"[AC {number}] {'PASS' if passed else 'FAIL'}"
    if detail:
        line += f" — {detail}"
    print(line)


@pytest.fixture(scope="session")
def acceptance():
    return record_acceptance


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        passed, detail = ACCEPTANCE_RESULTS[number]
        line = f"[AC {number}] {'PASS' if passed else 'FAIL'}"
        if detail:
            line += f" — {detail}"
        terminalreporter.write_line(line)
