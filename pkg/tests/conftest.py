import os

import numpy as np
import pytest

from ehrelay.radio import NetworkConfig

# named parameter sets used across the suite (dB quantities re 1 mJ / 1 mW)
BASELINE = dict(p_s_dbm=10, m1=15, m2=10, inv_lambda1_db=-5, inv_lambda2_db=-5, r0=1.5)
DENSITY = dict(p_s_dbm=15, inv_lambda1_db=-6, inv_lambda2_db=-8, r0=3)
DENSITY_PAIRS = ((10, 8), (15, 13))
RATE_STUDY = dict(p_s_dbm=11, inv_lambda1_db=-7, inv_lambda2_db=-7)
RATE_PAIRS = ((10, 8), (15, 13), (25, 23))
CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def make_config(**kw) -> NetworkConfig:
    args = dict(BASELINE)
    args.update(kw)
    return NetworkConfig.from_db(args.pop("p_s_dbm"), args.pop("m1"), args.pop("m2"),
                                 args.pop("inv_lambda1_db"), args.pop("inv_lambda2_db"),
                                 args.pop("r0"), **args)


def density_config(m1, m2) -> NetworkConfig:
    return make_config(m1=m1, m2=m2, **DENSITY)


def rate_config(m1, m2, r0=1.0) -> NetworkConfig:
    return make_config(m1=m1, m2=m2, r0=r0, **RATE_STUDY)


@pytest.fixture
def baseline():
    return make_config()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def config_dir():
    return os.path.abspath(CONFIG_DIR)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
