"""Shared export fixtures: generated once per session with the gaussring CLI.

The renderers consume only the documented export files; the primary package
is used here purely as the generator of realistic inputs.
"""

import pytest

from gaussring.cli import main as gaussring_main

LAMBDA = "7472326.499492696"
FAST = ["--grid-points", "41", "--engine", "perturbative",
        "--lambda-scalar", LAMBDA]


@pytest.fixture(scope="session")
def scenario_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("scenario")
    code = gaussring_main(["scenario", "--out", str(out), *FAST])
    assert code == 0
    return str(out)


@pytest.fixture(scope="session")
def sweep_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    code = gaussring_main(["sweep", "--out", str(out), *FAST,
                           "--parameter", "pump.g",
                           "--values", "lin:0:4e10:5",
                           "--export-points", "2,4"])
    assert code == 0
    return str(out)


@pytest.fixture(scope="session")
def ensemble_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("ensemble")
    code = gaussring_main(["ensemble", "--out", str(out), *FAST,
                           "--samples", "12"])
    assert code == 0
    return str(out)
