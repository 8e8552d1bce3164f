import json
import subprocess
import sys
from pathlib import Path

import pytest

# The parity suite exercises the primary implementation only through its
# external surfaces: the episode directory format, the bundled fixtures, and
# the CLI. The corpus generator import below writes format-level artifacts.
import isoteleop
from isoteleop.corpus import generate_corrupted_corpus, generate_valid_episodes

PRIMARY_FIXTURES = Path(isoteleop.__file__).parent / "fixtures"

SMALL_TELEOP = {
    "name": "parity_teleop",
    "kind": "teleop",
    "seed": 4242,
    "human_fixture": "mile_exo.hand",
    "robot_fixture": "mile_tac.hand",
    "map": "mile_map.json",
    "program": {"kind": "multi_joint_dynamic", "duration_s": 3.0, "rate_hz": 30.0,
                "frequency_hz": [0.7] * 17},
    "encoder": {"noise_sigma_deg": 0.36},
    "latency_s": 0.05,
    "max_lag_s": 0.4,
}


def run_primary_cli(*argv) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "isoteleop.cli", *argv],
        capture_output=True,
        text=True,
    )


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return PRIMARY_FIXTURES


@pytest.fixture(scope="session")
def teleop_episode(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("sim")
    scenario = root / "scenario.json"
    scenario.write_text(json.dumps(SMALL_TELEOP))
    proc = run_primary_cli("simulate", str(scenario), "--out", str(root / "out"))
    assert proc.returncode == 0, proc.stderr
    return root / "out" / "episode"


@pytest.fixture(scope="session")
def valid_corpus(tmp_path_factory):
    return generate_valid_episodes(tmp_path_factory.mktemp("valid"), 10, seed=20250800)


@pytest.fixture(scope="session")
def corrupted_corpus(tmp_path_factory):
    return generate_corrupted_corpus(tmp_path_factory.mktemp("corrupt"), 50, seed=20250801)
