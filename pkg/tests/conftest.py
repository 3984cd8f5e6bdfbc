import json
from pathlib import Path

import pytest

from mavctl.sim import WorldModel, parse_world

REPO_ROOT = Path(__file__).resolve().parents[1]
ROOMS = REPO_ROOT / "rooms"


def box_room(half_x: float = 5.0, half_y: float = 5.0, ceiling: float = 10.0) -> dict:
    """Plain rectangular room document, reused across sim and estimation tests."""
    return {
        "ceiling_height": ceiling,
        "walls": [
            {
                "points": [
                    [-half_x, -half_y],
                    [half_x, -half_y],
                    [half_x, half_y],
                    [-half_x, half_y],
                    [-half_x, -half_y],
                ],
                "height": ceiling,
            }
        ],
    }


def quiet_sensors() -> dict:
    """Sensor-noise section with every sigma zeroed."""
    return {
        name: {"sigma": 0.0, "bias_walk_sigma": 0.0}
        for name in (
            "laser",
            "range_down",
            "range_up",
            "baro",
            "uwb",
            "imu_accel",
            "imu_gyro",
            "imu_attitude",
        )
    }


@pytest.fixture
def square_room() -> WorldModel:
    return parse_world(box_room())


@pytest.fixture
def quiet_room() -> WorldModel:
    doc = box_room()
    doc["sensor_noise"] = quiet_sensors()
    return parse_world(doc)


@pytest.fixture
def lab_world() -> WorldModel:
    return parse_world(json.loads((ROOMS / "lab.json").read_text()))
