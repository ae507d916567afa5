#!/usr/bin/env python3
"""
Shared pytest fixtures: the reference trike plant, its designed gains and
helpers for driving the trikectl command line.
"""

import json
import math

import pytest

from lti_core import tf_new
from pid_design import PidGains

REFERENCE_NUM = (1.0, 2.8)
REFERENCE_DEN = (1.0, 5.44, 2.2)
REFERENCE_DEAD_TIME = 0.3
SAMPLE_TIME = 0.05

# Gains for tr = 0.5 s, theta = 5 deg, default ki rule, K = 1
DESIGNED_KP = 4.88087826367
DESIGNED_KI = 0.878558087461
DESIGNED_KD = 0.186407063696


@pytest.fixture(autouse=True)
def plain_logging(monkeypatch):
    """No ANSI colour and no stray log files while testing."""
    monkeypatch.setenv("TRIKECTL_NO_COLOR", "1")
    monkeypatch.delenv("TRIKECTL_LOG_FILE", raising=False)
    monkeypatch.delenv("TRIKECTL_OUT_DIR", raising=False)
    monkeypatch.setenv("TRIKECTL_MAX_WORKERS", "2")


@pytest.fixture
def reference_plant():
    return tf_new(REFERENCE_NUM, REFERENCE_DEN, REFERENCE_DEAD_TIME)


@pytest.fixture
def rational_plant():
    return tf_new(REFERENCE_NUM, REFERENCE_DEN)


@pytest.fixture
def designed_gains():
    return PidGains(DESIGNED_KP, DESIGNED_KI, DESIGNED_KD)


@pytest.fixture
def theta_5deg():
    return math.radians(5.0)


@pytest.fixture
def write_config(tmp_path):
    """Write a run configuration document and return its path."""
    def _write(document, name="run.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return str(path)
    return _write


def parse_report(text):
    """key=value lines printed by trikectl into a dict of parsed values."""
    report = {}
    for line in text.splitlines():
        if "=" not in line:
            continue
        key, value = line.split("=", 1)
        try:
            report[key] = json.loads(value)
        except ValueError:
            report[key] = value
    return report
