import os
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
DATA_DIR = Path(os.environ.get("FAIRDELTA_DATA_DIR", ROOT / "data"))

SYNTH_SCHEMA = """\
[dataset]
name = synthetic
task = square_loss
target = y
sensitive = group
sensitive_rule = == a
default_kind = numeric

[columns]
color = categorical
note = drop
"""


def write_synthetic(path: Path, n=400, seed=0, shift=0.3):
    """Small square-loss CSV whose target depends on the sensitive group."""
    rng = np.random.default_rng(seed)
    group = rng.random(n) < 0.5
    x1 = rng.random(n) + shift * group
    x2 = rng.normal(size=n)
    color = rng.choice(["red", "green", "blue"], size=n)
    y = 0.6 * x1 + 0.1 * x2 + 0.2 * (color == "red") + rng.normal(scale=0.05, size=n)
    lines = ["x1,x2,color,group,note,y"]
    for i in range(n):
        lines.append(f"{float(x1[i])!r},{float(x2[i])!r},{color[i]},{'a' if group[i] else 'b'},free text,{float(y[i])!r}")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def synthetic_csv(tmp_path):
    return write_synthetic(tmp_path / "synthetic.csv")


@pytest.fixture
def synthetic_schema(tmp_path):
    p = tmp_path / "synthetic.ini"
    p.write_text(SYNTH_SCHEMA)
    return p


_acceptance = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and (report.when == "call" or report.outcome != "passed"):
        if report.when == "call" or report.failed:
            _acceptance.append((report.nodeid.split("::", 1)[1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
