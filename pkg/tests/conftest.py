import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hosil.distance import DistanceMatrix, pairwise_distances  # noqa: E402


def line(*xs) -> DistanceMatrix:
    """Euclidean dissimilarities of points on the real line."""
    return pairwise_distances(np.asarray(xs, dtype=float)[:, None])


def blobs(rng, n, p, k=None):
    """Gaussian blobs with random centres; returns coordinates."""
    k = k or int(rng.integers(2, 6))
    centres = rng.normal(scale=4.0, size=(k, p))
    which = rng.integers(0, k, size=n)
    return centres[which] + rng.normal(size=(n, p))


@pytest.fixture
def six():
    return line(0, 1, 10, 11, 20, 21)


ACCEPTANCE_LINES: list[str] = []


def report_criterion(number: int, name: str, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
