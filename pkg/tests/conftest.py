import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


def planted_blobs(rng, n_blobs, per_blob=15, dim=4, spread=0.1, separation=10.0):
    """Gaussian blobs laid out one after another in time.

    Centers sit on scaled unit axes so every pair of centers is exactly
    ``separation * spread`` apart. ``per_blob`` may be an int or a sequence of
    per-blob sizes. Requires ``dim >= n_blobs``.
    """
    sizes = [per_blob] * n_blobs if np.isscalar(per_blob) else list(per_blob)
    centers = np.eye(dim)[:n_blobs] * separation * spread / np.sqrt(2.0)
    rows = [c + rng.normal(0.0, spread, (m, dim)) for c, m in zip(centers, sizes)]
    labels = np.repeat(np.arange(n_blobs), sizes)
    return np.vstack(rows), labels


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def toy_csv(tmp_path):
    p = tmp_path / "toy.csv"
    p.write_text("0\n0.1\n0.2\n10\n10.1\n10.2\n")
    return p


def pytest_terminal_summary(terminalreporter):
    from acceptance_report import LINES

    if not LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(LINES):
        terminalreporter.write_line(LINES[key])
