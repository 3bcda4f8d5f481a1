import warnings

import numpy as np
import pytest

from isotropy import STANDARD_CONTRASTS, STANDARD_LAGS, ContrastMatrix, LagSet, SpatialDataset
from isotropy.core import Design
from isotropy.simulate import grid_locations

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def report():
    """Record one pass/fail line for the acceptance summary."""

    def _report(label: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
        return ok

    return _report


@pytest.fixture
def lags():
    return LagSet(STANDARD_LAGS)


@pytest.fixture
def contrasts():
    return ContrastMatrix(STANDARD_CONTRASTS)


def unit_grid(nx, ny, values, delta=1.0) -> SpatialDataset:
    """Lattice dataset with x varying fastest; ``values`` is a flat array or a callable of (x, y)."""
    locs = grid_locations(nx, ny, delta)
    if callable(values):
        values = values(locs[:, 0], locs[:, 1])
    return SpatialDataset(locs, np.asarray(values, dtype=float), Design.grid(delta, delta))


@pytest.fixture(autouse=True)
def _quiet_package_warnings():
    from isotropy import IsotropyWarning

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IsotropyWarning)
        yield
