import math

import numpy as np
import pytest

from singular_lrt.densities import DensitySpec, pvalues


def ks_bound(samples, spec: DensitySpec, grid_points: int = 4000) -> float:
    """Upper bound on the KS distance between ``samples`` and ``spec``'s CDF.

    The model CDF is evaluated at ``grid_points`` sample quantiles.  Between
    neighbouring grid points neither CDF can move by more than its
    increment over the cell, so adding the largest increment bounds the
    supremum over the whole line.
    """
    x = np.sort(np.asarray(samples))
    n = x.size
    ranks = np.unique(np.linspace(1, n, grid_points).astype(int))
    pts = x[ranks - 1]
    model = 1.0 - pvalues(pts, spec)
    emp_hi = np.searchsorted(x, pts, side="right") / n
    emp_lo = np.searchsorted(x, pts, side="left") / n
    on_grid = max(np.max(np.abs(model - emp_hi)), np.max(np.abs(model - emp_lo)))
    step_model = np.max(np.diff(np.concatenate([[0.0], model, [1.0]])))
    step_emp = np.max(np.diff(np.concatenate([[0.0], emp_hi, [1.0]])))
    return float(on_grid + max(step_model, step_emp))


@pytest.fixture
def alpha_min():
    return math.atan(1.0 / 3.0)


# Acceptance criteria report: criterion number -> (passed, detail).
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        passed, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
