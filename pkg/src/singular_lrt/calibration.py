"""When is chi-squared(1) good enough?

Total variation distance between the finite-sample approximations and
chi-squared(1), the threshold ``mu_tilde`` at which that distance equals a
tolerance ``epsilon``, and the translation of ``mu_tilde`` into branch
length thresholds for given sample sizes.

For T3 the distance also depends on ``alpha0``; pinning it to its
smallest value ``arctan(1/3)`` gives an upper bound and hence a
conservative threshold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._errors import DomainError
from . import quadrature
from .densities import DensitySpec, radial_density
from .geometry import ALPHA_MIN, phi_from_mu

CHISQ1 = DensitySpec.chisq(1)


def total_variation(spec1: DensitySpec, spec2: DensitySpec, abs_tol: float = 1e-10) -> float:
    """Half the L1 distance between two densities.

    Integrated in the radial variable, where both densities are bounded.
    """
    if spec1 == spec2:
        return 0.0
    end = max(spec1.support_end, spec2.support_end)

    def integrand(u, _item):
        return np.abs(radial_density(u, spec1) - radial_density(u, spec2))

    val, _ = quadrature.integrate(integrand, [0.0], [end], abs_tol=abs_tol, initial_panels=32)
    return float(min(1.0, max(0.0, 0.5 * val[0])))


def approx_spec(model: str, mu0: float) -> DensitySpec:
    """Reference density for threshold work (T3 uses the smallest alpha0)."""
    kind = model.upper()
    if kind == "T1":
        return DensitySpec.t1(mu0)
    if kind == "T3":
        return DensitySpec.t3(mu0, ALPHA_MIN)
    raise DomainError(f"model must be T1 or T3, got {model!r}")


def distance_to_chisq1(model: str, mu0: float) -> float:
    return total_variation(approx_spec(model, mu0), CHISQ1)


def mu_threshold(epsilon: float, model: str, mu_tol: float = 1e-7, grid_step: float = 0.5) -> float:
    """Smallest ``mu0`` at which the distance to chi-squared(1) drops to ``epsilon``.

    The distance is decreasing in ``mu0``.  A coarse scan checks this on a
    grid and brackets the crossing; bisection then refines the bracket to
    ``mu_tol``.  If the scan sees the distance rise, the bracket is the
    first grid cell where the distance falls below ``epsilon``.
    """
    dist0 = distance_to_chisq1(model, 0.0)
    if not (0.0 < epsilon < dist0):
        raise DomainError(
            f"epsilon={epsilon!r} is not attainable for {model.upper()}; "
            f"it must lie in the open interval (0, {dist0:.6g})"
        )
    lo, d_lo = 0.0, dist0
    hi = None
    mu = 0.0
    while hi is None:
        mu += grid_step
        d = distance_to_chisq1(model, mu)
        if d < epsilon:
            hi = mu
        else:
            lo, d_lo = mu, d
        if mu > 200.0:
            raise DomainError(f"no threshold below mu0=200 for epsilon={epsilon!r}")

    while hi - lo > mu_tol:
        mid = 0.5 * (lo + hi)
        if distance_to_chisq1(model, mid) >= epsilon:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class ThresholdEntry:
    n: int
    phi_tilde: float
    t_tilde: float


@dataclass
class ThresholdRow:
    epsilon: float
    mu_tilde: float
    entries: list[ThresholdEntry] = field(default_factory=list)


def threshold_table(model: str, epsilons, ns) -> list[ThresholdRow]:
    """Thresholds in terms of mu0, phi0 and branch length t for each (epsilon, n)."""
    epsilons = list(epsilons)
    ns = list(ns)
    if not epsilons or not ns:
        raise DomainError("need at least one epsilon and one n")
    for n in ns:
        if int(n) != n or n < 1:
            raise DomainError(f"sample sizes must be positive integers, got {n!r}")
    rows = []
    for eps in epsilons:
        mu = mu_threshold(eps, model)
        row = ThresholdRow(epsilon=eps, mu_tilde=mu)
        for n in ns:
            phi = phi_from_mu(mu, int(n))
            row.entries.append(ThresholdEntry(int(n), phi, -math.log(phi)))
        rows.append(row)
    return rows
