"""Planar geometry of the trinomial null models.

The open 2-simplex is mapped isometrically onto the plane (star tree at
the origin), then rescaled by the square root of the Fisher information
at the true parameter so that the approximating normal sample has
identity covariance and mean ``(0, mu0)``.  In those coordinates the T1
null space is the half-line ``{(0, y): y >= 0}`` and T3 adds the two
half-lines ``y = -tan(alpha0) |x|``.

The simplex edges are ignored: null segments are extended to half-lines,
which is accurate as long as the true parameter sits many standard
deviations inside the simplex.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._errors import DomainError

SQRT2 = math.sqrt(2.0)
SQRT6 = math.sqrt(6.0)

# Rows are orthonormal and orthogonal to (1, 1, 1).
SIMPLEX_TO_PLANE = np.array(
    [
        [0.0, -1.0 / SQRT2, 1.0 / SQRT2],
        [math.sqrt(2.0 / 3.0), -1.0 / SQRT6, -1.0 / SQRT6],
    ]
)

ALPHA_MIN = math.atan(1.0 / 3.0)
ALPHA_MAX = math.pi / 6.0

# Monte Carlo draws are generated in fixed-size blocks; block b uses the
# stream SeedSequence(seed, spawn_key=(b,)), so the value at any sample
# index depends only on (seed, index).
BLOCK_SIZE = 1 << 16


@dataclass(frozen=True)
class PlanePoint:
    x: float
    y: float


@dataclass(frozen=True)
class TransformParams:
    phi0: float
    n: int
    mu0: float
    alpha0: float

    @property
    def beta0(self) -> float:
        return 0.5 * (0.5 * math.pi - self.alpha0)


def _check_phi(phi0: float) -> None:
    if not (0.0 < phi0 <= 1.0):
        raise DomainError(f"phi0 must lie in (0, 1], got {phi0!r}")


def _check_n(n: int) -> None:
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n!r}")


def simplex_to_plane(p) -> PlanePoint:
    p = np.asarray(p, dtype=float)
    if p.shape != (3,) or abs(p.sum() - 1.0) > 1e-9:
        raise DomainError(f"not a point of the 2-simplex: {p.tolist()}")
    x, y = SIMPLEX_TO_PLANE @ p
    return PlanePoint(float(x), float(y))


def fisher_scaling(phi0: float, n: int) -> tuple[float, float]:
    """Diagonal of ``sqrt(n) I(theta0)^(1/2)`` in planar coordinates."""
    _check_phi(phi0)
    _check_n(n)
    return (math.sqrt(3.0 * n / phi0), math.sqrt(3.0 * n / (phi0 * (3.0 - 2.0 * phi0))))


def mu_from_phi(phi0: float, n: int) -> float:
    """Distance of the true parameter from the star tree, in standard deviations."""
    _check_phi(phi0)
    _check_n(n)
    return math.sqrt(2.0 * n) * (1.0 - phi0) / math.sqrt(phi0 * (3.0 - 2.0 * phi0))


def alpha_from_phi(phi0: float) -> float:
    """Angle between the positive x-axis and the scaled discordant null branch."""
    _check_phi(phi0)
    if phi0 == 1.0:
        return ALPHA_MAX
    return math.atan(1.0 / math.sqrt(3.0 * (3.0 - 2.0 * phi0)))


def transform_params(phi0: float, n: int) -> TransformParams:
    return TransformParams(phi0, n, mu_from_phi(phi0, n), alpha_from_phi(phi0))


def phi_from_mu(mu0: float, n: int, tol: float = 1e-12) -> float:
    """Invert ``mu_from_phi`` for fixed n by bisection on (0, 1].

    mu is strictly decreasing in phi, from +inf at 0 to 0 at 1.  Bisection
    sidesteps the cancellation a quadratic-formula root suffers near phi=1.
    """
    _check_n(n)
    if not math.isfinite(mu0) or mu0 < 0:
        raise DomainError(f"mu0 must be finite and >= 0, got {mu0!r}")
    if mu0 == 0.0:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if mu_from_phi(mid, n) > mu0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _sign(v):
    # sgn(0) = +1
    return np.where(v >= 0, 1.0, -1.0)


def distance_sq_t1(z, zbar):
    """Squared distance from ``(z, zbar)`` to the half-line ``x = 0, y >= 0``."""
    z = np.asarray(z, dtype=float)
    zbar = np.asarray(zbar, dtype=float)
    out = z * z + 0.5 * (1.0 - _sign(zbar)) * zbar * zbar
    return out if out.ndim else float(out)


def distance_sq_t3(z, zbar, alpha0: float):
    """Squared distance from ``(z, zbar)`` to the three T3 null half-lines."""
    z = np.asarray(z, dtype=float)
    zbar = np.asarray(zbar, dtype=float)
    s, c = math.sin(alpha0), math.cos(alpha0)
    # sin(a) * (z + cot(a) sgn(z) zbar) written without the cotangent.
    slanted = (s * z + c * _sign(z) * zbar) ** 2
    out = np.minimum(distance_sq_t1(z, zbar), slanted)
    return out if out.ndim else float(out)


def _thread_count() -> int:
    raw = os.environ.get("SINGULAR_LRT_THREADS")
    if raw is None:
        return min(8, os.cpu_count() or 1)
    try:
        value = int(raw)
    except ValueError:
        raise DomainError(f"SINGULAR_LRT_THREADS must be a positive integer, got {raw!r}")
    if value < 1:
        raise DomainError(f"SINGULAR_LRT_THREADS must be a positive integer, got {raw!r}")
    return value


def block_rng(seed: int, block: int) -> np.random.Generator:
    """PCG64 generator for one fixed-size block of a seeded stream."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def map_blocks(func, nblocks: int):
    """Apply ``func`` to block indices, preserving order; threads capped by env."""
    workers = min(_thread_count(), nblocks)
    if workers <= 1:
        return [func(b) for b in range(nblocks)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, range(nblocks)))


def sample_lambda_tilde(model: str, params: TransformParams | tuple, count: int, seed: int) -> np.ndarray:
    """Monte Carlo draws of the approximating statistic.

    ``model`` is ``"T1"`` or ``"T3"``.  ``params`` is a TransformParams or a
    bare ``(mu0, alpha0)`` pair.  Draws ``Z ~ N(0, 1)`` and
    ``Zbar ~ N(mu0, 1)`` with numpy's PCG64 generator and ziggurat normal
    sampler (both platform independent), block by block, and returns the
    squared distance to the null half-lines.
    """
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count!r}")
    if isinstance(params, TransformParams):
        mu0, alpha0 = params.mu0, params.alpha0
    else:
        mu0, alpha0 = params
    kind = model.upper()
    if kind not in ("T1", "T3"):
        raise DomainError(f"model must be T1 or T3, got {model!r}")

    nblocks = -(-count // BLOCK_SIZE)

    def draw(block: int) -> np.ndarray:
        size = min(BLOCK_SIZE, count - block * BLOCK_SIZE)
        # Sample i of the block uses normals 2i and 2i+1 of its stream.
        normals = block_rng(seed, block).standard_normal((size, 2))
        z, zbar = normals[:, 0], normals[:, 1] + mu0
        if kind == "T1":
            return distance_sq_t1(z, zbar)
        return distance_sq_t3(z, zbar, alpha0)

    return np.concatenate(map_blocks(draw, nblocks))
