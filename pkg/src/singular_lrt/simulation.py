"""Simulated p-value distributions for the T1 and T3 tests.

Each replicate draws gene tree counts from the trinomial at the true
parameter, computes the likelihood ratio statistic and converts it to a
p-value under either the finite-sample approximation or chi-squared(1).
A well calibrated reference gives uniformly distributed p-values.

Random streams: replicates are grouped in blocks of ``BLOCK_SIZE``; block
``b`` draws from ``PCG64(SeedSequence(seed, spawn_key=(b,)))`` using
numpy's multinomial sampler (conditional binomial decomposition).  The
counts of replicate ``i`` therefore depend only on ``(seed, i)`` and not
on how many threads run the blocks.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._errors import DomainError
from .coalescent import GeneTreeProbs, probabilities_from_phi
from .densities import DensitySpec, pvalues
from .geometry import alpha_from_phi, map_blocks, mu_from_phi
from .models import Model, TrinomialCounts, lr_statistics

BLOCK_SIZE = 4096
REFERENCES = ("approx", "chisq1")
MU_SOURCES = ("true_param", "plugin_mle")


def _check_probs(probs) -> np.ndarray:
    if isinstance(probs, GeneTreeProbs):
        probs = probs.as_tuple()
    p = np.asarray(probs, dtype=float)
    if p.shape != (3,) or np.any(p < 0) or np.any(~np.isfinite(p)) or abs(p.sum() - 1.0) > 1e-9:
        raise DomainError(f"not a probability vector on the 2-simplex: {np.asarray(probs).tolist()}")
    return p / p.sum()


def multinomial_sample(probs, n: int, seed: int) -> TrinomialCounts:
    """One trinomial draw of ``n`` gene trees; deterministic given ``seed``."""
    p = _check_probs(probs)
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    return TrinomialCounts(*(int(c) for c in rng.multinomial(int(n), p)))


def replicate_counts(probs, n: int, replicates: int, seed: int) -> np.ndarray:
    """Counts for ``replicates`` independent draws, shape (replicates, 3)."""
    p = _check_probs(probs)
    nblocks = -(-replicates // BLOCK_SIZE)

    def block(b: int) -> np.ndarray:
        size = min(BLOCK_SIZE, replicates - b * BLOCK_SIZE)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(b,))))
        return rng.multinomial(int(n), p, size=size)

    return np.concatenate(map_blocks(block, nblocks))


@dataclass(frozen=True)
class ExperimentConfig:
    model: Model
    phi0: float
    n: int
    replicates: int
    seed: int = 0
    reference: str = "approx"
    mu_source: str = "plugin_mle"

    def __post_init__(self):
        if not (0.0 < self.phi0 <= 1.0):
            raise DomainError(f"phi0 must lie in (0, 1], got {self.phi0!r}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if int(self.replicates) != self.replicates or self.replicates < 1:
            raise DomainError(f"replicates must be a positive integer, got {self.replicates!r}")
        if self.reference not in REFERENCES:
            raise DomainError(f"reference must be one of {REFERENCES}, got {self.reference!r}")
        if self.mu_source not in MU_SOURCES:
            raise DomainError(f"mu_source must be one of {MU_SOURCES}, got {self.mu_source!r}")

    @property
    def true_probs(self) -> GeneTreeProbs:
        # T3 data are generated from species tree 1.
        index = self.model.concordant_index or 1
        return probabilities_from_phi(self.phi0, index)


@dataclass(frozen=True)
class EcdfSeries:
    sorted_pvalues: np.ndarray

    def __post_init__(self):
        if self.sorted_pvalues.ndim != 1:
            raise DomainError("p-values must form a 1-d series")

    def __len__(self):
        return self.sorted_pvalues.size

    @property
    def cumfrac(self) -> np.ndarray:
        return np.arange(1, len(self) + 1) / len(self)

    def __call__(self, x):
        """Empirical CDF: fraction of p-values <= x."""
        return np.searchsorted(self.sorted_pvalues, x, side="right") / len(self)

    def rows(self):
        for rank, (p, c) in enumerate(zip(self.sorted_pvalues, self.cumfrac), start=1):
            yield rank, float(p), float(c)


def sup_uniform_deviation(ecdf: EcdfSeries | np.ndarray) -> float:
    """Kolmogorov-Smirnov distance between the ECDF and the uniform CDF."""
    p = ecdf.sorted_pvalues if isinstance(ecdf, EcdfSeries) else np.sort(np.asarray(ecdf, dtype=float))
    if p.size == 0:
        raise DomainError("empty p-value series")
    n = p.size
    i = np.arange(1, n + 1)
    return float(max(np.max(np.abs(p - i / n)), np.max(np.abs(p - (i - 1) / n))))


def reference_pvalues(lam, phi_for_mu, n: int, model: Model, reference: str) -> np.ndarray:
    """p-values of statistics ``lam``; ``phi_for_mu`` sets mu0 (and alpha0 for T3).

    Statistics equal to zero get p-value 1.  Identical (lambda, phi)
    pairs are integrated once.
    """
    lam = np.asarray(lam, dtype=float)
    if reference == "chisq1":
        return pvalues(lam, DensitySpec.chisq(1))
    phi = np.broadcast_to(np.asarray(phi_for_mu, dtype=float), lam.shape)
    out = np.ones(lam.shape)
    positive = lam > 0
    if not positive.any():
        return out
    keys = np.stack([lam[positive], phi[positive]], axis=1)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    specs = []
    for lam_u, phi_u in uniq:
        mu = mu_from_phi(phi_u, n)
        if model.kind == "T1":
            specs.append(DensitySpec.t1(mu))
        else:
            specs.append(DensitySpec.t3(mu, alpha_from_phi(phi_u)))
    out[positive] = pvalues(uniq[:, 0], specs)[inverse.ravel()]
    return out


def simulate_statistics(config: ExperimentConfig):
    """Per-replicate counts, statistics and fitted phi, in replicate order."""
    counts = replicate_counts(config.true_probs, config.n, config.replicates, config.seed)
    lam, phi_hat, _ = lr_statistics(counts, config.model)
    return counts, lam, phi_hat


def run_experiment(config: ExperimentConfig) -> EcdfSeries:
    """Sorted p-values of ``config.replicates`` simulated tests."""
    _, lam, phi_hat = simulate_statistics(config)
    if config.mu_source == "true_param":
        phi_for_mu = np.full(lam.shape, config.phi0)
    else:
        # Rows with phi_hat == 0 have lam == 0 and never reach the density.
        phi_for_mu = np.where(phi_hat > 0, phi_hat, 1.0)
    p = reference_pvalues(lam, phi_for_mu, config.n, config.model, config.reference)
    return EcdfSeries(np.sort(p))
