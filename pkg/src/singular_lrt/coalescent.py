"""Gene tree topology probabilities for a three-taxon species tree.

With one lineage sampled per species, coalescence can only happen on the
internal branch or above the root, so the rooted gene tree distribution
depends on the internal branch length ``t`` (coalescent units) alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from ._errors import DomainError


@dataclass(frozen=True)
class GeneTreeProbs:
    """Probabilities of the three rooted gene tree topologies.

    ``concordant_index`` (1, 2 or 3) names the slot holding the topology
    that matches the species tree; the other two slots are equal.
    """

    p_concordant: float
    p_discordant_a: float
    p_discordant_b: float
    concordant_index: int = 1

    def as_tuple(self) -> tuple[float, float, float]:
        """Probabilities in slot order 1, 2, 3."""
        probs = [self.p_discordant_a, self.p_discordant_b]
        probs.insert(self.concordant_index - 1, self.p_concordant)
        return tuple(probs)


def _check_index(concordant_index: int) -> None:
    if concordant_index not in (1, 2, 3):
        raise DomainError(f"concordant_index must be 1, 2 or 3, got {concordant_index!r}")


def phi_from_branch_length(t: float) -> float:
    """Probability that two lineages fail to coalesce on a branch of length t."""
    if not math.isfinite(t) or t < 0:
        raise DomainError(f"branch length must be finite and >= 0, got {t!r}")
    return math.exp(-t)


def branch_length_from_phi(phi0: float) -> float:
    if not (0.0 < phi0 <= 1.0):
        raise DomainError(f"phi0 must lie in (0, 1], got {phi0!r}")
    return -math.log(phi0)


def probabilities_from_phi(phi0: float, concordant_index: int = 1) -> GeneTreeProbs:
    """Gene tree probabilities parameterised directly by phi0 = exp(-t).

    Accepts phi0 = 0 (the t -> infinity limit), which puts all mass on the
    concordant topology.
    """
    _check_index(concordant_index)
    if not (0.0 <= phi0 <= 1.0):
        raise DomainError(f"phi0 must lie in [0, 1], got {phi0!r}")
    discordant = phi0 / 3.0
    if phi0 == 1.0:
        # Star tree: identical thirds whichever slot is labelled concordant.
        return GeneTreeProbs(discordant, discordant, discordant, concordant_index)
    return GeneTreeProbs(1.0 - 2.0 * discordant, discordant, discordant, concordant_index)


def gene_tree_probabilities(t: float, concordant_index: int = 1) -> GeneTreeProbs:
    """Rooted gene tree probabilities under the multispecies coalescent.

    The concordant topology has probability ``1 - (2/3) exp(-t)``; each
    discordant one has ``(1/3) exp(-t)``.
    """
    _check_index(concordant_index)
    return probabilities_from_phi(phi_from_branch_length(t), concordant_index)
