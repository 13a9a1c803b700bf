"""Trinomial null models T1 and T3 and their likelihood ratio statistics.

Model T1 fixes the species tree: the null space is the curve
``(1 - 2*phi/3, phi/3, phi/3)`` for ``phi`` in (0, 1], with the
concordant topology in a chosen slot.  Model T3 is the union of the three
T1 curves, which meet at the star tree point (1/3, 1/3, 1/3).

All routines here work on count vectors ``(n1, n2, n3)``; the vectorised
``lr_statistics`` is what the simulation code uses, and the scalar
functions are thin wrappers around the same arithmetic.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from ._errors import DomainError
from .coalescent import probabilities_from_phi

TREE_INDICES = (1, 2, 3)


@dataclass(frozen=True)
class Model:
    """Null model identifier.

    ``kind`` is ``"T1"`` or ``"T3"``; a T1 model carries the slot of its
    concordant topology in ``concordant_index``.
    """

    kind: str
    concordant_index: int | None = None

    def __post_init__(self):
        if self.kind == "T1":
            if self.concordant_index not in TREE_INDICES:
                raise DomainError("T1 needs a concordant index in {1, 2, 3}")
        elif self.kind == "T3":
            if self.concordant_index is not None:
                raise DomainError("T3 does not take a concordant index")
        else:
            raise DomainError(f"unknown model kind {self.kind!r}")

    @classmethod
    def t1(cls, concordant_index: int = 1) -> "Model":
        return cls("T1", concordant_index)

    @classmethod
    def t3(cls) -> "Model":
        return cls("T3")

    @classmethod
    def parse(cls, text: str) -> "Model":
        """Parse ``t1:<index>``, ``t1`` (index 1) or ``t3``."""
        m = re.fullmatch(r"\s*(t1|t3)(?::([123]))?\s*", text.lower())
        if m is None or (m.group(1) == "t3" and m.group(2) is not None):
            raise DomainError(f"cannot parse model {text!r}; expected t1:<1|2|3> or t3")
        if m.group(1) == "t3":
            return cls.t3()
        return cls.t1(int(m.group(2) or 1))

    @property
    def indices(self) -> tuple[int, ...]:
        return TREE_INDICES if self.kind == "T3" else (self.concordant_index,)

    def __str__(self):
        return "t3" if self.kind == "T3" else f"t1:{self.concordant_index}"


@dataclass(frozen=True)
class TrinomialCounts:
    n1: int
    n2: int
    n3: int

    def __post_init__(self):
        for value in (self.n1, self.n2, self.n3):
            if int(value) != value or value < 0:
                raise DomainError(f"counts must be nonnegative integers, got {self.as_tuple()}")
        if self.n < 1:
            raise DomainError("counts must not all be zero")

    @classmethod
    def coerce(cls, counts) -> "TrinomialCounts":
        if isinstance(counts, cls):
            return counts
        values = tuple(counts)
        if len(values) != 3:
            raise DomainError(f"expected three counts, got {len(values)}")
        return cls(*(int(v) if float(v).is_integer() else v for v in values))

    @property
    def n(self) -> int:
        return self.n1 + self.n2 + self.n3

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n1, self.n2, self.n3)


@dataclass(frozen=True)
class MleResult:
    phi_hat: float
    tree_index: int
    probs: tuple[float, float, float]
    loglik: float
    # True when all mass sits on the concordant topology: the supremum is
    # approached as phi -> 0+ and is not attained inside the model.
    boundary: bool = False


def loglik(counts, probs) -> float:
    """Multinomial log-likelihood (without the multinomial coefficient).

    Uses the convention 0 * log 0 = 0.
    """
    c = np.asarray(TrinomialCounts.coerce(counts).as_tuple(), dtype=float)
    return float(np.sum(xlogy(c, np.asarray(probs, dtype=float))))


def unconstrained_mle(counts) -> tuple[float, float, float]:
    c = TrinomialCounts.coerce(counts)
    return (c.n1 / c.n, c.n2 / c.n, c.n3 / c.n)


def _as_count_array(counts) -> np.ndarray:
    arr = np.asarray(counts)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise DomainError("count array must have shape (m, 3)")
    if np.any(arr < 0):
        raise DomainError("counts must be nonnegative")
    if np.any(arr.sum(axis=1) < 1):
        raise DomainError("each count vector needs n >= 1")
    return arr.astype(np.int64)


def _t1_fit(counts: np.ndarray, index: int):
    """Closed-form T1 fit for every row; returns (phi_hat, loglik)."""
    n = counts.sum(axis=1)
    n_conc = counts[:, index - 1]
    n_disc = n - n_conc
    # Stationary point of n_c log(1 - 2 phi/3) + (n - n_c) log(phi/3).
    phi_hat = np.minimum(1.0, 1.5 * n_disc / n)
    p_conc = 1.0 - 2.0 * phi_hat / 3.0
    p_disc = phi_hat / 3.0
    ll = xlogy(n_conc, p_conc) + xlogy(n_disc, p_disc)
    return phi_hat, ll


def _in_null_closure(counts: np.ndarray, index: int) -> np.ndarray:
    """Rows whose relative frequencies lie exactly on the closed T1 curve."""
    others = [i for i in range(3) if i != index - 1]
    a, b = counts[:, others[0]], counts[:, others[1]]
    return (a == b) & (counts[:, index - 1] >= a)


def lr_statistics(counts, model: Model):
    """Vectorised likelihood ratio statistics.

    ``counts`` has shape (m, 3).  Returns ``(lam, phi_hat, tree_index)``
    arrays of length m.  For T3 the winning tree is the one with the
    largest constrained log-likelihood, ties going to the smaller index.
    """
    c = _as_count_array(counts)
    n = c.sum(axis=1)
    ll_full = np.sum(xlogy(c, c / n[:, None]), axis=1)

    best_ll = np.full(len(c), -np.inf)
    best_phi = np.zeros(len(c))
    best_tree = np.zeros(len(c), dtype=np.int64)
    exact_zero = np.zeros(len(c), dtype=bool)
    for index in model.indices:
        phi_hat, ll = _t1_fit(c, index)
        better = ll > best_ll
        best_ll = np.where(better, ll, best_ll)
        best_phi = np.where(better, phi_hat, best_phi)
        best_tree = np.where(better, index, best_tree)
        exact_zero |= _in_null_closure(c, index)

    lam = np.maximum(2.0 * (ll_full - best_ll), 0.0)
    lam[exact_zero] = 0.0
    return lam, best_phi, best_tree


def constrained_mle(counts, model: Model) -> MleResult:
    """Maximum likelihood estimate over the closure of the null space."""
    c = TrinomialCounts.coerce(counts)
    arr = np.array([c.as_tuple()])
    best = None
    for index in model.indices:
        phi_hat, ll = _t1_fit(arr, index)
        if best is None or ll[0] > best[1]:
            best = (float(phi_hat[0]), float(ll[0]), index)
    phi_hat, ll, index = best
    return MleResult(
        phi_hat=phi_hat,
        tree_index=index,
        probs=probabilities_from_phi(phi_hat, index).as_tuple(),
        loglik=ll,
        boundary=phi_hat == 0.0,
    )


def lr_statistic(counts, model: Model) -> float:
    """Likelihood ratio statistic ``2 (sup_full loglik - sup_null loglik)``."""
    c = TrinomialCounts.coerce(counts)
    lam, _, _ = lr_statistics(np.array([c.as_tuple()]), model)
    return float(lam[0])

