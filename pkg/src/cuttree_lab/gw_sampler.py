"""Exact sampling of Galton-Watson trees conditioned on their size.

The sampler draws n+1 offspring values, rejects until they sum to n, applies
the unique cyclic rotation that turns the increment sequence into a
Lukasiewicz excursion, and decodes the excursion into a plane tree.  The
rotation trick (cycle lemma) makes the accepted outcome an exact draw from
the conditioned law.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, GuardError, RetryExhaustedError
from .offspring import OffspringModel
from .trees import PlaneTree

_WALK_MAX_N = 64
_NEGLIGIBLE_TAIL = 1e-18


@dataclass
class WalkPmf:
    """Exact distribution of the Lukasiewicz walk level W_n.

    ``probs[k - min_k]`` is P(W_n = k).  Truncation of an unbounded offspring
    support only removes mass from levels above the cap, so entries at
    non-positive levels (the ones the cycle lemma uses) are exact.
    """
    n: int
    min_k: int
    probs: np.ndarray

    def prob(self, k: int) -> float:
        idx = k - self.min_k
        if idx < 0 or idx >= len(self.probs):
            return 0.0
        return float(self.probs[idx])

    def total(self) -> float:
        return float(self.probs.sum())

    def items(self):
        for i, p in enumerate(self.probs):
            yield self.min_k + i, p


def exact_walk_pmf(model: OffspringModel, n: int,
                   support_cap: int | None = None) -> WalkPmf:
    """Distribution of W_n = sum of n steps of (Z - 1), by convolution.

    Guarded to n <= 64.  Models with unbounded heavy-tail support need an
    explicit ``support_cap``; entries at levels <= cap - n stay exact.
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    if n > _WALK_MAX_N:
        raise GuardError(f"exact walk pmf limited to n <= {_WALK_MAX_N}")
    if support_cap is None:
        if model.support_cap is not None:
            support_cap = model.support_cap
        else:
            cap = 1
            while model.tail(cap) > _NEGLIGIBLE_TAIL:
                cap *= 2
                if cap > 1 << 20:
                    raise GuardError(
                        "heavy-tailed support requires an explicit support_cap")
            support_cap = cap
    step = np.asarray(model.pmf(np.arange(support_cap + 1)), dtype=float)
    probs = np.array([1.0])
    for _ in range(n):
        probs = np.convolve(probs, step)
    return WalkPmf(n=n, min_k=-n, probs=probs)


def forest_size_pmf(model: OffspringModel, k: int, n: int) -> float:
    """P(Y_k = n): probability that a forest of k GW trees has n vertices.

    Computed through the cycle lemma as (k/n) * P(W_n = -k).
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    if n < k:
        return 0.0
    cap = n if model.support_cap is None else model.support_cap
    walk = exact_walk_pmf(model, n, support_cap=min(cap, n))
    return (k / n) * walk.prob(-k)


def _rotate_to_excursion(draws: np.ndarray) -> np.ndarray:
    """Apply the unique cyclic rotation making the draws an excursion coding.

    ``draws`` are n+1 offspring values summing to n; the rotation starts just
    after the first minimum of the partial sums of (draws - 1).
    """
    walk = np.cumsum(draws - 1)
    start = int(np.argmin(walk)) + 1
    if start == len(draws):
        rotated = draws
    else:
        rotated = np.concatenate([draws[start:], draws[:start]])
    return rotated


def sample_conditioned(model: OffspringModel, n: int, rng: np.random.Generator,
                       max_attempts: int = 10 ** 7,
                       return_attempts: bool = False):
    """Draw one GW tree conditioned on having n edges (n+1 vertices).

    Raises RetryExhaustedError (with the attempt count attached) if the
    rejection budget is exhausted, e.g. for sizes the offspring lattice
    cannot realise.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    attempts = 0
    # Batch whole candidate rows; cap offspring values at n + 1 (sentinel),
    # which is exact because accepted rows never contain values > n.
    # Start small and double, so cheap acceptances don't pay for a huge batch.
    rows_cap = max(1, min(4096, (1 << 22) // (n + 1)))
    rows = min(32, rows_cap)
    head = model._cdf[:min(n + 1, len(model._cdf))]
    table_short = len(model._cdf) <= n
    while attempts < max_attempts:
        batch = min(rows, max_attempts - attempts)
        rows = min(rows * 2, rows_cap)
        u = rng.random((batch, n + 1))
        hit, status = _kernels.first_accepted_row(u, head, n, table_short)
        if status == 1:
            # A uniform fell past the cached CDF table (astronomically rare):
            # finish the remaining rows with exact tail continuation.
            draws = model.capped_from_uniform(u[hit:], cap=n)
            rest = np.nonzero(draws.sum(axis=1) == n)[0]
            hit = hit + int(rest[0]) if rest.size else -1
        if hit >= 0:
            attempts += hit + 1
            degrees = _rotate_to_excursion(model.capped_from_uniform(u[hit], cap=n))
            walk = np.concatenate([[0], np.cumsum(degrees - 1)])
            if walk[-1] != -1 or np.any(walk[:-1] < 0):
                raise AssertionError("cyclic rotation failed to produce an excursion")
            tree = PlaneTree.from_degrees(degrees, check=False)
            return (tree, attempts) if return_attempts else tree
        attempts += batch
    raise RetryExhaustedError(
        f"no size-{n} tree found in {attempts} attempts "
        f"(model {model.label}; is n reachable on the offspring lattice?)",
        attempts=attempts, n=n)


def sample_pointed_gwstar(model: OffspringModel, n: int,
                          rng: np.random.Generator):
    """Draw (T, v): a size-conditioned tree with an independent uniform vertex.

    This is the size-n slice of the pointed sigma-finite measure whose mass
    at (T, v) equals the unconditioned GW weight of T.
    """
    tree = sample_conditioned(model, n, rng)
    v = int(rng.integers(0, n + 1))
    return tree, v
