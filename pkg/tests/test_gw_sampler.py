from collections import Counter

import numpy as np
import pytest

from cuttree_lab.errors import DomainError, GuardError, RetryExhaustedError
from cuttree_lab.gw_sampler import (
    exact_walk_pmf,
    forest_size_pmf,
    sample_conditioned,
    sample_pointed_gwstar,
)
from cuttree_lab.offspring import make_custom_critical, make_geometric_critical, \
    make_power_tail_critical

GEOM = make_geometric_critical()
POWER = make_power_tail_critical(1.5)
BINARY = make_custom_critical({0: 0.5, 2: 0.5}, label="binary")


def brute_walk_pmf(model, n, support):
    """Distribution of the sum of n steps (Z - 1) by explicit iteration."""
    dist = {0: 1.0}
    for _ in range(n):
        nxt = {}
        for level, p in dist.items():
            for k in range(support + 1):
                q = p * float(model.pmf(k))
                if q:
                    nxt[level + k - 1] = nxt.get(level + k - 1, 0.0) + q
        dist = nxt
    return dist


def test_exact_walk_pmf_matches_brute_force():
    walk = exact_walk_pmf(BINARY, 4)
    brute = brute_walk_pmf(BINARY, 4, 2)
    for k, p in brute.items():
        assert walk.prob(k) == pytest.approx(p, abs=1e-15)
    assert walk.prob(99) == 0.0
    assert walk.total() == pytest.approx(1.0, abs=1e-12)


def test_exact_walk_pmf_geometric_auto_cap():
    walk = exact_walk_pmf(GEOM, 6)
    brute = brute_walk_pmf(GEOM, 6, 40)
    for k in range(-6, 10):
        assert walk.prob(k) == pytest.approx(brute.get(k, 0.0), abs=1e-11)


def test_exact_walk_pmf_guards():
    with pytest.raises(GuardError):
        exact_walk_pmf(GEOM, 65)
    with pytest.raises(DomainError):
        exact_walk_pmf(GEOM, -1)
    with pytest.raises(GuardError):
        exact_walk_pmf(POWER, 5)            # unbounded heavy tail, no cap
    walk = exact_walk_pmf(POWER, 5, support_cap=50)
    assert walk.prob(-5) > 0.0


def test_forest_size_pmf_binary_hand_values():
    # one binary tree on 1 vertex: the empty root, probability nu(0)
    assert forest_size_pmf(BINARY, 1, 1) == pytest.approx(0.5)
    # one binary tree on 3 vertices: root with two leaves
    assert forest_size_pmf(BINARY, 1, 3) == pytest.approx(0.5 * 0.25)
    # even total sizes are unreachable for single binary trees
    assert forest_size_pmf(BINARY, 1, 2) == 0.0
    assert forest_size_pmf(BINARY, 2, 1) == 0.0
    with pytest.raises(DomainError):
        forest_size_pmf(BINARY, 0, 3)


def test_forest_size_pmf_geometric_single_tree():
    # P(|T| = m + 1 vertices) for geometric nu is Catalan(m) / 2^(2m+1)
    catalan = [1, 1, 2, 5, 14]
    for m, c in enumerate(catalan):
        assert forest_size_pmf(GEOM, 1, m + 1) == pytest.approx(
            c / 2.0 ** (2 * m + 1), abs=1e-14)


def test_sample_conditioned_exactness_three_edges():
    rng = np.random.default_rng(10)
    counts = Counter()
    reps = 30_000
    for _ in range(reps):
        counts[sample_conditioned(GEOM, 3, rng).degree_tuple()] += 1
    assert len(counts) == 5
    for freq in counts.values():
        assert freq / reps == pytest.approx(0.2, abs=0.012)


def test_sample_conditioned_sizes_and_errors():
    rng = np.random.default_rng(11)
    for n in (1, 2, 17, 64):
        t = sample_conditioned(GEOM, n, rng)
        assert t.n_edges == n
    with pytest.raises(DomainError):
        sample_conditioned(GEOM, 0, rng)


def test_sample_conditioned_power_tail():
    rng = np.random.default_rng(12)
    t, attempts = sample_conditioned(POWER, 30, rng, return_attempts=True)
    assert t.n_edges == 30
    assert attempts >= 1


def test_retry_exhausted_on_unreachable_size():
    # binary trees have odd vertex counts only: n = 3 edges is unreachable
    rng = np.random.default_rng(13)
    with pytest.raises(RetryExhaustedError) as err:
        sample_conditioned(BINARY, 3, rng, max_attempts=3000)
    assert err.value.attempts == 3000
    assert err.value.n == 3


def test_binary_even_sizes_reachable():
    rng = np.random.default_rng(14)
    t = sample_conditioned(BINARY, 6, rng)
    assert t.n_edges == 6
    assert all(d in (0, 2) for d in t.degree_tuple())


def test_sample_pointed_gwstar():
    rng = np.random.default_rng(15)
    tree, v = sample_pointed_gwstar(GEOM, 9, rng)
    assert tree.n_edges == 9
    assert 0 <= v <= 9
