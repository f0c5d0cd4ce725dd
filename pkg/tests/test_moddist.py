import numpy as np
import pytest

from cuttree_lab.errors import DomainError
from cuttree_lab.fragmentation import component_trajectories, \
    run_vertex_continuous
from cuttree_lab.moddist import (
    delta_prime,
    moddist_identity_stats,
    tail_mass_integral,
    tail_mass_profile,
)
from cuttree_lab.offspring import make_geometric_critical, scaling_sequence
from cuttree_lab.trees import PlaneTree

GEOM = make_geometric_critical()


def test_delta_prime_single_edge_equals_clock():
    rng = np.random.default_rng(30)
    tree = PlaneTree([-1, 0])
    trace = run_vertex_continuous(tree, a_n=1.0, rng=rng)
    res = component_trajectories(tree, trace, tracked=[1])
    assert delta_prime(res, 1) == pytest.approx(float(trace.times[0]))
    assert delta_prime(res, 0, 1) == delta_prime(res, 1)
    assert delta_prime(res, 0) == 0.0
    assert delta_prime(res, 1, 1) == 0.0


def test_delta_prime_pair_and_untracked():
    rng = np.random.default_rng(31)
    tree = PlaneTree([-1, 0, 1, 2])
    trace = run_vertex_continuous(tree, a_n=2.0, rng=rng)
    res = component_trajectories(tree, trace, tracked=[1, 3],
                                 pairs=[(1, 3)])
    t_sep = res.separation_times[(1, 3)]
    expected = (res.trajectories[1].integral(t_sep)
                + res.trajectories[3].integral(t_sep))
    assert delta_prime(res, 1, 3) == pytest.approx(expected)
    assert delta_prime(res, 3, 1) == pytest.approx(expected)
    with pytest.raises(DomainError):
        delta_prime(res, 1, 2)


def test_identity_stats_small_run():
    rng = np.random.default_rng(32)
    n = 100
    a_n = scaling_sequence(GEOM)(n)
    stats = moddist_identity_stats(GEOM, n, a_n, replicates=400, rng=rng)
    assert stats.replicates == 400
    assert stats.lhs > 0 and stats.rhs > 0
    # the squared-gap identity should hold within Monte Carlo noise
    assert abs(stats.lhs - stats.rhs) <= 4 * stats.se_diff
    with pytest.raises(DomainError):
        moddist_identity_stats(GEOM, n, a_n, replicates=1, rng=rng)


def test_tail_profile_monotone_and_consistent():
    rng = np.random.default_rng(33)
    n = 100
    a_n = scaling_sequence(GEOM)(n)
    means, ses = tail_mass_profile(GEOM, n, a_n, levels=range(5),
                                   replicates=200, rng=rng)
    assert means.shape == (5,)
    assert np.all(np.diff(means) <= 0)      # shared replicates: exact
    assert np.all(means >= 0)
    mean, se = tail_mass_integral(GEOM, n, a_n, l=0, replicates=50,
                                  rng=np.random.default_rng(34))
    assert mean >= 0 and se >= 0
