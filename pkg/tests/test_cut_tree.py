import dataclasses

import numpy as np
import pytest

from cuttree_lab.cut_tree import build_cut_tree, cut_distance, \
    naive_cut_distance_oracle
from cuttree_lab.errors import DomainError
from cuttree_lab.fragmentation import component_trajectories, \
    run_edge_variant, run_vertex_discrete
from cuttree_lab.gw_sampler import sample_conditioned
from cuttree_lab.offspring import make_custom_critical, make_geometric_critical
from cuttree_lab.trees import PlaneTree

GEOM = make_geometric_critical()
BINARY = make_custom_critical({0: 0.5, 2: 0.5}, label="binary")


def test_single_edge_cut_tree():
    tree = PlaneTree([-1, 0])
    trace = run_vertex_discrete(tree, order=[1])
    ct = build_cut_tree(tree, trace)
    # two nodes: the root block {1} and the leaf for edge 1
    assert ct.n_nodes == 2
    assert cut_distance(ct, 0, 1) == 1
    assert cut_distance(ct, 0, 0) == 0
    assert cut_distance(ct, 1, 1) == 0


def test_path_hand_distances():
    # path 0-1-2, order (1, 2): delta(0,1)=1, delta(0,2)=2, delta(1,2)=3
    tree = PlaneTree([-1, 0, 1])
    trace = run_vertex_discrete(tree, order=[1, 2])
    ct = build_cut_tree(tree, trace)
    assert cut_distance(ct, 0, 1) == 1
    assert cut_distance(ct, 0, 2) == 2
    assert cut_distance(ct, 1, 2) == 3


def test_star_hand_distances():
    # both edges die in the single effective event: one internal node
    tree = PlaneTree([-1, 0, 0])
    trace = run_vertex_discrete(tree, order=[1, 2])
    ct = build_cut_tree(tree, trace)
    assert cut_distance(ct, 0, 1) == 1
    assert cut_distance(ct, 0, 2) == 1
    assert cut_distance(ct, 1, 2) == 2


def test_node_of_errors_and_incomplete_trace():
    tree = PlaneTree([-1, 0, 1])
    trace = run_vertex_discrete(tree, order=[1, 2])
    ct = build_cut_tree(tree, trace)
    with pytest.raises(DomainError):
        ct.node_of(3)
    with pytest.raises(DomainError):
        cut_distance(ct, 0, -1)
    bad = dataclasses.replace(trace, removal_event=trace.removal_event.copy())
    bad.removal_event[2] = -1
    with pytest.raises(DomainError):
        build_cut_tree(tree, bad)


def test_root_distance_equals_cut_count():
    rng = np.random.default_rng(20)
    for _ in range(40):
        n = int(rng.integers(2, 50))
        tree = sample_conditioned(GEOM, n, rng)
        trace = run_vertex_discrete(tree, rng=rng)
        ct = build_cut_tree(tree, trace)
        edges = [1, n // 2 + 1, n]
        res = component_trajectories(tree, trace, tracked=edges)
        for i in edges:
            assert cut_distance(ct, 0, i) == res.cut_counts[i]


@pytest.mark.parametrize("model", [GEOM, BINARY])
@pytest.mark.parametrize("mode", ["vertex", "edge"])
def test_cut_distance_matches_naive_oracle(model, mode):
    rng = np.random.default_rng(21)
    for _ in range(50):
        n = 2 * int(rng.integers(1, 14))
        tree = sample_conditioned(model, n, rng, max_attempts=10 ** 6)
        if mode == "vertex":
            trace = run_vertex_discrete(tree, rng=rng)
        else:
            trace = run_edge_variant(tree, rng=rng)
        ct = build_cut_tree(tree, trace)
        points = [0] + sorted(
            rng.choice(np.arange(1, n + 1), size=min(4, n),
                       replace=False).tolist())
        for a in points:
            for b in points:
                assert cut_distance(ct, a, b) == \
                    naive_cut_distance_oracle(tree, trace, a, b)


def test_cut_tree_structure_invariants():
    rng = np.random.default_rng(22)
    tree = sample_conditioned(GEOM, 60, rng)
    trace = run_vertex_discrete(tree, rng=rng)
    ct = build_cut_tree(tree, trace)
    n_effective = sum(1 for d in trace.deleted if d)
    assert ct.n_nodes == 60 + n_effective
    assert ct.node_parent[ct.root] == -1
    assert ct.node_depth[ct.root] == 0
    # every leaf hangs below the root and its carving event is unset
    for i in range(1, 61):
        node = ct.node_of(i)
        assert ct.node_event[node] == -1
        assert ct.node_depth[node] >= 1
