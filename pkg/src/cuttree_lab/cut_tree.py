"""The cut-tree of a fragmentation run.

The cut-tree records the genealogy of components: its root is the block of
all edges {1..n}, each effective event splits a block into the deleted edges
(as leaves) plus the surviving sub-blocks, and singleton blocks {i} remain
distinct from the leaf i below them.  The distance delta_n(0, i) from the
root to leaf i equals the number of cuts the component of edge i received,
up to and including the cut that removed it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .fragmentation import FragmentationTrace, _UnionFind
from .trees import PlaneTree


@dataclass
class CutTree:
    """Cut-tree with nodes = internal blocks + one leaf per edge.

    ``node_parent[x]`` is the parent node of x (-1 for the root);
    ``leaf_node[i]`` is the node id of the leaf for edge i (index 0 unused);
    ``node_event[x]`` is the fragmentation event that carved block x out of
    its parent (-1 for the root and for leaves).
    """
    n: int
    node_parent: np.ndarray
    node_depth: np.ndarray
    leaf_node: np.ndarray
    root: int
    node_event: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.node_parent)

    def node_of(self, i: int) -> int:
        """Node id for point i: 0 means the root block, 1..n mean leaves."""
        if i == 0:
            return self.root
        if not (1 <= i <= self.n):
            raise DomainError(f"point index {i} out of range")
        return int(self.leaf_node[i])


def build_cut_tree(tree: PlaneTree, trace: FragmentationTrace) -> CutTree:
    """Construct the cut-tree of a completed fragmentation trace.

    Runs the deletions backwards: each effective event merges components and
    becomes an internal node whose children are the leaves of its deleted
    edges plus the nodes of the merged sub-blocks.
    """
    n = tree.n_edges
    if np.any(trace.removal_event[1:] < 0):
        raise DomainError("trace is incomplete: some edges were never removed")
    parent_vertex = tree.parent
    # Leaves occupy node ids 0..n-1 (edge i -> id i-1); internal nodes follow.
    node_parent = [-1] * n
    node_event = [-1] * n
    leaf_node = np.concatenate([[-1], np.arange(n)])
    uf = _UnionFind(n + 1)
    block_of_root = {}  # union-find root -> node id of the block (>= 2 vertices)
    top = -1
    ev_ptr, ev_edges = trace.event_csr()
    for r in range(trace.n_events - 1, -1, -1):
        deleted = ev_edges[ev_ptr[r]:ev_ptr[r + 1]]
        if not len(deleted):
            continue
        node = len(node_parent)
        node_parent.append(-1)
        node_event.append(r)
        roots = []
        for j in deleted:
            for x in (int(j), int(parent_vertex[j])):
                rx = uf.find(x)
                if rx not in roots:
                    roots.append(rx)
        for rx in roots:
            if uf.size[rx] >= 2:  # blocks are components with >= 1 edge
                child = block_of_root.pop(rx)
                node_parent[child] = node
        for j in deleted:
            node_parent[j - 1] = node
            uf.union(int(j), int(parent_vertex[j]))
        top = node
        block_of_root[uf.find(int(deleted[0]))] = node
    root = top
    node_parent = np.asarray(node_parent, dtype=np.int64)
    node_event = np.asarray(node_event, dtype=np.int64)
    depth = np.full(len(node_parent), -1, dtype=np.int64)

    def depth_of(x):
        chain = []
        while depth[x] < 0:
            chain.append(x)
            if node_parent[x] < 0:
                depth[x] = 0
                break
            x = node_parent[x]
        d = depth[x]
        for y in reversed(chain):
            if y == x:
                continue
            d += 1
            depth[y] = d
        return depth[chain[0]] if chain else depth[x]

    for x in range(len(node_parent)):
        depth_of(x)
    return CutTree(n=n, node_parent=node_parent, node_depth=depth,
                   leaf_node=leaf_node, root=root, node_event=node_event)


def cut_distance(ct: CutTree, i: int, j: int) -> int:
    """Graph distance in the cut-tree between points i and j.

    Point 0 is the root block; points 1..n are the edge leaves.
    """
    a, b = ct.node_of(i), ct.node_of(j)
    if a == b:
        return 0
    da, db = int(ct.node_depth[a]), int(ct.node_depth[b])
    dist = 0
    while da > db:
        a = int(ct.node_parent[a])
        da -= 1
        dist += 1
    while db > da:
        b = int(ct.node_parent[b])
        db -= 1
        dist += 1
    while a != b:
        a = int(ct.node_parent[a])
        b = int(ct.node_parent[b])
        dist += 2
    return dist


def naive_cut_distance_oracle(tree: PlaneTree, trace: FragmentationTrace,
                              i: int, j: int) -> int:
    """Cut-tree distance by direct forward replay with explicit edge sets.

    Independent of the union-find construction: maintains the actual
    components as sets, counts the cuts seen by the components of e_i and
    e_j, and locates the block where their histories diverge.
    """
    n = tree.n_edges
    for x in (i, j):
        if not (0 <= x <= n):
            raise DomainError(f"point index {x} out of range")
    if i == j:
        return 0
    # Components as sets of edges; comp_id[e] -> key into comps.
    comps = {0: set(range(1, n + 1))}
    comp_id = {e: 0 for e in range(1, n + 1)}
    next_id = 1
    adjacency = tree.children

    def split(block_edges, removed):
        """Connected pieces of block_edges minus removed, as sets of edges."""
        rest = block_edges - removed
        pieces = []
        unseen = set(rest)
        while unseen:
            seed = unseen.pop()
            piece = {seed}
            frontier = [seed]
            while frontier:
                e = frontier.pop()
                for nb in adjacency[int(tree.parent[e])]:
                    if nb in unseen:
                        unseen.discard(nb)
                        piece.add(nb)
                        frontier.append(nb)
                for nb in adjacency[e]:
                    if nb in unseen:
                        unseen.discard(nb)
                        piece.add(nb)
                        frontier.append(nb)
                pe = int(tree.parent[e])
                if pe != 0 and pe in unseen:
                    unseen.discard(pe)
                    piece.add(pe)
                    frontier.append(pe)
            pieces.append(piece)
        return pieces

    count_i = 0   # cuts seen by the component of e_i
    count_j = 0
    common = 0    # cuts seen while e_i and e_j shared a block
    together = i != 0 and j != 0
    alive_i, alive_j = i != 0, j != 0

    for r in range(trace.n_events):
        removed = set(trace.deleted[r])
        if not removed:
            continue
        block = comps.pop(comp_id[next(iter(removed))])
        in_i = alive_i and i in block
        in_j = alive_j and j in block
        if in_i:
            count_i += 1
        if in_j:
            count_j += 1
        for piece in split(block, removed):
            comps[next_id] = piece
            for e in piece:
                comp_id[e] = next_id
            next_id += 1
        alive_i = alive_i and i not in removed
        alive_j = alive_j and j not in removed
        if together and in_i and in_j:
            if alive_i and alive_j and comp_id[i] == comp_id[j]:
                common += 1
            else:
                together = False
    if i == 0 or j == 0:
        # distance from the root block to leaf x is the cut count of e_x
        return count_j if i == 0 else count_i
    return count_i + count_j - 2 * common
