"""Rooted plane trees in depth-first order, their codings, and surgery.

Vertices of an n-edge tree are numbered 0..n in depth-first (preorder) order;
vertex 0 is the root.  Edge j (1 <= j <= n) is the edge between vertex j and
its parent, so edges inherit the vertex numbering.  This indexing makes the
Lukasiewicz walk, the height process, and subtree extraction all contiguous
array operations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, GuardError, InputError

_ENUMERATION_MAX_EDGES = 10


class PlaneTree:
    """A rooted plane tree stored as parent/degree arrays in DFS order."""

    __slots__ = ("parent", "degree", "_children")

    def __init__(self, parent, degree=None, check: bool = True):
        self.parent = np.asarray(parent, dtype=np.int64)
        if degree is None:
            degree = np.bincount(self.parent[1:], minlength=len(self.parent))
        self.degree = np.asarray(degree, dtype=np.int64)
        self._children = None
        if check:
            self._validate()

    def _validate(self):
        n = self.n_edges
        if len(self.parent) != n + 1 or self.parent[0] != -1:
            raise InputError("parent array must have parent[0] == -1")
        if n and (np.any(self.parent[1:] < 0) or np.any(self.parent[1:] >= n + 1)):
            raise InputError("parent indices out of range")
        counted = np.bincount(self.parent[1:], minlength=n + 1) if n else \
            np.zeros(1, dtype=np.int64)
        if not np.array_equal(counted, self.degree):
            raise InputError("degree array inconsistent with parent array")
        # DFS numbering: children must be visited in increasing-index order
        # and each subtree must occupy a contiguous index block.
        order = _dfs_order(self.children, 0)
        if not np.array_equal(order, np.arange(n + 1)):
            raise InputError("vertices are not in depth-first order")

    @property
    def n_edges(self) -> int:
        return len(self.parent) - 1

    @property
    def n_vertices(self) -> int:
        return len(self.parent)

    @property
    def children(self):
        """Children lists; in DFS numbering these are sorted ascending."""
        if self._children is None:
            ch = [[] for _ in range(self.n_vertices)]
            for v in range(1, self.n_vertices):
                ch[self.parent[v]].append(v)
            self._children = ch
        return self._children

    def subtree_sizes(self):
        """sizes[v] = number of vertices in the subtree rooted at v."""
        sizes = np.ones(self.n_vertices, dtype=np.int64)
        for v in range(self.n_vertices - 1, 0, -1):
            sizes[self.parent[v]] += sizes[v]
        return sizes

    def heights(self):
        h = np.zeros(self.n_vertices, dtype=np.int64)
        for v in range(1, self.n_vertices):
            h[v] = h[self.parent[v]] + 1
        return h

    def degree_tuple(self):
        """DFS degree sequence; a canonical encoding of the plane tree."""
        return tuple(int(d) for d in self.degree)

    def to_lukasiewicz_line(self) -> str:
        """Canonical text form: comma-separated Lukasiewicz increments."""
        return ",".join(str(int(d) - 1) for d in self.degree)

    @classmethod
    def from_lukasiewicz_line(cls, line: str) -> "PlaneTree":
        try:
            incs = [int(tok) for tok in line.strip().split(",")]
        except ValueError as exc:
            raise InputError(f"malformed increment line: {line!r}") from exc
        walk = np.concatenate([[0], np.cumsum(incs)])
        return decode_lukasiewicz(walk)

    @classmethod
    def from_degrees(cls, degrees, check: bool = True) -> "PlaneTree":
        """Build from a DFS degree sequence d_0..d_n with sum(d) = n."""
        degrees = np.asarray(degrees, dtype=np.int64)
        n = len(degrees) - 1
        if not check:
            # Caller vouches for validity (e.g. decoded from a checked
            # excursion); take the compiled fast path.
            return cls(_kernels.parents_from_degrees(degrees), degrees,
                       check=False)
        parent = np.empty(n + 1, dtype=np.int64)
        parent[0] = -1
        stack = [0]
        remaining = [int(degrees[0])]
        for v in range(1, n + 1):
            while remaining and remaining[-1] == 0:
                stack.pop()
                remaining.pop()
            if not stack:
                raise InputError("degree sequence is not a valid DFS coding")
            parent[v] = stack[-1]
            remaining[-1] -= 1
            stack.append(v)
            remaining.append(int(degrees[v]))
        if any(remaining[i] != 0 for i in range(len(remaining))):
            raise InputError("degree sequence is not a valid DFS coding")
        return cls(parent, degrees, check=check)

    def __eq__(self, other):
        return isinstance(other, PlaneTree) and \
            np.array_equal(self.parent, other.parent)

    def __hash__(self):
        return hash(self.degree_tuple())

    def __repr__(self):
        return f"PlaneTree(n_edges={self.n_edges})"


def _dfs_order(children, root):
    order = []
    stack = [root]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(reversed(children[v]))
    return np.asarray(order, dtype=np.int64)


def decode_lukasiewicz(walk) -> PlaneTree:
    """Decode an excursion W_0..W_{n+1} of the Lukasiewicz walk into a tree.

    Requires W_0 = 0, increments >= -1, W_j >= 0 for j <= n and
    W_{n+1} = -1; anything else raises InputError.
    """
    walk = np.asarray(walk, dtype=np.int64)
    if len(walk) < 2:
        raise InputError("walk must have at least two points")
    n = len(walk) - 2
    incs = np.diff(walk)
    if walk[0] != 0 or np.any(incs < -1):
        raise InputError("not a Lukasiewicz coding: bad start or increment")
    if np.any(walk[1:n + 1] < 0) or walk[n + 1] != -1:
        raise InputError("not an excursion: walk must stay >= 0 and end at -1")
    return PlaneTree.from_degrees(incs + 1, check=False)


@dataclass
class TreeCodings:
    """The four discrete codings of an n-edge plane tree.

    lukasiewicz       W_0..W_{n+1}, W_j = sum of first j degrees minus j
    height            H_0..H_{n+1} with the terminal zero appended
    contour           C_0..C_{2n+1}: Euler-tour heights plus a trailing zero
    descendant_counts D_0..D_n, D_j = #strict descendants of v_j
    """
    lukasiewicz: np.ndarray
    height: np.ndarray
    contour: np.ndarray
    descendant_counts: np.ndarray


def encode_codings(tree: PlaneTree) -> TreeCodings:
    """Compute all four codings of a tree."""
    n = tree.n_edges
    walk = np.concatenate([[0], np.cumsum(tree.degree - 1)])
    h = tree.heights()
    height = np.concatenate([h, [0]])
    desc = tree.subtree_sizes() - 1
    # Euler tour: one height entry per unit move of the contour walker.
    contour = np.empty(2 * n + 2, dtype=np.int64)
    contour[0] = 0
    pos = 1
    stack = [(0, iter(tree.children[0]))]
    while stack:
        v, it = stack[-1]
        child = next(it, None)
        if child is None:
            stack.pop()
            if stack:
                contour[pos] = h[stack[-1][0]]
                pos += 1
        else:
            contour[pos] = h[child]
            pos += 1
            stack.append((child, iter(tree.children[child])))
    contour[pos] = 0  # trailing zero
    return TreeCodings(walk, height, contour, desc)


def symmetric_index(tree: PlaneTree, j: int, codings: TreeCodings | None = None) -> int:
    """DFS index of vertex j after reversing every child order.

    Uses the identity j~ = n - j + H_j - D_j.
    """
    n = tree.n_edges
    if not (0 <= j <= n):
        raise DomainError(f"vertex index {j} out of range")
    if codings is None:
        codings = encode_codings(tree)
    return int(n - j + codings.height[j] - codings.descendant_counts[j])


def symmetrize(tree: PlaneTree) -> tuple[PlaneTree, np.ndarray]:
    """Reverse all child orders; return (new tree, old-index -> new-index map)."""
    rev = [list(reversed(c)) for c in tree.children]
    order = _dfs_order(rev, 0)
    index_map = np.empty(tree.n_vertices, dtype=np.int64)
    index_map[order] = np.arange(tree.n_vertices)
    parent = np.full(tree.n_vertices, -1, dtype=np.int64)
    for v in range(1, tree.n_vertices):
        parent[index_map[v]] = index_map[tree.parent[v]]
    return PlaneTree(parent, check=False), index_map


def _tree_from_children_map(children_map, root) -> PlaneTree:
    """Renumber an arbitrary-keyed children map into a DFS PlaneTree."""
    order = []
    stack = [root]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(reversed(children_map.get(v, ())))
    index = {v: i for i, v in enumerate(order)}
    parent = np.full(len(order), -1, dtype=np.int64)
    for v in order:
        for c in children_map.get(v, ()):
            parent[index[c]] = index[v]
    return PlaneTree(parent, check=False)


def point_decompose(tree: PlaneTree, v: int):
    """Decompose a pointed tree (T, v), v != root, into three plane trees.

    Returns (T_v, T_up, T_hat):

    * T_v   the subtree above v (v becomes the root);
    * T_up  T with the strict descendants of v removed (v becomes a leaf);
    * T_hat T_up with v and its edge removed, a fresh leaf appended as the
            last child of the old root, and the result re-rooted at the old
            parent of v.  Degrees are preserved as a multiset.
    """
    n = tree.n_edges
    if v == 0:
        raise DomainError("the distinguished vertex must not be the root")
    if not (1 <= v <= n):
        raise DomainError(f"vertex index {v} out of range")
    size_v = int(tree.subtree_sizes()[v])

    # T_v: the DFS block [v, v + size_v - 1], shifted to start at 0.
    parent_sub = tree.parent[v:v + size_v] - v
    parent_sub[0] = -1
    t_v = PlaneTree(parent_sub, check=False)

    # T_up: delete the block of strict descendants of v.
    keep = np.concatenate([np.arange(v + 1), np.arange(v + size_v, n + 1)])
    shift = lambda o: o if o <= v else o - (size_v - 1)  # noqa: E731
    parent_up = np.array([-1] + [shift(int(tree.parent[o])) for o in keep[1:]],
                         dtype=np.int64)
    t_up = PlaneTree(parent_up, check=False)

    # T_hat: work on T_up's children map with v removed and the path from the
    # root to parent(v) re-oriented; a fresh leaf (token -2) replaces the lost
    # child slot of the old root.
    v_up = v  # index of v inside T_up (prefix indices unchanged)
    p_v = int(parent_up[v_up])
    children_map = {u: [c for c in t_up.children[u]] for u in range(t_up.n_vertices)}
    children_map[p_v] = [c for c in children_map[p_v] if c != v_up]
    del children_map[v_up]
    path = [p_v]
    while path[-1] != 0:
        path.append(int(parent_up[path[-1]]))
    # path = [p(v), ..., root]; flip each path edge, appending the former
    # parent as the last child of its former child.
    for lower, upper in zip(path[:-1], path[1:]):
        children_map[upper] = [c for c in children_map[upper] if c != lower]
        children_map[lower] = children_map[lower] + [upper]
    children_map[0] = children_map.get(0, []) + [-2]  # the fresh leaf
    children_map[-2] = []
    t_hat = _tree_from_children_map(children_map, p_v)
    return t_v, t_up, t_hat


@dataclass
class Shape:
    """A reduced tree: the spanned subtree of the root and a set of marks,
    with pass-through vertices contracted into weighted edges.

    tree          the shape as a plane tree (DFS order)
    edge_lengths  edge_lengths[j] = host-graph length of shape edge j
                  (the edge below shape vertex j); index 0 unused
    host_vertex   host_vertex[j] = index in the host tree of shape vertex j
    """
    tree: PlaneTree
    edge_lengths: np.ndarray
    host_vertex: np.ndarray


def reduced_shape(tree: PlaneTree, marks) -> Shape:
    """Contract the subtree spanned by the root and ``marks`` into a shape.

    Retained vertices are the root, the marks, and every branch point of the
    spanned subtree; maximal chains of unmarked degree-1 vertices collapse
    into single edges whose lengths record the host distances.
    """
    marks = {int(m) for m in marks}
    if not marks:
        raise InputError("need at least one mark")
    for m in marks:
        if not (0 <= m <= tree.n_edges):
            raise DomainError(f"mark {m} out of range")
    spanned = {0}
    for m in marks:
        u = m
        while u not in spanned:
            spanned.add(u)
            u = int(tree.parent[u])
    span_children = {u: [c for c in tree.children[u] if c in spanned]
                     for u in spanned}
    retained = {u for u in spanned
                if u == 0 or u in marks or len(span_children[u]) >= 2}

    shape_children = {}
    lengths = {}
    order = []

    def attach(u):
        order.append(u)
        shape_children[u] = []
        for c in span_children[u]:
            length = 1
            w = c
            while w not in retained:
                (w,) = span_children[w]
                length += 1
            shape_children[u].append(w)
            lengths[w] = length
            attach(w)

    attach(0)
    index = {u: i for i, u in enumerate(order)}
    parent = np.full(len(order), -1, dtype=np.int64)
    edge_lengths = np.zeros(len(order), dtype=np.int64)
    host = np.empty(len(order), dtype=np.int64)
    for u in order:
        host[index[u]] = u
        for c in shape_children[u]:
            parent[index[c]] = index[u]
            edge_lengths[index[c]] = lengths[c]
    return Shape(PlaneTree(parent, check=False), edge_lengths, host)


def canonical_shape(tree: PlaneTree, v: int = 0):
    """Canonical form of the rooted tree ignoring plane order.

    Two plane trees have equal canonical shapes iff they coincide as rooted
    (unordered) trees: children subtrees are sorted recursively.
    """
    return tuple(sorted(canonical_shape(tree, c) for c in tree.children[v]))


def ancestral_degree_sum(tree: PlaneTree, j: int) -> int:
    """Sum of (degree - 1) over the strict non-root ancestors of vertex j."""
    if not (0 <= j <= tree.n_edges):
        raise DomainError(f"vertex index {j} out of range")
    total = 0
    u = int(tree.parent[j]) if j != 0 else -1
    while u > 0:
        total += int(tree.degree[u]) - 1
        u = int(tree.parent[u])
    return total


def enumerate_plane_trees(model, m: int):
    """All plane trees with m edges and their probabilities under the model.

    Returns a list of (PlaneTree, probability) pairs; zero-probability trees
    are skipped.  Guarded to m <= 10.
    """
    if m > _ENUMERATION_MAX_EDGES:
        raise GuardError(f"enumeration limited to m <= {_ENUMERATION_MAX_EDGES}")
    if m < 0:
        raise DomainError("m must be >= 0")
    pmf_cache = {}

    def nu(k):
        if k not in pmf_cache:
            pmf_cache[k] = float(model.pmf(k))
        return pmf_cache[k]

    out = []
    degs = np.empty(m + 1, dtype=np.int64)

    def rec(pos, total, weight):
        # pos vertices placed, degree sum = total, partial-sum constraint
        # total >= pos must hold at every step (Lukasiewicz positivity).
        if pos == m + 1:
            if total == m:
                out.append((PlaneTree.from_degrees(degs.copy(), check=False),
                            weight))
            return
        for d in range(0, m - total + 1):
            if total + d < min(pos + 1, m):
                continue
            w = weight * nu(d)
            if w == 0.0:
                continue
            degs[pos] = d
            rec(pos + 1, total + d, w)

    rec(0, 0, 1.0)
    return out
