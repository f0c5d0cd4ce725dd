"""Fragmentation dynamics on plane trees.

Edges are indexed by their lower (child) vertex, 1..n.  A run marks each edge
exactly once, in a uniform random order (discrete clock) or at independent
exponential times with mean a_n (continuous clock).

* vertex mode: when the marked edge is still alive, every surviving edge
  sharing its upper endpoint is deleted together with it; marks landing on
  dead edges are recorded as neutral steps.
* edge mode: the marked edge alone is deleted; every step is effective.

Component histories are recovered afterwards by replaying the deletions
backwards with a union-find, which turns every question about "the component
of edge i just before event r" into two find() calls.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DomainError, InputError
from .trees import PlaneTree


@dataclass
class FragmentationEvent:
    """One mark: its time, location, and the edges it deleted (possibly none)."""
    index: int
    time: float
    marked_edge: int
    marked_vertex: int
    deleted: tuple
    neutral: bool


@dataclass
class FragmentationTrace:
    """Full record of a fragmentation run on one tree.

    Deletions are stored compactly as (removal_event, and an event-indexed
    CSR view); ``deleted`` reconstructs per-event edge lists on demand.
    """
    mode: str          # "vertex" | "edge"
    clock: str         # "discrete" | "continuous"
    n_edges: int
    a_n: float | None
    marked_edge: np.ndarray       # per event, the marked edge
    marked_vertex: np.ndarray     # per event, its upper endpoint
    times: np.ndarray             # per event
    neutral: np.ndarray           # per event
    removal_event: np.ndarray     # per edge 1..n -> deleting event (index 0 unused)
    removal_time: np.ndarray      # per edge 1..n -> time of that event
    _deleted: list | None = field(default=None, repr=False)
    _ev_csr: tuple | None = field(default=None, repr=False)

    @property
    def n_events(self) -> int:
        return len(self.marked_edge)

    def event_csr(self):
        """(ev_ptr, ev_edges): edges deleted by event r are
        ev_edges[ev_ptr[r]:ev_ptr[r+1]]."""
        if self._ev_csr is None:
            counts = np.bincount(self.removal_event[1:],
                                 minlength=self.n_events)
            ev_ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
            ev_edges = np.argsort(self.removal_event[1:],
                                  kind="stable").astype(np.int64) + 1
            self._ev_csr = (ev_ptr, ev_edges)
        return self._ev_csr

    @property
    def deleted(self) -> list:
        if self._deleted is None:
            ev_ptr, ev_edges = self.event_csr()
            self._deleted = [
                sorted(int(e) for e in ev_edges[ev_ptr[r]:ev_ptr[r + 1]])
                for r in range(self.n_events)]
        return self._deleted

    def events(self):
        for r in range(self.n_events):
            yield FragmentationEvent(
                index=r, time=float(self.times[r]),
                marked_edge=int(self.marked_edge[r]),
                marked_vertex=int(self.marked_vertex[r]),
                deleted=tuple(self.deleted[r]),
                neutral=bool(self.neutral[r]))


def _event_schedule(n, clock, rng, a_n, order):
    """Return (edge order, event times) for one run."""
    if order is not None:
        order = np.asarray(order, dtype=np.int64)
        if sorted(order.tolist()) != list(range(1, n + 1)):
            raise InputError("order must be a permutation of the edges 1..n")
        if clock != "discrete":
            raise InputError("an explicit order implies the discrete clock")
        return order, np.arange(1, n + 1, dtype=float)
    if rng is None:
        raise InputError("need either an explicit order or an rng")
    if clock == "discrete":
        order = rng.permutation(n).astype(np.int64) + 1
        return order, np.arange(1, n + 1, dtype=float)
    if clock == "continuous":
        if a_n is None or a_n <= 0:
            raise DomainError("continuous clock requires a_n > 0")
        clocks = rng.exponential(scale=a_n, size=n)
        order = np.argsort(clocks, kind="stable").astype(np.int64) + 1
        return order, clocks[order - 1]
    raise InputError(f"unknown clock {clock!r}")


def _children_csr(tree: PlaneTree):
    parent = tree.parent
    n = tree.n_edges
    counts = np.bincount(parent[1:], minlength=n + 1) if n else \
        np.zeros(1, dtype=np.int64)
    ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    idx = np.argsort(parent[1:], kind="stable").astype(np.int64) + 1
    return ptr, idx


def _run(tree, mode, clock, rng, a_n, order):
    n = tree.n_edges
    order, times = _event_schedule(n, clock, rng, a_n, order)
    parent = tree.parent
    if mode == "vertex":
        child_ptr, child_idx = _children_csr(tree)
        removal_event, neutral = _kernels.vertex_removal_events(
            parent, child_ptr, child_idx, order)
    else:
        removal_event = np.full(n + 1, -1, dtype=np.int64)
        removal_event[order] = np.arange(n, dtype=np.int64)
        neutral = np.zeros(n, dtype=bool)
    removal_time = np.full(n + 1, np.nan)
    removal_time[1:] = times[removal_event[1:]]
    return FragmentationTrace(
        mode=mode, clock=clock, n_edges=n, a_n=a_n,
        marked_edge=order, marked_vertex=parent[order], times=times,
        neutral=neutral, removal_event=removal_event,
        removal_time=removal_time)


def run_vertex_discrete(tree: PlaneTree, order=None,
                        rng: np.random.Generator | None = None):
    """Vertex fragmentation driven by a uniform (or given) edge permutation."""
    return _run(tree, "vertex", "discrete", rng, None, order)


def run_vertex_continuous(tree: PlaneTree, a_n: float,
                          rng: np.random.Generator):
    """Vertex fragmentation with i.i.d. Exp(mean a_n) edge clocks."""
    return _run(tree, "vertex", "continuous", rng, a_n, None)


def run_edge_variant(tree: PlaneTree, clock: str = "discrete", order=None,
                     rng: np.random.Generator | None = None,
                     a_n: float | None = None):
    """Classical edge fragmentation: each mark deletes only the marked edge."""
    return _run(tree, "edge", clock, rng, a_n, order)


def run_coupled_discrete(tree: PlaneTree, rng: np.random.Generator):
    """Run both modes off one shared permutation; returns (vertex, edge) traces."""
    order = rng.permutation(tree.n_edges).astype(np.int64) + 1
    return (_run(tree, "vertex", "discrete", None, None, order),
            _run(tree, "edge", "discrete", None, None, order))


@dataclass
class MassTrajectory:
    """Piecewise-constant history of the component mass around one edge.

    ``breakpoints`` holds (time, surviving edge count) pairs; the count is the
    value on [time, next time).  Mass is the count divided by n.
    """
    edge: int
    n: int
    breakpoints: list

    def mass_at(self, t: float) -> float:
        value = 0
        for time, edges in self.breakpoints:
            if time <= t:
                value = edges
            else:
                break
        return value / self.n

    def integral(self, from_time: float = 0.0) -> float:
        """Integral of the mass over [from_time, infinity)."""
        total = 0.0
        for (t0, edges), (t1, _) in zip(self.breakpoints, self.breakpoints[1:]):
            lo = max(t0, from_time)
            if t1 > lo:
                total += (t1 - lo) * edges
        return total / self.n


@dataclass
class TrajectoryResult:
    """Per-edge and per-pair component statistics extracted from a trace."""
    trajectories: dict = field(default_factory=dict)   # edge -> MassTrajectory
    cut_counts: dict = field(default_factory=dict)     # edge -> N_i(inf)
    separation_times: dict = field(default_factory=dict)   # (i, j) -> time
    common_cut_counts: dict = field(default_factory=dict)  # (i, j) -> int


class _UnionFind:
    """Array-backed union by size with path halving (used by cut_tree)."""

    __slots__ = ("parent", "size")

    def __init__(self, n_items):
        self.parent = list(range(n_items))
        self.size = [1] * n_items

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra


def component_trajectories(tree: PlaneTree, trace: FragmentationTrace,
                           tracked=(), pairs=()) -> TrajectoryResult:
    """Replay a trace backwards to recover component histories.

    For each tracked edge i: the mass trajectory mu_{n,i} and the total cut
    count N_i (cuts in the component of e_i, up to and including its removal).
    For each pair (i, j): the separation time and the number of cuts the two
    edges received while still in a common component.
    """
    n = tree.n_edges
    tracked = [int(i) for i in tracked]
    pairs = [(int(i), int(j)) for i, j in pairs]
    for i in tracked + [x for p in pairs for x in p]:
        if not (1 <= i <= n):
            raise DomainError(f"edge index {i} out of range")
    for i, j in pairs:
        if i == j:
            raise DomainError("pairs must consist of two distinct edges")
    if np.any(trace.removal_event[1:] < 0):
        raise DomainError("trace is incomplete: some edges were never removed")
    ev_ptr, ev_edges = trace.event_csr()
    tracked_arr = np.asarray(tracked, dtype=np.int64)
    pair_a = np.asarray([p[0] for p in pairs], dtype=np.int64)
    pair_b = np.asarray([p[1] for p in pairs], dtype=np.int64)
    hit, mass_before, sep_event, common = _kernels.replay_component_stats(
        tree.parent, trace.removal_event, trace.marked_vertex,
        trace.neutral, ev_ptr, ev_edges, tracked_arr, pair_a, pair_b)

    result = TrajectoryResult()
    for t, i in enumerate(tracked):
        hits_r = np.nonzero(hit[t])[0]
        result.cut_counts[i] = int(len(hits_r))
        breakpoints = [(0.0, n)]
        for a, b in zip(hits_r, hits_r[1:]):
            breakpoints.append((float(trace.times[a]),
                                int(mass_before[t, b])))
        breakpoints.append((float(trace.removal_time[i]), 0))
        result.trajectories[i] = MassTrajectory(edge=i, n=n,
                                                breakpoints=breakpoints)
    for q, p in enumerate(pairs):
        if sep_event[q] < 0:
            raise AssertionError("a pair never shared a component; trace corrupt")
        result.separation_times[p] = float(trace.times[sep_event[q]])
        result.common_cut_counts[p] = int(common[q])
    return result
