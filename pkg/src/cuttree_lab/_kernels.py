"""Compiled inner loops for tree decoding, fragmentation, and replay.

These kernels carry the per-event work of the simulation pipeline; the
surrounding modules keep the array bookkeeping and all validation.  Each
kernel has a slow pure-Python counterpart in the test suite (or an
independent oracle) that it is checked against.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def parents_from_degrees(degrees):
    """DFS parent array from a valid degree sequence (no validation)."""
    n = degrees.shape[0] - 1
    parent = np.empty(n + 1, np.int64)
    parent[0] = -1
    stack = np.empty(n + 1, np.int64)
    remaining = np.empty(n + 1, np.int64)
    stack[0] = 0
    remaining[0] = degrees[0]
    top = 0
    for v in range(1, n + 1):
        while remaining[top] == 0:
            top -= 1
        parent[v] = stack[top]
        remaining[top] -= 1
        top += 1
        stack[top] = v
        remaining[top] = degrees[v]
    return parent


@njit(cache=True)
def first_accepted_row(u, cdf, n, table_short):
    """First row of uniforms whose inverse-CDF offspring values sum to n.

    Values are read off ``cdf`` (head of the CDF table, side='right' search);
    a running total above n rejects the row early.  Returns (row, status):
    status 0 with row >= 0 on acceptance, 0 with row -1 when no row sums to
    n, and 1 when row ``row`` drew a uniform past a short table (the caller
    must finish that batch with exact tail continuation).
    """
    rows, cols = u.shape
    k = cdf.shape[0]
    top = cdf[k - 1]
    for i in range(rows):
        total = 0
        ok = True
        for j in range(cols):
            v = u[i, j]
            if table_short and v >= top:
                return i, 1
            lo, hi = 0, k
            while lo < hi:
                mid = (lo + hi) // 2
                if cdf[mid] > v:
                    hi = mid
                else:
                    lo = mid + 1
            total += lo
            if total > n:
                ok = False
                break
        if ok and total == n:
            return i, 0
    return -1, 0


@njit(cache=True)
def vertex_removal_events(parent, child_ptr, child_idx, order):
    """Vertex-mode fragmentation: removal event per edge and neutral flags.

    ``order`` is the mark order (edges 1..n); event r deletes all surviving
    edges below the upper endpoint of the marked edge, if it is still alive.
    """
    n = order.shape[0]
    alive = np.ones(n + 1, np.bool_)
    alive[0] = False
    removal_event = np.full(n + 1, -1, np.int64)
    neutral = np.zeros(n, np.bool_)
    for r in range(n):
        e = order[r]
        if not alive[e]:
            neutral[r] = True
            continue
        v = parent[e]
        for k in range(child_ptr[v], child_ptr[v + 1]):
            c = child_idx[k]
            if alive[c]:
                alive[c] = False
                removal_event[c] = r
    return removal_event, neutral


@njit(cache=True)
def _find(uf_parent, x):
    while uf_parent[x] != x:
        uf_parent[x] = uf_parent[uf_parent[x]]
        x = uf_parent[x]
    return x


@njit(cache=True)
def replay_component_stats(parent, removal_event, marked_vertex, neutral,
                           ev_ptr, ev_edges, tracked, pair_a, pair_b):
    """Reverse union-find sweep over a completed trace.

    Returns, for each tracked edge, the per-event hit flags and component
    sizes just before each event (-1 when the edge is already removed), and
    for each pair the separation event and the number of cuts received while
    sharing a component.
    """
    n = parent.shape[0] - 1
    n_events = neutral.shape[0]
    m = tracked.shape[0]
    n_pairs = pair_a.shape[0]
    uf_parent = np.arange(n + 1)
    uf_size = np.ones(n + 1, np.int64)
    hit = np.zeros((m, n_events), np.bool_)
    mass_before = np.full((m, n_events), -1, np.int64)
    sep_event = np.full(n_pairs, -1, np.int64)
    common = np.zeros(n_pairs, np.int64)
    connected = np.zeros(n_pairs, np.bool_)
    for r in range(n_events - 1, -1, -1):
        for k in range(ev_ptr[r], ev_ptr[r + 1]):
            j = ev_edges[k]
            ra = _find(uf_parent, j)
            rb = _find(uf_parent, parent[j])
            if ra != rb:
                if uf_size[ra] < uf_size[rb]:
                    ra, rb = rb, ra
                uf_parent[rb] = ra
                uf_size[ra] += uf_size[rb]
        if neutral[r]:
            continue
        rv = _find(uf_parent, marked_vertex[r])
        for t in range(m):
            i = tracked[t]
            if removal_event[i] >= r:
                ri = _find(uf_parent, i)
                mass_before[t, r] = uf_size[ri] - 1
                if ri == rv:
                    hit[t, r] = True
        for q in range(n_pairs):
            i = pair_a[q]
            j = pair_b[q]
            if not connected[q]:
                if removal_event[i] >= r and removal_event[j] >= r and \
                        _find(uf_parent, i) == _find(uf_parent, j):
                    connected[q] = True
                    sep_event[q] = r
            else:
                if _find(uf_parent, i) == rv:
                    common[q] += 1
    return hit, mass_before, sep_event, common
