"""Distance-matrix sampling, two-sample tests, and theorem-level experiments.

The experiments compare the rescaled original tree against its cut-tree
through distances at uniformly sampled points (the distance-matrix
characterisation of convergence of metric measure spaces).  The exact checks
validate the combinatorial identities behind the limit theorems on small,
fully enumerable cases.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .cut_tree import CutTree, build_cut_tree, cut_distance, \
    naive_cut_distance_oracle
from .errors import DomainError, GuardError, InputError
from .fragmentation import component_trajectories, run_coupled_discrete, \
    run_vertex_discrete
from .gw_sampler import forest_size_pmf, sample_conditioned
from .offspring import OffspringModel, scaling_sequence
from .seeding import substream
from .trees import PlaneTree, canonical_shape, enumerate_plane_trees, \
    point_decompose


# ---------------------------------------------------------------------------
# distance observables
# ---------------------------------------------------------------------------

@dataclass
class DistanceObservables:
    """A (k+1) x (k+1) matrix of scaled distances at sampled points.

    Row/column 0 is the distinguished point (root of the tree, or point 0 of
    the cut-tree); rows 1..k are i.i.d. uniform sample points.
    """
    source: str           # "tree" | "cut_tree"
    k: int
    matrix: np.ndarray
    scaling: float


def tree_graph_distance(tree: PlaneTree, u: int, v: int,
                        heights: np.ndarray | None = None) -> int:
    """Graph distance between two vertices of a plane tree."""
    if heights is None:
        heights = tree.heights()
    dist = 0
    while heights[u] > heights[v]:
        u = int(tree.parent[u])
        dist += 1
    while heights[v] > heights[u]:
        v = int(tree.parent[v])
        dist += 1
    while u != v:
        u = int(tree.parent[u])
        v = int(tree.parent[v])
        dist += 2
    return dist


def sample_distance_observables(source, k: int, rng: np.random.Generator,
                                scaling: float) -> DistanceObservables:
    """Sample k uniform points and assemble the scaled distance matrix.

    ``source`` is a PlaneTree (points are non-root vertices, distinguished
    point the root) or a CutTree (points are the edge leaves 1..n,
    distinguished point 0).  Sampling is with replacement.
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    is_tree = isinstance(source, PlaneTree)
    n = source.n_edges if is_tree else source.n
    if n < k:
        raise DomainError("source must carry at least k edges")
    idx = [0] + [int(x) for x in rng.integers(1, n + 1, size=k)]
    matrix = np.zeros((k + 1, k + 1))
    heights = source.heights() if is_tree else None
    for a in range(k + 1):
        for b in range(a + 1, k + 1):
            if is_tree:
                d = tree_graph_distance(source, idx[a], idx[b], heights)
            else:
                d = cut_distance(source, idx[a], idx[b])
            matrix[a, b] = matrix[b, a] = d * scaling
    return DistanceObservables(source="tree" if is_tree else "cut_tree",
                               k=k, matrix=matrix, scaling=scaling)


# ---------------------------------------------------------------------------
# two-sample statistics
# ---------------------------------------------------------------------------

def ks_two_sample(xs, ys) -> float:
    """Two-sample Kolmogorov-Smirnov statistic (sup-distance of EDFs)."""
    xs = np.sort(np.asarray(xs, dtype=float))
    ys = np.sort(np.asarray(ys, dtype=float))
    if len(xs) == 0 or len(ys) == 0:
        raise InputError("samples must be nonempty")
    grid = np.concatenate([xs, ys])
    cdf_x = np.searchsorted(xs, grid, side="right") / len(xs)
    cdf_y = np.searchsorted(ys, grid, side="right") / len(ys)
    return float(np.max(np.abs(cdf_x - cdf_y)))


def ks_permutation_pvalue(xs, ys, rng: np.random.Generator,
                          permutations: int = 200) -> float:
    """Permutation p-value for the KS statistic under the null of equal laws."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    observed = ks_two_sample(xs, ys)
    pool = np.concatenate([xs, ys])
    hits = 0
    for _ in range(permutations):
        perm = rng.permutation(len(pool))
        stat = ks_two_sample(pool[perm[:len(xs)]], pool[perm[len(xs):]])
        if stat >= observed - 1e-15:
            hits += 1
    return (1 + hits) / (1 + permutations)


def energy_distance(xs, ys) -> float:
    """Empirical energy distance 2 E|X-Y| - E|X-X'| - E|Y-Y'|.

    Inputs are (m, d) arrays of d-dimensional samples; 1-d inputs are treated
    as d = 1.  Zero iff the empirical laws agree in the large-sample limit.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim == 1:
        xs = xs[:, None]
    if ys.ndim == 1:
        ys = ys[:, None]
    if xs.shape[1] != ys.shape[1]:
        raise InputError("sample dimensions differ")
    exy = cdist(xs, ys).mean()
    exx = cdist(xs, xs).mean()
    eyy = cdist(ys, ys).mean()
    return float(2.0 * exy - exx - eyy)


# ---------------------------------------------------------------------------
# experiment reports
# ---------------------------------------------------------------------------

@dataclass
class ExperimentReport:
    """Serializable record of one experiment: config echo, stats, raw rows."""
    kind: str
    config: dict
    seed: int
    workers: object                # "deterministic" or an int
    versions: dict
    scaling: dict
    results: dict
    runtime_seconds: float | None = None
    raw: list = field(default_factory=list, repr=False)

    def to_json(self) -> str:
        payload = {
            "kind": self.kind,
            "config": self.config,
            "seed": self.seed,
            "workers": self.workers,
            "versions": self.versions,
            "scaling": self.scaling,
            "results": self.results,
            "runtime_seconds": self.runtime_seconds,
        }
        import json
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def raw_csv(self) -> str:
        lines = ["n,replicate,source,observable,value"]
        for n, rep, source, obs, value in self.raw:
            lines.append(f"{n},{rep},{source},{obs},{value!r}")
        return "\n".join(lines) + "\n"


def _versions() -> dict:
    import numpy
    import scipy
    from . import __version__
    return {"cuttree_lab": __version__, "numpy": numpy.__version__,
            "scipy": scipy.__version__}


def _master_seed(rng) -> int:
    """Accept either an int seed or a Generator (a seed is drawn from it)."""
    if isinstance(rng, (int, np.integer)):
        return int(rng)
    return int(rng.integers(0, 2 ** 63))


def _parallel_map(fn, args_list, workers):
    if not isinstance(workers, int) or workers <= 1:
        return [fn(args) for args in args_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args_list))


def _chunk_ranges(replicates, workers):
    n_chunks = 1 if not isinstance(workers, int) or workers <= 1 \
        else min(replicates, workers * 4)
    bounds = np.linspace(0, replicates, n_chunks + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds, bounds[1:]) if b > a]


# ---------------------------------------------------------------------------
# theorem 1: heavy-tail tree vs cut-tree in distribution
# ---------------------------------------------------------------------------

def _theorem1_chunk(args):
    """Observables for a replicate range at one n.  Top-level for pickling."""
    model, n, stage, seed, start, stop = args
    rows = []
    for rep in range(start, stop):
        rng = substream(seed, stage, rep)
        tree = sample_conditioned(model, n, rng)
        xi1, xi2 = (int(x) for x in rng.integers(1, n + 1, size=2))
        heights = tree.heights()
        d1 = int(heights[xi1])
        d2 = int(heights[xi2])
        d12 = tree_graph_distance(tree, xi1, xi2, heights)
        trace = run_vertex_discrete(tree, rng=rng)
        tracked = [xi1] if xi1 == xi2 else [xi1, xi2]
        pairs = [] if xi1 == xi2 else [(xi1, xi2)]
        res = component_trajectories(tree, trace, tracked=tracked, pairs=pairs)
        c1 = res.cut_counts[xi1]
        c2 = res.cut_counts[xi2]
        c12 = 0 if xi1 == xi2 else c1 + c2 - 2 * res.common_cut_counts[(xi1, xi2)]
        rows.append((rep, d1, d2, d12, c1, c2, c12))
    return rows


def _tree_only_chunk(args):
    """Tree-side observables only (for the calibration control)."""
    model, n, stage, seed, start, stop = args
    rows = []
    for rep in range(start, stop):
        rng = substream(seed, stage, rep)
        tree = sample_conditioned(model, n, rng)
        xi1 = int(rng.integers(1, n + 1))
        rows.append((rep, int(tree.heights()[xi1])))
    return rows


def run_theorem1_experiment(model: OffspringModel, ns, replicates: int, k: int,
                            rng, workers="deterministic",
                            keep_raw: bool = False) -> ExperimentReport:
    """Compare rescaled tree distances with cut-tree distances across ns.

    For each n: ``replicates`` conditioned trees, each fragmented in vertex
    mode; reports the KS statistic between {d_n(rho, xi)} and {delta_n(0, xi)}
    (the common a_n/n scaling cancels) and the energy distance between the
    joint 3-vectors of scaled distances.  A calibration control at the
    largest n compares two independent tree-side samples.
    """
    if model.kind != "power_tail":
        raise InputError("theorem-1 experiment requires a heavy-tailed model")
    if replicates < 1:
        raise InputError("replicates must be >= 1")
    if k != 2:
        raise InputError("the joint comparison is implemented for k = 2")
    ns = [int(n) for n in ns]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise InputError("ns must be strictly increasing")
    seed = _master_seed(rng)
    scal = scaling_sequence(model)
    per_n = []
    raw = []
    for stage, n in enumerate(ns):
        args = [(model, n, stage, seed, a, b)
                for a, b in _chunk_ranges(replicates, workers)]
        rows = [row for chunk in _parallel_map(_theorem1_chunk, args, workers)
                for row in chunk]
        rows.sort()
        arr = np.asarray([r[1:] for r in rows], dtype=float)
        d1, d2, d12, c1, c2, c12 = arr.T
        scale = scal.evaluate(n) / n
        ks = ks_two_sample(d1, c1)
        energy = energy_distance(arr[:, :3] * scale, arr[:, 3:] * scale)
        per_n.append({
            "n": n, "replicates": replicates,
            "ks_root_distance": ks,
            "energy_distance_joint": energy,
            "mean_tree_scaled": float(d1.mean() * scale),
            "se_tree_scaled": float(d1.std(ddof=1) * scale / math.sqrt(replicates)),
            "mean_cut_scaled": float(c1.mean() * scale),
            "se_cut_scaled": float(c1.std(ddof=1) * scale / math.sqrt(replicates)),
        })
        if keep_raw:
            for rep, *vals in rows:
                for name, v in zip(("d_root_xi1", "d_root_xi2", "d_xi1_xi2"),
                                   vals[:3]):
                    raw.append((n, rep, "tree", name, v))
                for name, v in zip(("delta_0_xi1", "delta_0_xi2",
                                    "delta_xi1_xi2"), vals[3:]):
                    raw.append((n, rep, "cut_tree", name, v))
    # Calibration: an independent tree-only batch at the largest n, against
    # the tree-side sample already drawn.
    n_big = ns[-1]
    cal_stage = 10_000 + len(ns)
    args = [(model, n_big, cal_stage, seed, a, b)
            for a, b in _chunk_ranges(replicates, workers)]
    cal_rows = [row for chunk in _parallel_map(_tree_only_chunk, args, workers)
                for row in chunk]
    cal_rows.sort()
    cal = np.asarray([r[1] for r in cal_rows], dtype=float)
    cal_p = ks_permutation_pvalue(d1, cal, substream(seed, 77_000),
                                  permutations=400)
    ks_values = [row["ks_root_distance"] for row in per_n]
    results = {
        "per_n": per_n,
        "ks_values": ks_values,
        "ks_non_increasing_slack_0.01": bool(all(
            b <= a + 0.01 for a, b in zip(ks_values, ks_values[1:]))),
        "final_ks": ks_values[-1],
        "calibration_permutation_p": cal_p,
    }
    return ExperimentReport(
        kind="theorem1", seed=seed, workers=workers, versions=_versions(),
        config={"model": model.label, "alpha": model.alpha, "ns": ns,
                "replicates": replicates, "k": k},
        scaling={"kind": scal.kind,
                 "note": "tail-inversion representative of a_n (pinned)"},
        results=results, raw=raw)


# ---------------------------------------------------------------------------
# theorem 2: finite-variance speed factor
# ---------------------------------------------------------------------------

def _theorem2_chunk(args):
    model, n, stage, seed, start, stop = args
    rows = []
    for rep in range(start, stop):
        rng = substream(seed, stage, rep)
        tree = sample_conditioned(model, n, rng)
        xi = int(rng.integers(1, n + 1))
        d = int(tree.heights()[xi])
        vtrace, etrace = run_coupled_discrete(tree, rng)
        dv = component_trajectories(tree, vtrace, tracked=[xi]).cut_counts[xi]
        de = component_trajectories(tree, etrace, tracked=[xi]).cut_counts[xi]
        rows.append((rep, d, dv, de))
    return rows


def run_theorem2_experiment(model: OffspringModel, ns, replicates: int, rng,
                            workers="deterministic",
                            keep_raw: bool = False) -> ExperimentReport:
    """Check the vertex-fragmentation speed factor sigma + 1/sigma.

    Per n, compares the means of (sigma/sqrt(n)) d_n(rho, xi),
    (1/sqrt(n))(sigma + 1/sigma) delta_n^vertex(0, xi), and
    (1/(sigma sqrt(n))) delta_n^edge(0, xi); all three should agree at large
    n (external Brownian reference sqrt(pi/2), reported but not gated).
    """
    if model.variance is None or not math.isfinite(model.variance):
        raise InputError("theorem-2 experiment requires finite variance")
    if replicates < 2:
        raise InputError("replicates must be >= 2")
    ns = [int(n) for n in ns]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise InputError("ns must be strictly increasing")
    sigma = math.sqrt(model.variance)
    seed = _master_seed(rng)
    per_n = []
    raw = []
    for stage, n in enumerate(ns):
        args = [(model, n, stage, seed, a, b)
                for a, b in _chunk_ranges(replicates, workers)]
        rows = [row for chunk in _parallel_map(_theorem2_chunk, args, workers)
                for row in chunk]
        rows.sort()
        arr = np.asarray([r[1:] for r in rows], dtype=float)
        d, dv, de = arr.T
        sq = math.sqrt(n)
        tree_s = d * (sigma / sq)
        vert_s = dv * ((sigma + 1.0 / sigma) / sq)
        edge_s = de * (1.0 / (sigma * sq))
        entry = {"n": n, "replicates": replicates}
        for name, sample in (("tree", tree_s), ("vertex_cut", vert_s),
                             ("edge_cut", edge_s)):
            entry[f"mean_{name}"] = float(sample.mean())
            entry[f"se_{name}"] = float(sample.std(ddof=1)
                                        / math.sqrt(replicates))
        entry["mean_ratio_vertex_over_tree"] = \
            entry["mean_vertex_cut"] / entry["mean_tree"]
        entry["mean_ratio_edge_over_tree"] = \
            entry["mean_edge_cut"] / entry["mean_tree"]
        entry["ks_tree_vs_vertex"] = ks_two_sample(tree_s, vert_s)
        per_n.append(entry)
        if keep_raw:
            for rep, dd, dvv, dee in rows:
                raw.append((n, rep, "tree", "d_root_xi", dd))
                raw.append((n, rep, "cut_tree", "delta_vertex_0_xi", dvv))
                raw.append((n, rep, "cut_tree", "delta_edge_0_xi", dee))
    results = {"per_n": per_n,
               "brownian_reference_mean": math.sqrt(math.pi / 2.0),
               "sigma": sigma}
    return ExperimentReport(
        kind="theorem2", seed=seed, workers=workers, versions=_versions(),
        config={"model": model.label, "ns": ns, "replicates": replicates},
        scaling={"kind": "finite_variance", "sigma": sigma},
        results=results, raw=raw)


# ---------------------------------------------------------------------------
# exact checks
# ---------------------------------------------------------------------------

_EMN_MAX_M = 8
_GWSTAR_MAX_VERTICES = 8
_CYCLIC_MAX_N = 64


def check_emn_formula(model: OffspringModel, m: int, n: int, t_values,
                      a_n: float):
    """Exact two-sided evaluation of the expected-exponential edge functional.

    lhs: direct enumeration over all m-edge trees of
    (1/m) E[ sum_e exp(-t/a_n * sum of degrees along the root-to-e^- path) ]
    under the size-conditioned law.  rhs: the closed form through size-biased
    spine sums S_hat_h and forest sizes.  Returns [(t, lhs, rhs, |diff|)].
    """
    if m > _EMN_MAX_M:
        raise GuardError(f"enumeration limited to m <= {_EMN_MAX_M}")
    if m < 1 or m > n:
        raise DomainError("need 1 <= m <= n")
    trees = enumerate_plane_trees(model, m)
    total = sum(w for _, w in trees)
    # per-tree path degree sums: A[v] = sum of degrees on [root, v]
    path_sums = []
    for tree, w in trees:
        a = np.zeros(tree.n_vertices)
        a[0] = tree.degree[0]
        for v in range(1, tree.n_vertices):
            a[v] = a[tree.parent[v]] + tree.degree[v]
        path_sums.append((a[tree.parent[1:]], w))
    # size-biased convolutions: sb_conv[h][k] = P(S_hat_h = k), k <= m
    sb = np.zeros(m + 1)
    for r in range(1, m + 1):
        sb[r] = r * float(model.pmf(r))
    sb_conv = [np.zeros(m + 1) for _ in range(m + 1)]
    sb_conv[0][0] = 1.0
    for h in range(1, m + 1):
        sb_conv[h] = np.convolve(sb_conv[h - 1], sb)[:m + 1]
    p_m_edges = forest_size_pmf(model, 1, m + 1)  # P(|E| = m)
    out = []
    for t in t_values:
        lhs = 0.0
        for sums, w in path_sums:
            lhs += (w / total) * float(np.exp(-sums * t / a_n).sum())
        lhs /= m
        rhs = 0.0
        for h in range(1, m + 1):
            for k in range(h, m + 1):
                rhs += math.exp(-k * t / a_n) * sb_conv[h][k] \
                    * forest_size_pmf(model, k - h + 1, m - h + 1)
        rhs /= m * p_m_edges
        out.append((float(t), lhs, rhs, abs(lhs - rhs)))
    return out


@dataclass
class GWStarCheck:
    """Result of the pointed-decomposition law comparison."""
    tv_distance: float
    product_form_error: float
    marginal_error: float
    total_mass: float


def check_gwstar_transform(model: OffspringModel,
                           max_vertices: int) -> GWStarCheck:
    """Enumerate pointed trees (T, v), v != root, under the weight P(T).

    Verifies that (T_hat^v_hat, T_v) and (T^v, T_v) have the same joint law
    as rooted trees (canonical unordered form: the planar slot into which the
    fresh leaf is appended is a convention and carries no mass), that the
    plane joint law of (T^v, T_v) factorises as (number of leaves of A) *
    P(A) * P(B) / nu(0) for A = T^v, B = T_v, and (inside the product form)
    that the T_v marginal is the unconditioned GW law.
    """
    if max_vertices > _GWSTAR_MAX_VERTICES:
        raise GuardError(
            f"pointed enumeration limited to {_GWSTAR_MAX_VERTICES} vertices")
    if max_vertices < 2:
        raise DomainError("need at least 2 vertices to point a non-root vertex")
    law_hat = {}
    law_up_shape = {}
    law_up = {}
    total = 0.0
    for edges in range(1, max_vertices):
        for tree, w in enumerate_plane_trees(model, edges):
            for v in range(1, tree.n_vertices):
                t_v, t_up, t_hat = point_decompose(tree, v)
                shape_v = canonical_shape(t_v)
                key_hat = (canonical_shape(t_hat), shape_v)
                key_shape = (canonical_shape(t_up), shape_v)
                key_up = (t_up.degree_tuple(), t_v.degree_tuple())
                law_hat[key_hat] = law_hat.get(key_hat, 0.0) + w
                law_up_shape[key_shape] = law_up_shape.get(key_shape, 0.0) + w
                law_up[key_up] = law_up.get(key_up, 0.0) + w
                total += w
    tv = 0.5 * sum(abs(law_hat.get(k, 0.0) - law_up_shape.get(k, 0.0))
                   for k in set(law_hat) | set(law_up_shape)) / total
    nu0 = float(model.pmf(0))
    prod_err = 0.0
    for (deg_a, deg_b), weight in law_up.items():
        p_a = math.prod(float(model.pmf(d)) for d in deg_a)
        p_b = math.prod(float(model.pmf(d)) for d in deg_b)
        leaves_a = sum(1 for d in deg_a if d == 0)
        prod_err = max(prod_err, abs(weight - leaves_a * p_a * p_b / nu0))
    # marginal of T_v over pairs with a fixed small A-part must be
    # proportional to the GW weight of B; equivalent to prod_err == 0, but
    # checked directly on the single-edge A slice for redundancy.
    marg_err = 0.0
    single = tuple([1, 0])  # the one-edge tree as an A-part
    for (deg_a, deg_b), weight in law_up.items():
        if deg_a != single:
            continue
        p_b = math.prod(float(model.pmf(d)) for d in deg_b)
        expected = float(model.pmf(1)) * p_b
        marg_err = max(marg_err, abs(weight - expected))
    return GWStarCheck(tv_distance=tv, product_form_error=prod_err,
                       marginal_error=marg_err, total_mass=total)


def check_cyclic_lemma(model: OffspringModel, k_max: int, n_max: int) -> float:
    """Max discrepancy between the cycle-lemma forest pmf and a direct DP.

    The DP computes the GW total-size law p(n) recursively (a size-n tree is
    a root with d subtrees of total size n-1) and k-fold convolutions of it,
    with no reference to the random-walk representation.
    """
    if n_max > _CYCLIC_MAX_N:
        raise GuardError(f"convolution guard: n_max <= {_CYCLIC_MAX_N}")
    if k_max < 1 or n_max < 1:
        raise DomainError("k_max and n_max must be >= 1")
    forest = {}   # (k, n) -> P(Y_k = n), via the DP
    size = {}     # n -> P(|T| = n)

    def forest_dp(k, n):
        if k == 0:
            return 1.0 if n == 0 else 0.0
        if n < k:
            return 0.0
        if (k, n) not in forest:
            forest[(k, n)] = sum(size_dp(n1) * forest_dp(k - 1, n - n1)
                                 for n1 in range(1, n - k + 2))
        return forest[(k, n)]

    def size_dp(n):
        if n < 1:
            return 0.0
        if n not in size:
            size[n] = sum(float(model.pmf(d)) * forest_dp(d, n - 1)
                          for d in range(0, n))
        return size[n]

    worst = 0.0
    for k in range(1, k_max + 1):
        for n in range(1, n_max + 1):
            worst = max(worst, abs(forest_dp(k, n) - forest_size_pmf(model, k, n)))
    return worst


# ---------------------------------------------------------------------------
# coupling and oracle checks
# ---------------------------------------------------------------------------

@dataclass
class CouplingCheck:
    runs: int
    failures: int
    explicit_runs: int
    explicit_failures: int


def check_coupling(model: OffspringModel, runs: int, n_max: int,
                   rng: np.random.Generator,
                   explicit_runs: int = 50) -> CouplingCheck:
    """Verify the vertex/edge coupling inclusion on shared permutations.

    At every step of the coupled run, the vertex-mode component of each
    surviving edge must be contained in its edge-mode component.  This is
    equivalent to every edge dying in vertex mode no later than in edge mode
    (the deleted sets are nested), which is checked on all runs; a subsample
    additionally compares explicit component sets step by step.
    """
    failures = 0
    explicit_failures = 0
    explicit_done = 0
    for run in range(runs):
        n = int(rng.integers(2, n_max + 1))
        tree = sample_conditioned(model, n, rng)
        vtrace, etrace = run_coupled_discrete(tree, rng)
        if np.any(vtrace.removal_event[1:] > etrace.removal_event[1:]):
            failures += 1
            continue
        if explicit_done < explicit_runs and n <= 40:
            explicit_done += 1
            if not _explicit_inclusion(tree, vtrace, etrace):
                explicit_failures += 1
    return CouplingCheck(runs=runs, failures=failures,
                         explicit_runs=explicit_done,
                         explicit_failures=explicit_failures)


def _components(tree, alive):
    """Components of the surviving-edge forest, as frozensets of edges."""
    comp = {}
    for e in range(1, tree.n_edges + 1):
        if alive[e]:
            comp[e] = {e}
    # union along surviving parent-edge adjacencies
    parent_of = {}

    def find(e):
        while e in parent_of:
            e = parent_of[e]
        return e

    for e in list(comp):
        pe = int(tree.parent[e])
        if pe != 0 and alive[pe]:
            ra, rb = find(e), find(pe)
            if ra != rb:
                parent_of[ra] = rb
        for sib in tree.children[int(tree.parent[e])]:
            if sib != e and alive[sib]:
                ra, rb = find(e), find(sib)
                if ra != rb:
                    parent_of[ra] = rb
    groups = {}
    for e in comp:
        groups.setdefault(find(e), set()).add(e)
    return {e: frozenset(groups[find(e)]) for e in comp}


def _explicit_inclusion(tree, vtrace, etrace) -> bool:
    n = tree.n_edges
    for step in range(n + 1):
        alive_v = np.concatenate(
            [[False], vtrace.removal_event[1:] >= step])
        alive_e = np.concatenate(
            [[False], etrace.removal_event[1:] >= step])
        comps_v = _components(tree, alive_v)
        comps_e = _components(tree, alive_e)
        for e, block in comps_v.items():
            if not block <= comps_e.get(e, frozenset()):
                return False
    return True


@dataclass
class OracleCheck:
    trees: int
    pairs: int
    mismatches: int


def check_cut_distance_oracle(model: OffspringModel, n_trees: int, n_max: int,
                              pairs_per_tree: int,
                              rng: np.random.Generator) -> OracleCheck:
    """Fast cut-tree distances vs the explicit forward-replay oracle."""
    mismatches = 0
    pairs_done = 0
    for _ in range(n_trees):
        n = int(rng.integers(1, n_max + 1))
        tree = sample_conditioned(model, n, rng)
        trace = run_vertex_discrete(tree, rng=rng)
        ct = build_cut_tree(tree, trace)
        for _ in range(pairs_per_tree):
            i = int(rng.integers(0, n + 1))
            j = int(rng.integers(0, n + 1))
            pairs_done += 1
            if cut_distance(ct, i, j) != naive_cut_distance_oracle(
                    tree, trace, i, j):
                mismatches += 1
    return OracleCheck(trees=n_trees, pairs=pairs_done, mismatches=mismatches)
