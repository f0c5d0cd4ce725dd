"""Modified cut-tree distances built from component mass trajectories.

For a continuous-clock vertex fragmentation of an n-edge tree with a marked
edge e_i, let mu_{n,i}(t) be the fraction of edges in the component of e_i at
time t (zero after its removal).  The modified distances are

    delta'_n(0, i) = integral of mu_{n,i} over [0, inf)
    delta'_n(i, j) = integral of mu_{n,i} + mu_{n,j} over [t_n(i,j), inf)

with t_n(i,j) the time at which the components of e_i and e_j separate.
The rescaled cut count (a_n/n) * delta_n(0, i) and delta'_n(0, i) form a
martingale pair: the mean squared gap equals (a_n/n) E[delta'_n(0, i)]
exactly, which is the identity estimated here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .fragmentation import TrajectoryResult, component_trajectories, \
    run_vertex_continuous
from .gw_sampler import sample_conditioned
from .offspring import OffspringModel


def delta_prime(result: TrajectoryResult, i: int, j: int = 0) -> float:
    """Modified distance between points i and j (0 means the root).

    ``result`` must track edge i (and j, with the pair (i, j) or (j, i),
    when j != 0).
    """
    if i == 0 and j == 0:
        return 0.0
    if i == 0:
        i, j = j, 0
    if j == 0:
        return result.trajectories[i].integral(0.0)
    if i == j:
        return 0.0
    key = (i, j) if (i, j) in result.separation_times else (j, i)
    if key not in result.separation_times:
        raise DomainError(f"pair ({i}, {j}) was not tracked")
    t_sep = result.separation_times[key]
    return (result.trajectories[i].integral(t_sep)
            + result.trajectories[j].integral(t_sep))


@dataclass
class IdentityStats:
    """Monte Carlo estimate of the squared-gap identity.

    lhs    mean of ((a_n/n) delta_n(0, xi) - delta'_n(0, xi))^2
    rhs    mean of (a_n/n) delta'_n(0, xi)
    se_diff  standard error of the paired per-replicate differences
    """
    n: int
    a_n: float
    replicates: int
    lhs: float
    rhs: float
    se_lhs: float
    se_rhs: float
    se_diff: float


def moddist_identity_stats(model: OffspringModel, n: int, a_n: float,
                           replicates: int,
                           rng: np.random.Generator) -> IdentityStats:
    """Estimate both sides of the identity on size-n trees.

    Each replicate samples a conditioned tree, a uniform edge xi, runs a
    continuous-clock vertex fragmentation, and evaluates the rescaled cut
    count against the mass integral.  The two sides are compared through the
    paired differences, which is what the martingale equality controls.
    """
    if replicates < 2:
        raise DomainError("need at least 2 replicates")
    scale = a_n / n
    lhs = np.empty(replicates)
    rhs = np.empty(replicates)
    for rep in range(replicates):
        tree = sample_conditioned(model, n, rng)
        xi = int(rng.integers(1, n + 1))
        trace = run_vertex_continuous(tree, a_n, rng)
        result = component_trajectories(tree, trace, tracked=[xi])
        d_cut = result.cut_counts[xi]
        d_prime = result.trajectories[xi].integral(0.0)
        lhs[rep] = (scale * d_cut - d_prime) ** 2
        rhs[rep] = scale * d_prime
    diff = lhs - rhs
    return IdentityStats(
        n=n, a_n=a_n, replicates=replicates,
        lhs=float(lhs.mean()), rhs=float(rhs.mean()),
        se_lhs=float(lhs.std(ddof=1) / np.sqrt(replicates)),
        se_rhs=float(rhs.std(ddof=1) / np.sqrt(replicates)),
        se_diff=float(diff.std(ddof=1) / np.sqrt(replicates)))


def tail_mass_profile(model: OffspringModel, n: int, a_n: float, levels,
                      replicates: int, rng: np.random.Generator):
    """Estimate E[ integral of mu_{n,xi} over [2^l, inf) ] for each level l.

    All levels share the same replicates, so the profile is monotone by
    construction replicate-by-replicate.  Returns (means, standard errors)
    as arrays aligned with ``levels``.
    """
    levels = [int(l) for l in levels]
    vals = np.empty((replicates, len(levels)))
    for rep in range(replicates):
        tree = sample_conditioned(model, n, rng)
        xi = int(rng.integers(1, n + 1))
        trace = run_vertex_continuous(tree, a_n, rng)
        result = component_trajectories(tree, trace, tracked=[xi])
        traj = result.trajectories[xi]
        for c, l in enumerate(levels):
            vals[rep, c] = traj.integral(float(2 ** l))
    means = vals.mean(axis=0)
    ses = vals.std(axis=0, ddof=1) / np.sqrt(replicates)
    return means, ses


def tail_mass_integral(model: OffspringModel, n: int, a_n: float, l: int,
                       replicates: int, rng: np.random.Generator):
    """Estimate E[ integral of mu_{n,xi} over [2^l, inf) ]; returns (mean, se)."""
    means, ses = tail_mass_profile(model, n, a_n, [l], replicates, rng)
    return float(means[0]), float(ses[0])
