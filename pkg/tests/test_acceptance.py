"""End-to-end acceptance suite.

One test per criterion; each prints a single PASS/FAIL line (run pytest with
-s to see them for passing tests).  The statistical criteria use the fixed
neutral master seed 0 and the exact scales and tolerances they are stated at,
so the full suite takes tens of minutes; the heavy experiments are criteria
2, 6, 7, 8, and 10.
"""
import math
import time

import numpy as np
import pytest
from scipy.integrate import quad

from cuttree_lab.moddist import moddist_identity_stats, tail_mass_profile
from cuttree_lab.offspring import (
    make_geometric_critical,
    make_power_tail_critical,
    scaling_sequence,
)
from cuttree_lab.gw_sampler import sample_conditioned
from cuttree_lab.seeding import substream
from cuttree_lab.stats import (
    check_coupling,
    check_cut_distance_oracle,
    check_cyclic_lemma,
    check_emn_formula,
    check_gwstar_transform,
    run_theorem1_experiment,
    run_theorem2_experiment,
)
from cuttree_lab.trees import encode_codings, symmetric_index, symmetrize

SEED = 0
GEOM = make_geometric_critical()
POWER = make_power_tail_critical(1.5)


def _report(num, ok, detail):
    print(f"CRITERION {num}: {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, detail


def test_criterion_01_oracle_equivalence():
    started = time.monotonic()
    res_g = check_cut_distance_oracle(GEOM, n_trees=500, n_max=64,
                                      pairs_per_tree=4,
                                      rng=substream(SEED, 1, 0))
    res_p = check_cut_distance_oracle(POWER, n_trees=500, n_max=64,
                                      pairs_per_tree=4,
                                      rng=substream(SEED, 1, 1))
    elapsed = time.monotonic() - started
    mismatches = res_g.mismatches + res_p.mismatches
    ok = mismatches == 0 and elapsed < 60
    _report(1, ok, f"{res_g.pairs + res_p.pairs} pairs on 1000 trees, "
            f"{mismatches} mismatches, {elapsed:.1f}s")


def test_criterion_02_martingale_identity():
    started = time.monotonic()
    # single-edge closed form: delta = 1 and delta' = T ~ Exp(mean a_n), so
    # L = E(a_n - T)^2 = Var(T) = a_n^2 and R = a_n E[T] = a_n^2, checked by
    # quadrature against the exponential density (independent of the code)
    a = 3.7
    dens = lambda t: math.exp(-t / a) / a
    l_exact = quad(lambda t: (a - t) ** 2 * dens(t), 0, np.inf)[0]
    r_exact = quad(lambda t: a * t * dens(t), 0, np.inf)[0]
    closed = abs(l_exact - a * a) < 1e-8 and abs(r_exact - a * a) < 1e-8
    one = moddist_identity_stats(GEOM, 1, a, replicates=4000,
                                 rng=substream(SEED, 2, 0))
    closed = closed and abs(one.lhs - a * a) <= 4 * one.se_lhs \
        and abs(one.rhs - a * a) <= 4 * one.se_rhs
    n = 200
    a_n = scaling_sequence(GEOM)(n)
    stats = moddist_identity_stats(GEOM, n, a_n, replicates=10 ** 5,
                                   rng=substream(SEED, 2, 1))
    gap = abs(stats.lhs - stats.rhs)
    elapsed = time.monotonic() - started
    ok = closed and gap <= 3 * stats.se_diff and elapsed < 300
    _report(2, ok, f"single-edge closed form ok={closed}; n=200: "
            f"L={stats.lhs:.4f} R={stats.rhs:.4f} "
            f"|L-R|={gap:.4f} <= 3se={3 * stats.se_diff:.4f}, {elapsed:.0f}s")


def test_criterion_03_emn_formula():
    worst = 0.0
    for m in range(1, 7):
        for _, _, _, diff in check_emn_formula(GEOM, m, m, [0.5, 1.0, 2.0],
                                               a_n=1.0):
            worst = max(worst, diff)
    ok = worst < 1e-10
    _report(3, ok, f"m in 1..6, t in {{0.5,1,2}}: max |lhs-rhs| = {worst:.2e}")


def test_criterion_04_cyclic_lemma():
    worst = max(check_cyclic_lemma(GEOM, 5, 30),
                check_cyclic_lemma(POWER, 5, 30))
    ok = worst < 1e-12
    _report(4, ok, f"k<=5, n<=30, both models: max discrepancy = {worst:.2e}")


def test_criterion_05_gwstar_transform():
    res = check_gwstar_transform(GEOM, 6)
    ok = res.tv_distance < 1e-12 and res.product_form_error < 1e-12
    _report(5, ok, f"pointed enumeration to 6 vertices: TV = "
            f"{res.tv_distance:.2e}, product-form error = "
            f"{res.product_form_error:.2e}")


def test_criterion_06_coupling_inclusion():
    started = time.monotonic()
    res = check_coupling(GEOM, runs=10 ** 4, n_max=256,
                         rng=substream(SEED, 6, 0), explicit_runs=50)
    elapsed = time.monotonic() - started
    ok = res.failures == 0 and res.explicit_failures == 0 and elapsed < 60
    _report(6, ok, f"{res.runs} coupled runs (n <= 256), "
            f"{res.failures} nesting failures, {res.explicit_failures}/"
            f"{res.explicit_runs} explicit failures, {elapsed:.1f}s")


def test_criterion_07_theorem1_trend():
    started = time.monotonic()
    report = run_theorem1_experiment(POWER, [500, 2000, 8000], 2000, 2,
                                     rng=SEED)
    elapsed = time.monotonic() - started
    ks = report.results["ks_values"]
    trend = report.results["ks_non_increasing_slack_0.01"]
    final = report.results["final_ks"]
    cal_p = report.results["calibration_permutation_p"]
    ok = trend and final < 0.05 and cal_p > 0.01
    _report(7, ok, f"KS over ns(500,2000,8000) = "
            f"{[round(v, 4) for v in ks]}, trend ok={trend}, "
            f"final={final:.4f} (<0.05), calibration p={cal_p:.3f} (>0.01), "
            f"{elapsed:.0f}s")


def test_criterion_08_theorem2_factor():
    started = time.monotonic()
    report = run_theorem2_experiment(GEOM, [4000], 10 ** 4, rng=SEED)
    elapsed = time.monotonic() - started
    entry = report.results["per_n"][0]
    rv = entry["mean_ratio_vertex_over_tree"]
    re_ = entry["mean_ratio_edge_over_tree"]
    ref = report.results["brownian_reference_mean"]
    ok = abs(rv - 1.0) <= 0.05 and abs(re_ - 1.0) <= 0.05
    _report(8, ok, f"n=4000, 1e4 reps: vertex/tree mean ratio = {rv:.4f}, "
            f"edge/tree mean ratio = {re_:.4f} (gates 1±0.05); "
            f"means tree={entry['mean_tree']:.4f} "
            f"vertex={entry['mean_vertex_cut']:.4f} "
            f"edge={entry['mean_edge_cut']:.4f}; Brownian reference "
            f"{ref:.4f} reported, not gated; {elapsed:.0f}s")


def test_criterion_09_symmetrization_identity():
    mismatches = 0
    checked = 0
    for stage, model in ((0, GEOM), (1, POWER)):
        rng = substream(SEED, 9, stage)
        for _ in range(1000):
            n = int(rng.integers(1, 65))
            tree = sample_conditioned(model, n, rng)
            _, index_map = symmetrize(tree)
            codings = encode_codings(tree)
            checked += tree.n_vertices
            for j in range(tree.n_vertices):
                if symmetric_index(tree, j, codings) != index_map[j]:
                    mismatches += 1
    ok = mismatches == 0
    _report(9, ok, f"1000 trees per model, {checked} vertices, "
            f"{mismatches} mismatches")


def test_criterion_10_tail_mass_profile():
    started = time.monotonic()
    scal = scaling_sequence(POWER)
    details = []
    ok = True
    for stage, n in enumerate((100, 1000, 5000)):
        means, ses = tail_mass_profile(POWER, n, scal(n), levels=range(7),
                                       replicates=300,
                                       rng=substream(SEED, 10, stage))
        monotone = all(b <= a + 2 * (sa + sb)
                       for a, b, sa, sb in zip(means, means[1:], ses, ses[1:]))
        small = means[6] < 0.02
        ok = ok and monotone and small
        details.append(f"n={n}: l6={means[6]:.4f} monotone={monotone}")
    elapsed = time.monotonic() - started
    _report(10, ok, "; ".join(details) + f"; {elapsed:.0f}s")


def test_criterion_11_deterministic_reports():
    a = run_theorem2_experiment(GEOM, [100], 200, rng=SEED,
                                workers="deterministic", keep_raw=True)
    b = run_theorem2_experiment(GEOM, [100], 200, rng=SEED,
                                workers="deterministic", keep_raw=True)
    ok = a.to_json().encode() == b.to_json().encode() \
        and a.raw_csv().encode() == b.raw_csv().encode()
    _report(11, ok, "duplicated fixed-seed experiment: report JSON and raw "
            "CSV byte-identical")
