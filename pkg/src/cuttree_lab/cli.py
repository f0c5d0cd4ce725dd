"""Command-line interface: sampling, experiments, and the verification suite.

Exit codes: 0 success, 1 verification failure, 2 usage/config error.
Every output file embeds a manifest (command line, config, seed, version).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CutTreeLabError, GuardError, InputError
from .fragmentation import run_vertex_discrete
from .cut_tree import build_cut_tree, cut_distance
from .gw_sampler import sample_conditioned
from .moddist import moddist_identity_stats, tail_mass_profile
from .offspring import model_from_config, scaling_sequence
from .seeding import substream
from .stats import ExperimentReport, _chunk_ranges, _parallel_map, _versions, \
    run_theorem1_experiment, run_theorem2_experiment
from .trees import PlaneTree


def _parse_workers(value: str):
    if value == "deterministic":
        return "deterministic"
    try:
        count = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"workers must be 'deterministic' or a positive integer, got {value!r}")
    if count < 1:
        raise argparse.ArgumentTypeError("worker count must be >= 1")
    return count


def _effective_workers(workers):
    """Apply the CUTTREE_WORKERS override (ignored in deterministic mode)."""
    if workers == "deterministic":
        return workers
    env = os.environ.get("CUTTREE_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"CUTTREE_WORKERS must be an integer, got {env!r}")
    return workers


def _model_config(args) -> dict:
    config = {"model": args.model}
    if args.model == "power_tail":
        if args.alpha is None:
            raise InputError("power_tail model requires --alpha")
        config["alpha"] = args.alpha
    if getattr(args, "pmf", None):
        config["model"] = "custom"
        config["pmf"] = json.loads(args.pmf)
    return config


def _run_dir(args, seed: int) -> Path:
    if args.out:
        path = Path(args.out)
    else:
        stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S")
        path = Path("runs") / f"{stamp}-seed{seed}"
    path.mkdir(parents=True, exist_ok=True)
    return path


def _manifest(args, config: dict, seed: int) -> str:
    # Output paths are deliberately omitted so that two runs with the same
    # seed produce byte-identical files wherever they are written.
    payload = {"command": args.command, "config": config, "seed": seed,
               "version": __version__}
    return "# manifest: " + json.dumps(payload, sort_keys=True)


def _sample_chunk(chunk_args):
    """Sample a range of trees; top-level so worker pools can pickle it."""
    config, n, seed, start, stop = chunk_args
    model = model_from_config(config)
    out = []
    for i in range(start, stop):
        rng = substream(seed, 0, i)
        out.append(sample_conditioned(model, n, rng).to_lukasiewicz_line())
    return out


def cmd_sample(args) -> int:
    config = _model_config(args)
    model = model_from_config(config)
    if args.n < 1:
        raise InputError("--n must be >= 1")
    if args.count < 1:
        raise InputError("--count must be >= 1")
    workers = _effective_workers(args.workers)
    run_dir = _run_dir(args, args.seed)
    chunk_args = [(config, args.n, args.seed, a, b)
                  for a, b in _chunk_ranges(args.count, workers)]
    lines = [line for chunk in _parallel_map(_sample_chunk, chunk_args, workers)
             for line in chunk]
    manifest = _manifest(args, {**config, "n": args.n, "count": args.count},
                         args.seed)
    tree_path = run_dir / "trees.txt"
    tree_path.write_text("\n".join([manifest] + lines) + "\n")
    if args.with_trace or args.with_distances:
        trace_lines = ["event_index,time,marked_vertex,deleted_edges,neutral"]
        dist_lines = ["tree_index,i,j,delta"]
        for idx, line in enumerate(lines):
            tree = PlaneTree.from_lukasiewicz_line(line)
            rng = substream(args.seed, 1, idx)
            trace = run_vertex_discrete(tree, rng=rng)
            for ev in trace.events():
                deleted = ";".join(str(e) for e in ev.deleted)
                trace_lines.append(f"{ev.index},{ev.time!r},{ev.marked_vertex},"
                                   f"{deleted},{int(ev.neutral)}")
            if args.with_distances:
                ct = build_cut_tree(tree, trace)
                for i in range(tree.n_edges + 1):
                    dist_lines.append(f"{idx},0,{i},{cut_distance(ct, 0, i)}")
        if args.with_trace:
            (run_dir / "traces.csv").write_text(
                "\n".join([manifest] + trace_lines) + "\n")
        if args.with_distances:
            (run_dir / "distances.csv").write_text(
                "\n".join([manifest] + dist_lines) + "\n")
    print(f"wrote {len(lines)} trees to {tree_path}")
    return 0


def _moddist_report(model, config, ns, replicates, seed, workers) -> ExperimentReport:
    scal = scaling_sequence(model)
    per_n = []
    for stage, n in enumerate(ns):
        a_n = scal.evaluate(n)
        stats = moddist_identity_stats(model, n, a_n, replicates,
                                       substream(seed, stage))
        per_n.append({
            "n": n, "a_n": a_n, "replicates": replicates,
            "lhs_mean_sq_gap": stats.lhs, "rhs_scaled_mean": stats.rhs,
            "se_lhs": stats.se_lhs, "se_rhs": stats.se_rhs,
            "se_diff": stats.se_diff,
            "abs_gap_over_se": abs(stats.lhs - stats.rhs)
            / stats.se_diff if stats.se_diff else 0.0,
        })
    return ExperimentReport(
        kind="moddist", seed=seed, workers=workers, versions=_versions(),
        config=config,
        scaling={"kind": scal.kind,
                 "note": "tail-inversion representative of a_n (pinned)"
                 if scal.kind == "tail_inversion" else ""},
        results={"per_n": per_n})


def _tails_report(model, config, ns, replicates, seed, workers) -> ExperimentReport:
    scal = scaling_sequence(model)
    levels = list(range(0, 7))
    per_n = []
    for stage, n in enumerate(ns):
        a_n = scal.evaluate(n)
        means, ses = tail_mass_profile(model, n, a_n, levels, replicates,
                                       substream(seed, stage))
        per_n.append({
            "n": n, "a_n": a_n, "replicates": replicates, "levels": levels,
            "tail_mass_means": [float(x) for x in means],
            "tail_mass_ses": [float(x) for x in ses],
        })
    return ExperimentReport(
        kind="tails", seed=seed, workers=workers, versions=_versions(),
        config=config,
        scaling={"kind": scal.kind,
                 "note": "tail-inversion representative of a_n (pinned)"},
        results={"per_n": per_n})


def cmd_experiment(args) -> int:
    config = _model_config(args)
    model = model_from_config(config)
    ns = [int(tok) for tok in args.ns.split(",") if tok]
    if not ns or any(b <= a for a, b in zip(ns, ns[1:])) or min(ns) < 1:
        raise InputError("--ns must be a strictly increasing list of sizes >= 1")
    if args.reps < 1:
        raise InputError("--reps must be >= 1")
    workers = _effective_workers(args.workers)
    started = time.monotonic()
    keep_raw = bool(args.csv)
    full_config = {**config, "ns": ns, "replicates": args.reps,
                   "experiment": args.experiment}
    if args.experiment == "theorem1":
        report = run_theorem1_experiment(model, ns, args.reps, args.k,
                                         args.seed, workers=workers,
                                         keep_raw=keep_raw)
    elif args.experiment == "theorem2":
        report = run_theorem2_experiment(model, ns, args.reps, args.seed,
                                         workers=workers, keep_raw=keep_raw)
    elif args.experiment == "moddist":
        report = _moddist_report(model, full_config, ns, args.reps, args.seed,
                                 workers)
    elif args.experiment == "tails":
        report = _tails_report(model, full_config, ns, args.reps, args.seed,
                               workers)
    else:  # pragma: no cover - argparse restricts choices
        raise InputError(f"unknown experiment {args.experiment!r}")
    report.config = {**report.config, "command": args.experiment}
    # Wall time is environment noise; deterministic mode drops it so reports
    # stay byte-identical for a fixed seed.
    if workers != "deterministic":
        report.runtime_seconds = time.monotonic() - started
    run_dir = _run_dir(args, args.seed)
    report_path = run_dir / f"report_{args.experiment}.json"
    report_path.write_text(report.to_json())
    if keep_raw and report.raw:
        (run_dir / f"raw_{args.experiment}.csv").write_text(report.raw_csv())
    print(f"wrote {report_path}")
    return 0


def cmd_verify(args) -> int:
    # Imported here so `--help` stays fast.
    from .offspring import make_custom_critical, make_geometric_critical, \
        make_power_tail_critical
    from .stats import check_coupling, check_cut_distance_oracle, \
        check_cyclic_lemma, check_emn_formula, check_gwstar_transform

    geometric = make_geometric_critical()
    power = make_power_tail_critical(1.5)
    binary = make_custom_critical({0: 0.5, 2: 0.5}, label="binary")
    checks = {}

    def register(name, fn):
        if args.only is None or args.only == name:
            checks[name] = fn

    register("emn", lambda: max(
        d for t, lhs, rhs, d in check_emn_formula(
            geometric, args.m_max, args.m_max, [0.5, 1.0, 2.0], 1.0)) < 1e-10)
    register("cyclic", lambda: max(
        check_cyclic_lemma(geometric, 5, args.cyclic_n),
        check_cyclic_lemma(power, 5, args.cyclic_n),
        check_cyclic_lemma(binary, 5, args.cyclic_n)) < 1e-12)

    def gwstar_ok():
        res_g = check_gwstar_transform(geometric, args.gwstar_vertices)
        res_b = check_gwstar_transform(binary, min(args.gwstar_vertices, 5))
        return max(res_g.tv_distance, res_b.tv_distance,
                   res_g.product_form_error, res_b.product_form_error) < 1e-12

    register("gwstar", gwstar_ok)

    def coupling_ok():
        res = check_coupling(geometric, args.coupling_runs, 64,
                             substream(args.seed, 1))
        return res.failures == 0 and res.explicit_failures == 0

    register("coupling", coupling_ok)

    def oracle_ok():
        res = check_cut_distance_oracle(geometric, args.oracle_trees, 48, 4,
                                        substream(args.seed, 2))
        return res.mismatches == 0

    register("oracle", oracle_ok)

    if not checks:
        raise InputError(f"unknown check {args.only!r}")
    failed = []
    for name, fn in checks.items():
        ok = fn()
        print(f"{name}: {'PASS' if ok else 'FAIL'}")
        if not ok:
            failed.append(name)
    if failed:
        print(f"failed checks: {', '.join(failed)}")
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cuttree-lab",
        description="Fragmentation and cut-tree experiments on conditioned "
                    "Galton-Watson trees")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_model_flags(p):
        p.add_argument("--model", choices=["geometric", "power_tail", "custom"],
                       default="geometric")
        p.add_argument("--alpha", type=float, default=None,
                       help="tail exponent in (1,2) for power_tail")
        p.add_argument("--pmf", default=None,
                       help="JSON pmf for the custom model")

    p_sample = sub.add_parser("sample", help="sample conditioned trees")
    add_model_flags(p_sample)
    p_sample.add_argument("--n", type=int, required=True)
    p_sample.add_argument("--count", type=int, default=1)
    p_sample.add_argument("--seed", type=int, required=True)
    p_sample.add_argument("--workers", type=_parse_workers,
                          default="deterministic")
    p_sample.add_argument("--out", default=None)
    p_sample.add_argument("--with-trace", action="store_true")
    p_sample.add_argument("--with-distances", action="store_true")
    p_sample.set_defaults(func=cmd_sample)

    p_exp = sub.add_parser("experiment", help="run a statistical experiment")
    p_exp.add_argument("experiment",
                       choices=["theorem1", "theorem2", "moddist", "tails"])
    add_model_flags(p_exp)
    p_exp.add_argument("--ns", required=True,
                       help="comma-separated strictly increasing sizes")
    p_exp.add_argument("--reps", type=int, required=True)
    p_exp.add_argument("--k", type=int, default=2)
    p_exp.add_argument("--seed", type=int, required=True)
    p_exp.add_argument("--workers", type=_parse_workers,
                       default="deterministic")
    p_exp.add_argument("--out", default=None)
    p_exp.add_argument("--csv", action="store_true",
                       help="also write raw samples as CSV")
    p_exp.set_defaults(func=cmd_experiment)

    p_ver = sub.add_parser("verify", help="run the exact-oracle check suite")
    p_ver.add_argument("--only", default=None,
                       choices=["emn", "cyclic", "gwstar", "coupling", "oracle"])
    p_ver.add_argument("--m-max", type=int, default=6)
    p_ver.add_argument("--gwstar-vertices", type=int, default=6)
    p_ver.add_argument("--cyclic-n", type=int, default=20)
    p_ver.add_argument("--coupling-runs", type=int, default=200)
    p_ver.add_argument("--oracle-trees", type=int, default=50)
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GuardError as exc:
        print(f"guard error: {exc}", file=sys.stderr)
        return 2
    except CutTreeLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
