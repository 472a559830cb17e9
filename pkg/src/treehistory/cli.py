"""Command-line surface: validation, posteriors, sampling, fitting, selection.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
Primary output files are byte-identical across reruns of the same command and
seed; each output file gets a sidecar `<name>.manifest.json` carrying the
full run description including wall time (the only field allowed to differ).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .experiments import (
    archaeology_correlation,
    kernel_recovery,
    model_selection_study,
    timeline_overlap_study,
)
from .inference import (
    STATISTICS,
    default_gamma_grid,
    interpolate_statistic,
    kernel_posterior,
    kernel_posterior_from_history,
    log_bayes_factor,
    reweighted_arrival_times,
)
from .models import KernelFamily, generate, parse_model_spec
from .posterior import arrival_posterior, credible_intervals, posterior_mean_times
from .sampler import BridgeSampler, DegenerateWeightsError, HistorySampler
from .seeding import as_generator
from .tree import TreeHistoryError, is_consistent, parse_edge_list, serialize_edge_list

USAGE_ERROR = 1
DATA_ERROR = 2
NUMERICAL_ERROR = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(USAGE_ERROR)


def _load_tree(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh)


def _load_node_list(tree, path):
    nodes = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            nodes.append(tree.index(line))
    return nodes


def _load_history(tree, path):
    """Two-column label,arrival-time file -> validated History."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            label, _, when = line.partition(",")
            try:
                t = float(when)
            except ValueError:
                continue  # header row
            rows.append((t, label.strip()))
    rows.sort()
    order = [tree.index(label) for _, label in rows]
    return is_consistent(tree, order)


def _manifest(args, command, parameters, started):
    return {
        "command": command,
        "arguments": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
        "parameters": parameters,
        "tool_version": __version__,
        "wall_time_s": round(time.time() - started, 6),
    }


def _emit(payload, out, manifest):
    """Write payload JSON to `out` (or stdout) plus a manifest sidecar."""
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        with open(out + ".manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        sys.stdout.write(text)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _cmd_validate(args):
    started = time.time()
    tree = _load_tree(args.edges)
    payload = {
        "nodes": tree.n,
        "edges": tree.n - 1,
        "valid_tree": True,
        "labels_preview": [tree.label(i) for i in range(min(tree.n, 5))],
    }
    _emit(payload, args.out, _manifest(args, "validate", {}, started))
    return 0


def _cmd_arrival_times(args):
    started = time.time()
    tree = _load_tree(args.edges)
    params = {"seed": args.seed, "mode": "mc" if args.mc else "exact"}
    if args.mc:
        params["samples"] = args.mc
        sampler = HistorySampler(tree)
        rng = as_generator(args.seed)
        tau = np.empty((args.mc, tree.n))
        for s in range(args.mc):
            tau[s] = sampler.sample(rng).arrival
        mean = tau.mean(axis=0)
        se = tau.std(axis=0, ddof=1) / np.sqrt(args.mc) if args.mc > 1 else np.zeros(tree.n)
        nodes = [
            {"label": tree.label(i), "mean_time": float(mean[i]), "mc_se": float(se[i])}
            for i in range(tree.n)
        ]
        payload = {"mode": "mc", "samples": args.mc, "seed": args.seed, "nodes": nodes}
    else:
        post = arrival_posterior(tree)
        means = posterior_mean_times(post)
        bands = credible_intervals(post, masses=(0.5, 0.95))
        nodes = [
            {
                "label": tree.label(i),
                "mean_time": float(means[i]),
                "ci50": [int(bands[0.5][0][i]), int(bands[0.5][1][i])],
                "ci95": [int(bands[0.95][0][i]), int(bands[0.95][1][i])],
            }
            for i in range(tree.n)
        ]
        payload = {"mode": "exact", "log_total_histories": post.log_z, "nodes": nodes}
        if args.out:
            matrix_path = args.out + ".matrix.csv"
            header = ["label"] + [f"t{t}" for t in range(tree.n)]
            rows = [
                [tree.label(i)] + [repr(float(x)) for x in post.probabilities[i]]
                for i in range(tree.n)
            ]
            _write_csv(matrix_path, header, rows)
            payload["matrix_csv"] = os.path.basename(matrix_path)
    _emit(payload, args.out, _manifest(args, "arrival-times", params, started))
    return 0


def _cmd_sample(args):
    started = time.time()
    tree = _load_tree(args.edges)
    rng = as_generator(args.seed)
    lines = []
    if args.initial:
        initial = _load_node_list(tree, args.initial)
        bridge = BridgeSampler(tree, initial)
        for _ in range(args.count):
            seq = bridge.sample(rng)
            lines.append(
                {"initial_size": len(initial), "order": [tree.label(v) for v in seq]}
            )
    else:
        sampler = HistorySampler(tree)
        for _ in range(args.count):
            hist = sampler.sample(rng)
            lines.append(
                {
                    "seed": tree.label(hist.seed),
                    "order": [tree.label(v) for v in hist.order],
                }
            )
    text = "".join(json.dumps(line, sort_keys=True) + "\n" for line in lines)
    manifest = _manifest(
        args, "sample", {"count": args.count, "seed": args.seed}, started
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        with open(args.out + ".manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_interpolate(args):
    started = time.time()
    tree = _load_tree(args.edges)
    initial = _load_node_list(tree, args.initial)
    traj = interpolate_statistic(tree, initial, args.stat, args.count, rng=args.seed)
    payload = {
        "statistic": traj.statistic,
        "initial_size": traj.initial_size,
        "samples": traj.sample_count,
        "seed": args.seed,
        "times": traj.times.tolist(),
        "mean": traj.mean.tolist(),
        "lower95": traj.lower.tolist(),
        "upper95": traj.upper.tolist(),
    }
    manifest = _manifest(
        args,
        "interpolate",
        {"stat": args.stat, "count": args.count, "seed": args.seed},
        started,
    )
    if args.out:
        _write_csv(
            args.out + ".csv",
            ["t", "mean", "lower95", "upper95"],
            [
                [int(t), repr(float(m)), repr(float(lo)), repr(float(hi))]
                for t, m, lo, hi in zip(traj.times, traj.mean, traj.lower, traj.upper)
            ],
        )
    _emit(payload, args.out, manifest)
    return 0


def _parse_grid(spec):
    try:
        lo, hi, step = (float(x) for x in spec.split(":"))
    except ValueError as err:
        raise ValueError(f"bad grid {spec!r}; expected lo:hi:step") from err
    if step <= 0 or hi <= lo:
        raise ValueError(f"bad grid {spec!r}; need lo < hi and step > 0")
    return default_gamma_grid(lo, hi, step)


def _posterior_payload(post, seed):
    return {
        "grid": post.grid.tolist(),
        "log_post": post.log_post.tolist(),
        "masses": post.masses.tolist(),
        "mc_se": post.mc_se.tolist(),
        "posterior_mean": post.mean,
        "map": post.map_estimate,
        "ci50": list(post.interval(0.5)),
        "ci95": list(post.interval(0.95)),
        "samples": post.sample_count,
        "seed": seed,
    }


def _cmd_fit_kernel(args):
    started = time.time()
    tree = _load_tree(args.edges)
    grid = _parse_grid(args.grid)
    if args.history:
        hist = _load_history(tree, args.history)
        post = kernel_posterior_from_history(tree, hist, grid=grid)
    else:
        post = kernel_posterior(tree, samples=args.samples, grid=grid, rng=args.seed)
    payload = _posterior_payload(post, args.seed)
    payload["known_timeline"] = bool(args.history)
    params = {
        "samples": args.samples,
        "grid": args.grid,
        "seed": args.seed,
        "history": args.history,
    }
    if args.out:
        _write_csv(
            args.out + ".grid.csv",
            ["gamma", "mass", "log_post", "mc_se"],
            [
                [repr(float(g)), repr(float(m)), repr(float(lp)), repr(float(se))]
                for g, m, lp, se in zip(post.grid, post.masses, post.log_post, post.mc_se)
            ],
        )
    _emit(payload, args.out, _manifest(args, "fit-kernel", params, started))
    return 0


def _cmd_model_select(args):
    started = time.time()
    tree = _load_tree(args.edges)
    model_a = parse_model_spec(args.a)
    model_b = parse_model_spec(args.b)
    grid = _parse_grid(args.grid)
    res = log_bayes_factor(
        tree, model_a, model_b, samples=args.samples, rng=args.seed, grid=grid
    )
    payload = {
        "log_k": res.log_k,
        "mc_se": res.mc_se,
        "model_a": res.model_a,
        "model_b": res.model_b,
        "log_evidence_terms": {"a": res.log_evidence_a, "b": res.log_evidence_b},
        "favoured": res.model_a if res.log_k > 0 else res.model_b,
        "samples": res.sample_count,
        "seed": args.seed,
    }
    params = {"a": args.a, "b": args.b, "samples": args.samples, "seed": args.seed}
    _emit(payload, args.out, _manifest(args, "model-select", params, started))
    return 0


def _cmd_generate(args):
    started = time.time()
    model = parse_model_spec(args.model)
    if isinstance(model, KernelFamily):
        raise ValueError("generate needs a fully parameterized model (kernel:gamma=...)")
    tree, hist = generate(model, args.n, rng=args.seed)
    edges_text = serialize_edge_list(tree)
    manifest = _manifest(
        args, "generate", {"model": args.model, "n": args.n, "seed": args.seed}, started
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(edges_text)
        with open(args.out + ".manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        sys.stdout.write(edges_text)
    if args.history_out:
        _write_csv(
            args.history_out,
            ["label", "arrival_time"],
            [[tree.label(v), hist.arrival[v]] for v in range(tree.n)],
        )
    return 0


def _cmd_reproduce(args):
    started = time.time()
    jobs = int(os.environ.get("TREEHISTORY_JOBS", "1"))
    if args.which == "fig2a":
        res = archaeology_correlation(
            trials=args.trials or 300, size=100, seed=args.seed, jobs=jobs
        )
        summary = (
            f"posterior-mean Pearson {res['posterior_mean_pearson']:.3f} "
            f"vs degree baseline {res['degree_baseline_pearson']:.3f}"
        )
    elif args.which == "fig2c":
        res = kernel_recovery(seed=args.seed, samples=args.samples or 100)
        summary = "; ".join(
            f"gamma={row['true_gamma']:.2f}: mean {row['posterior_mean']:.2f} "
            f"ci95 [{row['ci95'][0]:.2f}, {row['ci95'][1]:.2f}]"
            for row in res["fits"]
        )
    elif args.which == "bayes":
        res = model_selection_study(
            replicates=args.trials or 20,
            samples=args.samples or 100,
            r_values=(0.5, 0.25, 0.75) if args.sweep_r else (0.5,),
            seed=args.seed,
            jobs=jobs,
        )
        summary = "; ".join(
            f"r={row['r']:g}: {row['correct_signs']}/{row['total']} correct, "
            f"mean |log K| {row['mean_abs_log_k']:.2f}"
            for row in res["results"]
        )
    else:
        res = timeline_overlap_study(
            replicates=args.trials or 20, samples=args.samples or 100, seed=args.seed
        )
        summary = f"{res['overlapping']}/{res['total']} interval pairs overlap"
    res["jobs"] = jobs
    _emit(res, args.out, _manifest(args, f"reproduce {args.which}", res.get("parameters", {}), started))
    sys.stderr.write(summary + "\n")
    return 0


def build_parser():
    parser = _Parser(prog="treehistory", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="parse an edge list and report tree validity")
    p.add_argument("edges")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("arrival-times", help="per-node arrival-time posteriors")
    p.add_argument("edges")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="full posterior (default)")
    mode.add_argument("--mc", type=int, metavar="S", help="Monte Carlo estimate from S samples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_arrival_times)

    p = sub.add_parser("sample", help="draw uniform histories (or bridges) as JSON lines")
    p.add_argument("edges")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--initial", help="file of node labels already present")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("interpolate", help="statistic trajectory between two snapshots")
    p.add_argument("edges")
    p.add_argument("--initial", required=True)
    p.add_argument("--stat", default="excess-degree", choices=sorted(STATISTICS))
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_interpolate)

    p = sub.add_parser("fit-kernel", help="posterior over the attachment exponent")
    p.add_argument("edges")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--grid", default="-2:3:0.05")
    p.add_argument("--history", help="label,arrival-time file: fit the known timeline")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_fit_kernel)

    p = sub.add_parser("model-select", help="log Bayes factor between two growth models")
    p.add_argument("edges")
    p.add_argument("--a", required=True, help="e.g. kernel:gamma=1, redirection:r=0.5, uniform, kernel")
    p.add_argument("--b", required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--grid", default="-2:3:0.05")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_model_select)

    p = sub.add_parser("generate", help="grow a synthetic tree and its true history")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="edge-list path (stdout if omitted)")
    p.add_argument("--history-out", help="label,arrival-time CSV path")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("reproduce", help="desk-scale validation experiments")
    p.add_argument("which", choices=["fig2a", "fig2c", "bayes", "timeline"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--sweep-r", action="store_true", help="bayes: sweep redirection r")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_reproduce)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        return args.func(args)
    except DegenerateWeightsError as err:
        sys.stderr.write(f"treehistory: numerical failure: {err}\n")
        return NUMERICAL_ERROR
    except (TreeHistoryError, FileNotFoundError, KeyError) as err:
        sys.stderr.write(f"treehistory: data error: {err}\n")
        return DATA_ERROR
    except ValueError as err:
        sys.stderr.write(f"treehistory: error: {err}\n")
        return USAGE_ERROR
    except (FloatingPointError, OverflowError) as err:
        sys.stderr.write(f"treehistory: numerical failure: {err}\n")
        return NUMERICAL_ERROR


def console_main():  # pragma: no cover - thin wrapper
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
