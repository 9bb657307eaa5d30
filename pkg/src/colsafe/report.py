"""Run outputs: CSV traces, JSON summaries, and rendered figures.

Delimited outputs carry the data behind the figures; the figures are
rendered next to them so a run directory is self-contained.  Floats
are written with repr (shortest round-trip), which keeps identical
runs byte-identical.
"""

from __future__ import annotations

import csv
import json
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .benchmarks import ProblemSpec, grid_safe_optimum, true_table, true_values


def _f(x) -> str:
    return repr(float(x))


def trace_header(problem: ProblemSpec) -> list:
    d = problem.grid.dim
    q = problem.n_constraints
    cols = ["n"] + [f"a{j + 1}" for j in range(d)] + ["fhat"]
    cols += [f"ghat_{i}" for i in range(1, q + 1)]
    cols += ["S_size", "M_size", "G_size", "e_n",
             "t_bounds_ms", "t_sets_ms", "t_select_ms", "t_ingest_ms"]
    if problem.has_ground_truth:
        cols.append("violations_true")
    return cols


def write_trace(records, problem: ProblemSpec, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(trace_header(problem))
        for r in records:
            row = [r.n] + [_f(x) for x in r.point] + [_f(v) for v in r.values]
            row += [r.safe_size, r.max_size, r.exp_size, r.e_chosen,
                    _f(r.t_bounds_ms), _f(r.t_sets_ms), _f(r.t_select_ms),
                    _f(r.t_ingest_ms)]
            if problem.has_ground_truth:
                row.append(r.violations_true)
            w.writerow(row)


def write_safe_set(result, problem: ProblemSpec, path: str) -> None:
    grid = problem.grid
    loop = result.loop
    truth = true_table(problem) if problem.has_ground_truth else None
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        cols = ["index"] + [f"a{j + 1}" for j in range(grid.dim)]
        cols += ["safe", "maximizer", "expander", "e_count"]
        if truth is not None:
            cols.append("true_safe")
        w.writerow(cols)
        for k in range(grid.n_points):
            row = [k] + [_f(x) for x in grid.points[k]]
            row += [int(loop.safe_set[k]), int(loop.maximizers[k]),
                    int(loop.expanders[k]), int(loop.e_counts[k])]
            if truth is not None:
                row.append(int(np.all(truth[k, 1:] >= 0)))
            w.writerow(row)


def build_summary(result, problem: ProblemSpec, method: str, budget: int,
                  seed: int) -> dict:
    records = result.records
    bg = result.best_guess_idx
    bg_point = problem.grid.points[bg]
    summary = {
        "problem": problem.name,
        "method": method,
        "budget": int(budget),
        "seed": int(seed),
        "n_iterations": len(records),
        "converged": bool(result.converged),
        "best_guess": {
            "index": int(bg),
            "point": [float(x) for x in bg_point],
            # -inf before any reward information reaches the safe set;
            # JSON has no -inf, so report null there
            "reward_lower_bound": (
                float(result.bounds.l[bg, 0])
                if np.isfinite(result.bounds.l[bg, 0]) else None),
        },
        "violations_true_total": None,
        "intersection_violations": int(result.intersection_violations),
        "safe_set_size_final": int(result.loop.safe_set.sum()),
        "maximizer_size_final": int(result.loop.maximizers.sum()),
        "expander_size_final": int(result.loop.expanders.sum()),
        "wall_time": {
            "total_s": sum(r.t_bounds_ms + r.t_sets_ms + r.t_select_ms
                           + r.t_ingest_ms for r in records) / 1e3,
            "bounds_s": sum(r.t_bounds_ms for r in records) / 1e3,
            "sets_s": sum(r.t_sets_ms for r in records) / 1e3,
            "select_s": sum(r.t_select_ms for r in records) / 1e3,
            "ingest_s": sum(r.t_ingest_ms for r in records) / 1e3,
        },
    }
    if problem.has_ground_truth:
        tv = true_values(problem, bg_point)
        summary["best_guess"]["true_reward"] = float(tv[0])
        summary["best_guess"]["true_constraints"] = [float(x) for x in tv[1:]]
        opt_idx, opt_reward = grid_safe_optimum(problem)
        summary["grid_safe_optimum"] = {
            "index": int(opt_idx),
            "true_reward": opt_reward,
            "gap": opt_reward - float(tv[0]),
        }
        summary["violations_true_total"] = int(
            sum(r.violations_true or 0 for r in records))
    return summary


def write_summary(summary: dict, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_timing(rows, path: str) -> None:
    """rows: iterable of (method, n, t_bounds, t_sets, t_select, t_ingest) ms."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "n", "t_update_select_ms", "t_bounds_ms",
                    "t_sets_ms", "t_select_ms", "t_ingest_ms"])
        for method, n, tb, ts, tl, ti in rows:
            w.writerow([method, n, _f(tb + ts + tl), _f(tb), _f(ts), _f(tl),
                        _f(ti)])


# ---------------------------------------------------------------------------
# figures

plt.rcParams.update({
    "figure.dpi": 110,
    "savefig.dpi": 150,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
})


def render_safe_set(result, problem: ProblemSpec, path: str) -> None:
    """Final safe/maximizer/expander membership over the grid."""
    grid = problem.grid
    pts = grid.points
    loop = result.loop
    fig, ax = plt.subplots(figsize=(5.2, 4.6))
    ax.scatter(pts[:, 0], pts[:, 1], s=6, c="0.85", label="unknown")
    S = loop.safe_set
    ax.scatter(pts[S, 0], pts[S, 1], s=8, c="tab:blue", label="safe")
    G = loop.expanders
    ax.scatter(pts[G, 0], pts[G, 1], s=8, c="tab:orange", label="expanders")
    M = loop.maximizers
    ax.scatter(pts[M, 0], pts[M, 1], s=8, c="tab:green", label="maximizers")
    if problem.has_ground_truth and grid.dim == 2:
        tab = true_table(problem)
        gmin = tab[:, 1:].min(axis=1).reshape(grid.resolution)
        xs = np.unique(pts[:, 0])
        ys = np.unique(pts[:, 1])
        ax.contour(xs, ys, gmin.T, levels=[0.0], colors="k",
                   linewidths=1.2)
    seeds = grid.safe_seed
    ax.scatter(pts[seeds, 0], pts[seeds, 1], marker="*", s=120, c="k",
               label="seed", zorder=5)
    bg = result.best_guess_idx
    ax.scatter([pts[bg, 0]], [pts[bg, 1]], marker="*", s=120, c="tab:red",
               label="best guess", zorder=5)
    ax.set_xlabel("a1")
    ax.set_ylabel("a2")
    ax.set_title(f"{problem.name}: final safe set")
    ax.legend(loc="upper left", fontsize=7, framealpha=0.9)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)


def render_progress(result, problem: ProblemSpec, path: str) -> None:
    """Safe-set growth and best-guess lower bound over iterations."""
    records = result.records
    if not records:
        return
    n = [r.n for r in records]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.4, 3.2))
    ax1.plot(n, [r.safe_size for r in records], c="tab:blue")
    ax1.set_xlabel("iteration")
    ax1.set_ylabel("|S_n|")
    ax1.set_title("safe-set size")
    lb = [r.best_guess_lb for r in records]
    finite = [x if np.isfinite(x) else np.nan for x in lb]
    ax2.plot(n, finite, c="tab:red")
    ax2.set_xlabel("iteration")
    ax2.set_ylabel("reward lower bound")
    ax2.set_title("best-guess lower bound")
    fig.suptitle(f"{problem.name}", y=1.02)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)


def render_timing(timing_rows, path: str) -> None:
    """Per-iteration update+select time per method, log scale."""
    by_method: dict = {}
    for method, n, tb, ts, tl, _ in timing_rows:
        by_method.setdefault(method, ([], []))
        by_method[method][0].append(n)
        by_method[method][1].append(tb + ts + tl)
    fig, ax = plt.subplots(figsize=(5.6, 3.6))
    for method, (ns, ts_) in by_method.items():
        ax.plot(ns, ts_, lw=0.8, alpha=0.8, label=method)
    ax.set_yscale("log")
    ax.set_xlabel("accumulated observations n")
    ax.set_ylabel("update + select time [ms]")
    ax.set_title("per-iteration cost")
    ax.legend()
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)


def render_bounds_report(report: dict, path: str) -> None:
    """Empirical violation rates vs delta, and martingale means."""
    cells = report["cells"]
    mg = report["martingale"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.8, 3.4))
    labels = [f"{c['noise'][:4]}\nd={c['delta']}\nn={c['n']}" for c in cells]
    rates = [c["rate"] for c in cells]
    deltas = [c["delta"] for c in cells]
    x = np.arange(len(cells))
    ax1.bar(x, rates, color="tab:blue", label="empirical rate")
    ax1.plot(x, deltas, "r_", markersize=14, label="delta")
    ax1.set_xticks(x)
    ax1.set_xticklabels(labels, fontsize=6)
    ax1.set_ylabel("violation rate")
    ax1.set_title("self-normalized bound")
    ax1.legend(fontsize=7)
    x2 = np.arange(len(mg))
    means = [m["mean"] for m in mg]
    errs = [3 * m["stderr"] for m in mg]
    ax2.errorbar(x2, means, yerr=errs, fmt="o", capsize=3)
    ax2.axhline(1.0, color="r", lw=1)
    ax2.set_xticks(x2)
    ax2.set_xticklabels([f"{m['noise'][:4]}\neta={m['eta']}" for m in mg],
                        fontsize=6)
    ax2.set_ylabel("mean of w_n(eta)")
    ax2.set_title("supermartingale check")
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)


def ensure_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)
