"""Figure rendering for the command line report paths.  Every function
takes the same objects the table writers consume, saves a PNG, closes
the figure, and returns the path.  Rendering is headless (Agg).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import pattern_label

DPI = 150


def _save(fig, path):
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def profile_figure(profile, path):
    """Grouped bars: radiation probability per destination, one group
    per control pattern."""
    labels = [pattern_label(p) or "(none)" for p in profile.entries]
    probs = np.array(list(profile.entries.values()))
    n_patterns, n_dots = probs.shape
    x = np.arange(n_patterns)
    width = 0.8 / n_dots

    fig, ax = plt.subplots(figsize=(max(6.0, 0.55 * n_patterns), 4.0), constrained_layout=True)
    for k, dot in enumerate(profile.destinations):
        ax.bar(x + (k - (n_dots - 1) / 2) * width, probs[:, k], width, label=dot)
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
    ax.set_xlabel("blocked lower levels")
    ax.set_ylabel("radiation probability")
    ax.set_title(f"transfer profile, gain {profile.gain:g}")
    ax.legend(fontsize=8)
    return _save(fig, path)


def nor_figure(stats, path):
    """Two panels: per-dot output ratios, then solution-state ratios with
    their windowed averages."""
    cycles = stats.cycles
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True, constrained_layout=True)

    for i in range(stats.x_ratio.shape[1]):
        top.plot(cycles, stats.x_ratio[:, i], lw=1, label=f"x{i + 1}")
    top.set_ylabel("ratio of x_i = 1")
    top.set_ylim(-0.05, 1.05)
    top.legend(fontsize=8, ncol=4)

    for k in range(stats.state_ratio.shape[1]):
        label = stats.state_label(k)
        (line,) = bottom.plot(cycles, stats.state_ratio[:, k], lw=1, alpha=0.5)
        bottom.plot(cycles, stats.windowed_state[:, k], lw=2,
                    color=line.get_color(), label=f"state {label}")
    bottom.plot(cycles, stats.windowed_correct, "k--", lw=1.5, label="correct")
    bottom.set_xlabel("cycle")
    bottom.set_ylabel("ratio")
    bottom.set_ylim(-0.05, 1.05)
    bottom.legend(fontsize=8)
    return _save(fig, path)


def trace_figure(trace, num_vars, path):
    """Reservoir occupation X over time as an image: one row per step,
    columns paired (i, 0), (i, 1) per variable."""
    fig, ax = plt.subplots(figsize=(max(4.0, 0.3 * 2 * num_vars), 4.5), constrained_layout=True)
    im = ax.imshow(trace, aspect="auto", interpolation="nearest",
                   cmap="coolwarm", vmin=-1, vmax=1)
    ax.set_xticks(np.arange(2 * num_vars))
    ax.set_xticklabels([f"{i},{v}" for i in range(1, num_vars + 1) for v in (0, 1)],
                       rotation=90, fontsize=6)
    ax.set_xlabel("reservoir (variable, value)")
    ax.set_ylabel("step")
    fig.colorbar(im, ax=ax, label="X")
    return _save(fig, path)


def bench_figure(rows, path):
    """Mean steps-to-solution per instance, instances ordered by the
    walksat ranking, one line per solver."""
    order = {}
    for r in rows:
        order.setdefault(r.instance, r.walksat_rank)
    instances = sorted(order, key=lambda name: (order[name], name))
    pos = {name: k for k, name in enumerate(instances)}

    fig, ax = plt.subplots(figsize=(max(6.0, 0.45 * len(instances)), 4.5), constrained_layout=True)
    for solver in sorted({r.solver for r in rows}):
        xs, ys = [], []
        for r in rows:
            if r.solver == solver and np.isfinite(r.mean_steps):
                xs.append(pos[r.instance])
                ys.append(r.mean_steps)
        ax.plot(xs, ys, "o-", ms=4, label=solver)
    ax.set_yscale("log")
    ax.set_xticks(np.arange(len(instances)))
    ax.set_xticklabels(instances, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("mean steps (solved trials)")
    ax.legend()
    return _save(fig, path)


def efficiency_figure(comparison, path):
    """Cumulative correct-selection rate per play for both policies,
    with across-sample standard error bands."""
    plays = np.arange(1, comparison.nanodm.plays + 1)
    fig, ax = plt.subplots(figsize=(6.5, 4.5), constrained_layout=True)
    for stats, label in ((comparison.nanodm, "nanodm"),
                         (comparison.softmax, f"softmax (beta={comparison.beta:g})")):
        (line,) = ax.plot(plays, stats.cumulative_rate, lw=1.5, label=label)
        sem = stats.cumulative_sem
        ax.fill_between(plays, stats.cumulative_rate - sem, stats.cumulative_rate + sem,
                        color=line.get_color(), alpha=0.25, lw=0)
    m = comparison.machines
    ax.set_title(f"P_A={m.p_a:g}, P_B={m.p_b:g}, D={comparison.d}")
    ax.set_xlabel("play")
    ax.set_ylabel("cumulative correct-selection rate")
    ax.set_ylim(0.0, 1.0)
    ax.legend()
    return _save(fig, path)


def selection_figure(model, path):
    """Photon yields per arm against the controller position, with the
    selection probability they induce."""
    j = np.asarray(model.j_grid)
    fig, (left, right) = plt.subplots(1, 2, figsize=(9.0, 4.0), constrained_layout=True)

    left.plot(j, model.s_a, "o-", ms=3, label="S_A")
    left.plot(j, model.s_b, "s-", ms=3, label="S_B")
    left.set_xlabel("j")
    left.set_ylabel("photon yield")
    left.legend()

    right.plot(j, [model.prob_a(int(v)) for v in j], "k.-", ms=3)
    right.set_xlabel("j")
    right.set_ylabel("P(select A | j)")
    right.set_ylim(0.0, 1.0)
    return _save(fig, path)
