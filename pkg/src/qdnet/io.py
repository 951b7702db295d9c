"""Tabular export: every experiment emits plot-ready columnar data as
CSV or JSON (list of row objects), plus a small key=value config reader
for the command line.  Floats are written with repr so a re-run with the
same seed reproduces files byte for byte.
"""

from __future__ import annotations

import csv
import json

import numpy as np


def write_table(path, header, rows, fmt: str = "csv"):
    """Write rows under the given column names; returns the path."""
    if fmt == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows([_cell(v) for v in row] for row in rows)
    elif fmt == "json":
        payload = [dict(zip(header, map(_jsonable, row))) for row in rows]
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value


def _jsonable(value):
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    return value


def pattern_label(pattern) -> str:
    """Stable text form of a control pattern: sorted ids joined by '+'."""
    return "+".join(sorted(pattern.blocked))


def profile_table(profile):
    header = ["blocked"] + [f"p_{dot}" for dot in profile.destinations]
    rows = [
        [pattern_label(pattern)] + [float(v) for v in probs]
        for pattern, probs in profile.entries.items()
    ]
    return header, rows


def trajectory_table(traj):
    header = (
        ["t_ps"]
        + list(traj.coherent_ids)
        + list(traj.lower_ids)
        + [f"emit_{lid}" for lid in traj.radiative_ids]
        + ["total_emitted"]
    )
    rows = []
    for k, t in enumerate(traj.times):
        rows.append(
            [float(t)]
            + [float(v) for v in traj.coherent_pops[k]]
            + [float(v) for v in traj.lower_pops[k]]
            + [float(v) for v in traj.photon_yields[k]]
            + [float(traj.photon_yields[k].sum())]
        )
    return header, rows


def nor_table(stats):
    n = stats.x_ratio.shape[1]
    states = [stats.state_label(k) for k in range(len(stats.solution_states))]
    header = (
        ["cycle"]
        + [f"ratio_x{i}" for i in range(1, n + 1)]
        + [f"ratio_state{s}" for s in states]
        + ["ratio_correct"]
        + [f"win_x{i}" for i in range(1, n + 1)]
        + [f"win_state{s}" for s in states]
        + ["win_correct"]
    )
    rows = []
    for c, cycle in enumerate(stats.cycles):
        rows.append(
            [int(cycle)]
            + [float(v) for v in stats.x_ratio[c]]
            + [float(v) for v in stats.state_ratio[c]]
            + [float(stats.correct_ratio[c])]
            + [float(v) for v in stats.windowed_x[c]]
            + [float(v) for v in stats.windowed_state[c]]
            + [float(stats.windowed_correct[c])]
        )
    return header, rows


def solve_table(result):
    header = ["solved", "steps", "assignment"]
    assignment = "" if result.assignment is None else " ".join(map(str, result.assignment))
    return header, [[int(result.solved), result.steps, assignment]]


def bench_table(rows):
    header = [
        "instance", "solver", "trials", "solved", "success_rate",
        "mean_steps", "median_steps", "timeouts", "walksat_rank",
    ]
    out = [
        [
            r.instance, r.solver, r.trials, r.solved, float(r.success_rate),
            float(r.mean_steps), float(r.median_steps), r.timeouts, r.walksat_rank,
        ]
        for r in rows
    ]
    return header, out


def efficiency_table(comparison):
    header = ["play", "nanodm_rate", "softmax_rate", "nanodm_std", "softmax_std"]
    rows = []
    for t in range(comparison.nanodm.plays):
        rows.append(
            [
                t + 1,
                float(comparison.nanodm.cumulative_rate[t]),
                float(comparison.softmax.cumulative_rate[t]),
                float(comparison.nanodm.cumulative_std[t]),
                float(comparison.softmax.cumulative_std[t]),
            ]
        )
    return header, rows


def selection_table(model):
    header = ["j", "S_A", "S_B", "S_B-S_A"]
    rows = [
        [int(j), float(a), float(b), float(b - a)]
        for j, a, b in zip(model.j_grid, model.s_a, model.s_b)
    ]
    return header, rows


def read_config(path) -> dict:
    """Parse a key=value config file: one pair per line, # comments,
    blank lines ignored.  Values stay strings; the caller casts."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            key = key.strip()
            if not key:
                raise ValueError(f"{path}:{lineno}: empty key")
            out[key] = value.strip()
    return out
