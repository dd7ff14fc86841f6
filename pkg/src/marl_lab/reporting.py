"""Dataset writers and figure rendering.

CSV schemas (fixed headers, floats printed with 9 significant digits):

  arena     step,run,player,action,prob,sampled,reward
            one row per (step, run, player, action); `sampled` is 1 on the
            row of the action actually drawn that step, and `reward` is the
            player's reward that step (repeated across its action rows)
  dynamics  t,p,q,algorithm
  dtap      window_end,atst,completed,max_hops   (atst empty when no task
            completed in the window)
  grid      p_star,q_star,max_late_distance      (dispersion summaries)

`--format json` writes the same records as a JSON array of objects.  Every
writer is deterministic: identical inputs give byte-identical files.

Each dataset can also be rendered to a PNG next to the delimited file:
arena runs plot the across-run mean action probabilities (with a standard
deviation band), dynamics plot the phase plane, dtap plots ATST over time,
and grid summaries plot per-equilibrium dispersion.
"""

from __future__ import annotations

import json
import math
import os

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _g(value: float) -> str:
    return f"{float(value):.9g}"


# --- row builders -------------------------------------------------------------


def arena_rows(trajectories, sample_every: int = 1):
    """Yield arena records; see the module docstring for the schema."""
    for run_idx, traj in enumerate(trajectories):
        steps = traj.steps
        players = len(traj.policies)
        for t in range(0, steps, sample_every):
            for i in range(players):
                sampled = int(traj.actions[t, i])
                reward = float(traj.rewards[t, i])
                probs = traj.policies[i][t]
                for a in range(len(probs)):
                    yield {
                        "step": t,
                        "run": run_idx,
                        "player": i,
                        "action": a,
                        "prob": float(probs[a]),
                        "sampled": int(a == sampled),
                        "reward": reward,
                    }


def dynamics_rows(paths: dict, sample_every: float = 0.0):
    """Yield dynamics records from {algorithm label: [PhasePoint, ...]}."""
    for label in paths:
        next_t = -math.inf
        for pt in paths[label]:
            if pt.t + 1e-12 < next_t:
                continue
            next_t = pt.t + sample_every
            yield {"t": pt.t, "p": pt.p, "q": pt.q, "algorithm": label}


def dtap_rows(result):
    for w in result.windows:
        yield {
            "window_end": w.window_end,
            "atst": None if w.atst is None else float(w.atst),
            "completed": w.completed,
            "max_hops": w.max_hops,
        }


def grid_rows(dispersion):
    for (p_star, q_star), dist in zip(dispersion.ne_points, dispersion.max_distance):
        yield {"p_star": p_star, "q_star": q_star, "max_late_distance": float(dist)}


_SCHEMAS = {
    "arena": ("step", "run", "player", "action", "prob", "sampled", "reward"),
    "dynamics": ("t", "p", "q", "algorithm"),
    "dtap": ("window_end", "atst", "completed", "max_hops"),
    "grid": ("p_star", "q_star", "max_late_distance"),
}


def write_rows(path: str, schema: str, rows, fmt: str = "csv") -> str:
    """Write records to CSV or JSON; returns the path written."""
    columns = _SCHEMAS[schema]
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    if fmt == "json":
        data = [dict(row) for row in rows]
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=None, separators=(",", ":"))
            fh.write("\n")
        return path
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}; expected csv or json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            cells = []
            for col in columns:
                val = row[col]
                if val is None:
                    cells.append("")
                elif isinstance(val, float):
                    cells.append(_g(val))
                else:
                    cells.append(str(val))
            fh.write(",".join(cells) + "\n")
    return path


# --- figure rendering ----------------------------------------------------------


def render_arena(path: str, report, title: str = "") -> str:
    """Mean action probabilities over time, one panel per player."""
    players = len(report.mean)
    fig, axes = plt.subplots(1, players, figsize=(5.5 * players, 4.0), squeeze=False)
    for i, ax in enumerate(axes[0]):
        series = report.mean[i]
        band = report.std[i]
        steps = np.arange(series.shape[0])
        for a in range(series.shape[1]):
            (line,) = ax.plot(steps, series[:, a], label=f"action {a}")
            if report.runs > 1:
                ax.fill_between(steps, series[:, a] - band[:, a], series[:, a] + band[:, a],
                                alpha=0.2, color=line.get_color())
        ax.set_xlabel("step")
        ax.set_ylabel("probability")
        ax.set_ylim(-0.02, 1.02)
        ax.set_title(f"player {i}")
        ax.legend(loc="best", fontsize=8)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_dynamics(path: str, paths: dict, title: str = "") -> str:
    """Phase-plane plot of one or more labeled trajectories."""
    fig, ax = plt.subplots(figsize=(5.5, 5.0))
    for label, pts in paths.items():
        arr = np.asarray(pts, dtype=float)
        ax.plot(arr[:, 1], arr[:, 2], lw=1.0, label=label)
        ax.plot(arr[0, 1], arr[0, 2], "o", ms=4, color=ax.lines[-1].get_color())
    ax.set_xlabel("p (first player)")
    ax.set_ylabel("q (second player)")
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    ax.set_aspect("equal")
    if len(paths) > 1 or title:
        ax.legend(loc="best", fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_dtap(path: str, result, title: str = "") -> str:
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    xs = [w.window_end for w in result.windows if w.atst is not None]
    ys = [w.atst for w in result.windows if w.atst is not None]
    ax.plot(xs, ys, lw=1.0)
    ax.set_xlabel("time")
    ax.set_ylabel("ATST")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_grid(path: str, dispersion, title: str = "") -> str:
    fig, ax = plt.subplots(figsize=(5.5, 5.0))
    ps = [p for p, _ in dispersion.ne_points]
    qs = [q for _, q in dispersion.ne_points]
    sc = ax.scatter(ps, qs, c=dispersion.max_distance, s=60, cmap="viridis")
    fig.colorbar(sc, ax=ax, label="max late-window distance")
    ax.set_xlabel("p*")
    ax.set_ylabel("q*")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
