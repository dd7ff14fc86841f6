"""Command-line experiment runner.

    marl-lab run --preset fig12b --out results/
    marl-lab run --config my_experiment.cfg --seed 3 --format json --no-plot
    marl-lab validate
    marl-lab presets

`run` executes one config file or one figure preset.  Every experiment
writes a delimited dataset (CSV by default) and, unless --no-plot is given,
a rendered PNG figure next to it.  A sweep config fans its experiments out
over worker processes; MARL_LAB_THREADS caps the worker count.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from . import arena, dynamics, dtap, reporting
from .config import (
    ConfigError,
    ExperimentConfig,
    arena_config,
    parse_config,
    serialize_config,
)
from .games import benchmark, gradient_constants
from .presets import expand_preset, preset_names
from .validation import run_all


def _thread_cap() -> int:
    env = os.environ.get("MARL_LAB_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            print(f"warning: ignoring bad MARL_LAB_THREADS={env!r}", file=sys.stderr)
    return max(1, os.cpu_count() or 1)


def _dynamics_field_constants(sec):
    if sec.u is not None:
        return sec.u
    return gradient_constants(benchmark(sec.game)).as_tuple()


def _run_dynamics(sec, label, out_dir, fmt, plot):
    written = []
    if sec.kind == "grid":
        disp = dynamics.grid_experiment(sec.ne_grid, sec.starts_per_side, sec.horizon,
                                        sec.late_window, sec.dt)
        written.append(reporting.write_rows(os.path.join(out_dir, f"{label}.{fmt}"),
                                            "grid", reporting.grid_rows(disp), fmt))
        if plot:
            written.append(reporting.render_grid(os.path.join(out_dir, f"{label}.png"), disp, label))
        return written
    u = _dynamics_field_constants(sec)
    if sec.kind == "compare":
        paths = dynamics.compare_portraits(u, sec.start, sec.horizon, sec.dt,
                                           l_win=sec.l_win, l_lose=sec.l_lose)
        path_lists = {k: [v] for k, v in paths.items()}
    else:
        field = dynamics.make_field(sec.kind, u, l_win=sec.l_win, l_lose=sec.l_lose)
        if sec.starts == "boundary":
            starts = dynamics.boundary_starts(sec.starts_per_side)
        else:
            starts = [sec.start]
        path_lists = {sec.kind: [dynamics.integrate(field, s, sec.horizon, sec.dt) for s in starts]}
    rows = []
    flat = {}
    for algo, paths_for in path_lists.items():
        for i, pts in enumerate(paths_for):
            flat[f"{algo}" if len(paths_for) == 1 else f"{algo}[{i}]"] = pts
            rows.extend(reporting.dynamics_rows({algo: pts}, sec.sample_every))
    written.append(reporting.write_rows(os.path.join(out_dir, f"{label}.{fmt}"), "dynamics", rows, fmt))
    if plot:
        written.append(reporting.render_dynamics(os.path.join(out_dir, f"{label}.png"), flat, label))
    return written


def run_labeled(job) -> list[str]:
    """Execute one labeled experiment; returns the files written."""
    cfg, out_dir, fmt, plot, seed = job
    label = cfg.label
    if cfg.mode == "arena":
        sec = cfg.arena if seed is None else replace(cfg.arena, seed=seed)
        run_cfg = arena_config(sec)
        trajs = arena.run(run_cfg)
        written = [reporting.write_rows(os.path.join(out_dir, f"{label}.{fmt}"), "arena",
                                        reporting.arena_rows(trajs, sec.sample_every), fmt)]
        if plot:
            report = arena.aggregate(trajs)
            written.append(reporting.render_arena(os.path.join(out_dir, f"{label}.png"), report, label))
        return written
    if cfg.mode == "dynamics":
        return _run_dynamics(cfg.dynamics, label, out_dir, fmt, plot)
    if cfg.mode == "dtap":
        sec = cfg.dtap if seed is None else replace(cfg.dtap, seed=seed)
        result = dtap.run_experiment(sec)
        written = [reporting.write_rows(os.path.join(out_dir, f"{label}.{fmt}"), "dtap",
                                        reporting.dtap_rows(result), fmt)]
        if plot:
            written.append(reporting.render_dtap(os.path.join(out_dir, f"{label}.png"), result, label))
        return written
    raise ValueError(f"cannot execute mode {cfg.mode!r} directly")


def _expand(cfg: ExperimentConfig, base_dir: str) -> list[ExperimentConfig]:
    if cfg.mode != "sweep":
        return [cfg]
    out: list[ExperimentConfig] = []
    for name in cfg.sweep.presets:
        out.extend(expand_preset(name))
    for path in cfg.sweep.configs:
        full = path if os.path.isabs(path) else os.path.join(base_dir, path)
        with open(full, "r", encoding="utf-8") as fh:
            sub = parse_config(fh.read(), label=os.path.splitext(os.path.basename(path))[0])
        out.extend(_expand(sub, os.path.dirname(full)))
    return out


def _cmd_run(args) -> int:
    if bool(args.config) == bool(args.preset):
        print("error: give exactly one of --config or --preset", file=sys.stderr)
        return 2
    try:
        if args.config:
            with open(args.config, "r", encoding="utf-8") as fh:
                root = parse_config(fh.read(), label=os.path.splitext(os.path.basename(args.config))[0])
            jobs_cfg = _expand(root, os.path.dirname(os.path.abspath(args.config)))
        else:
            jobs_cfg = expand_preset(args.preset)
    except (OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print("invalid config:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  - {problem}", file=sys.stderr)
        return 1

    jobs = [(cfg, args.out, args.format, args.plot, args.seed) for cfg in jobs_cfg]
    try:
        if len(jobs) > 1 and _thread_cap() > 1:
            with ProcessPoolExecutor(max_workers=min(_thread_cap(), len(jobs))) as pool:
                results = list(pool.map(run_labeled, jobs))
        else:
            results = [run_labeled(job) for job in jobs]
    except OSError as exc:
        print(f"error writing outputs: {exc}", file=sys.stderr)
        return 1
    for files in results:
        for path in files:
            print(path)
    return 0


def _cmd_validate(_args) -> int:
    results = run_all()
    failures = 0
    for res in results:
        mark = "PASS" if res.passed else "FAIL"
        print(f"[{mark}] {res.name}: {res.detail}")
        failures += 0 if res.passed else 1
    return 0 if failures == 0 else 1


def _cmd_presets(_args) -> int:
    for name in preset_names():
        labels = ", ".join(cfg.label for cfg in expand_preset(name))
        print(f"{name}: {labels}")
    return 0


def _cmd_show(args) -> int:
    for cfg in expand_preset(args.preset):
        print(f"# {cfg.label}")
        print(serialize_config(cfg))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="marl-lab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment config or figure preset")
    run_p.add_argument("--config", help="path to a config file")
    run_p.add_argument("--preset", help="figure preset name (see `marl-lab presets`)")
    run_p.add_argument("--seed", type=int, default=None, help="override the config seed")
    run_p.add_argument("--out", default=".", help="output directory (default: current)")
    run_p.add_argument("--format", choices=("csv", "json"), default="csv")
    run_p.add_argument("--plot", dest="plot", action="store_true", default=True,
                       help="render PNG figures next to the datasets (default)")
    run_p.add_argument("--no-plot", dest="plot", action="store_false")
    run_p.set_defaults(func=_cmd_run)

    val_p = sub.add_parser("validate", help="run the built-in correctness oracles")
    val_p.set_defaults(func=_cmd_validate)

    pre_p = sub.add_parser("presets", help="list figure presets")
    pre_p.set_defaults(func=_cmd_presets)

    show_p = sub.add_parser("show", help="print the expanded config of a preset")
    show_p.add_argument("preset")
    show_p.set_defaults(func=_cmd_show)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
