"""Ready-made experiment configurations for the benchmark figures.

Each preset expands to one or more labeled experiment configs with the
published parameters pre-filled; `marl-lab run --preset NAME` writes one
dataset (and figure) per label.  Labels double as output file stems.
"""

from __future__ import annotations

from .config import ArenaSection, DynamicsSection, ExperimentConfig
from .dtap import DtapConfig

_BENCH_INIT_2 = ((0.1, 0.9), (0.9, 0.1))
_BENCH_INIT_3 = ((0.1, 0.8, 0.1), (0.8, 0.1, 0.1))


def _arena(label, **kw) -> ExperimentConfig:
    return ExperimentConfig("arena", arena=ArenaSection(**kw), label=label)


def _dynamics(label, **kw) -> ExperimentConfig:
    return ExperimentConfig("dynamics", dynamics=DynamicsSection(**kw), label=label)


def _dtap(label, **kw) -> ExperimentConfig:
    return ExperimentConfig("dtap", dtap=DtapConfig(**kw), label=label)


def _benchmark_2x2(label, game, algo, **kw):
    args = dict(game=game, algos=(algo, algo), steps=40_000, runs=10,
                init=_BENCH_INIT_2, sample_every=10, seed=0)
    args.update(kw)
    return _arena(label, **args)


def _larger_game(label, game, algo, alpha):
    return _arena(label, game=game, algos=(algo, algo), eta=0.001, alpha=alpha,
                  steps=100_000, runs=3, init=_BENCH_INIT_3, sample_every=20, seed=0)


def _portraits(label, **kw):
    args = dict(kind="compare", horizon=120.0, dt=0.01, sample_every=0.05)
    args.update(kw)
    return _dynamics(label, **args)


def _catalog() -> dict[str, list[ExperimentConfig]]:
    mp_theory = _dynamics("fig4_wpl_theory_pennies", kind="wpl", game="matching-pennies",
                          start=(0.1, 0.9), horizon=40.0, sample_every=0.02)
    out: dict[str, list[ExperimentConfig]] = {
        "fig4": [mp_theory],
        "fig5": [_benchmark_2x2("fig5_wpl_pennies_eta001", "matching-pennies", "wpl", eta=0.001)],
        "fig6": [_dynamics("fig6_wpl_ne09_paths", kind="wpl", u=(0.5, -0.45, -0.5, 0.45),
                           starts="boundary", starts_per_side=40, horizon=800.0, sample_every=0.5)],
        "fig7": [_dynamics("fig7_wpl_ne09_timeseries", kind="wpl", u=(0.5, -0.45, -0.5, 0.45),
                           starts="boundary", starts_per_side=40, horizon=800.0, sample_every=0.5)],
        "fig8": [_dynamics("fig8_grid_dispersion", kind="grid", ne_grid=10, starts_per_side=40,
                           horizon=800.0, late_window=100.0)],
        "fig9": [_portraits("fig9_portraits_ne_center", u=(0.5, -0.25, -0.5, 0.25), start=(0.05, 0.15))],
        "fig10": [_portraits("fig10_portraits_ne_edge", u=(0.5, -0.05, -0.5, 0.25), start=(0.05, 0.5))],
        "fig11": [_portraits("fig11_portraits_coordination", game="coordination", start=(0.1, 0.6),
                             horizon=60.0)],
        "fig12a": [_arena("fig12a_wpl_coordination", game="coordination", algos=("wpl", "wpl"),
                          steps=20_000, runs=1, sample_every=5, seed=0)],
        "fig12b": [_benchmark_2x2("fig12b_wpl_pennies", "matching-pennies", "wpl")],
        "fig12c": [_benchmark_2x2("fig12c_wpl_tricky", "tricky", "wpl")],
        "fig13a": [_arena("fig13a_phcwolf_coordination", game="coordination",
                          algos=("phc-wolf", "phc-wolf"), steps=20_000, runs=1, sample_every=5, seed=0)],
        "fig13b": [_arena("fig13b_giga_coordination", game="coordination", algos=("giga", "giga"),
                          steps=20_000, runs=1, sample_every=5, seed=0)],
        "fig13c": [_arena("fig13c_gigawolf_coordination", game="coordination",
                          algos=("giga-wolf", "giga-wolf"), steps=20_000, runs=1, sample_every=5, seed=0)],
        "fig14a": [_benchmark_2x2("fig14a_phcwolf_pennies", "matching-pennies", "phc-wolf")],
        "fig14b": [_benchmark_2x2("fig14b_giga_pennies", "matching-pennies", "giga")],
        "fig14c": [_benchmark_2x2("fig14c_gigawolf_pennies", "matching-pennies", "giga-wolf")],
        "fig15a": [_benchmark_2x2("fig15a_phcwolf_tricky", "tricky", "phc-wolf")],
        "fig15b": [_benchmark_2x2("fig15b_giga_tricky", "tricky", "giga")],
        "fig15c": [_benchmark_2x2("fig15c_gigawolf_tricky", "tricky", "giga-wolf")],
        "fig16": [
            _larger_game("fig16_rps_gigawolf_a01", "rock-paper-scissors", "giga-wolf", 0.1),
            _larger_game("fig16_rps_gigawolf_a1", "rock-paper-scissors", "giga-wolf", 1.0),
            _larger_game("fig16_rps_wpl_a01", "rock-paper-scissors", "wpl", 0.1),
            _larger_game("fig16_rps_wpl_a1", "rock-paper-scissors", "wpl", 1.0),
        ],
        "fig17": [
            _larger_game("fig17_shapleys_gigawolf_a01", "shapleys", "giga-wolf", 0.1),
            _larger_game("fig17_shapleys_gigawolf_a1", "shapleys", "giga-wolf", 1.0),
            _larger_game("fig17_shapleys_wpl_a01", "shapleys", "wpl", 0.1),
            _larger_game("fig17_shapleys_wpl_a1", "shapleys", "wpl", 1.0),
        ],
        "fig18": [_arena("fig18_biased_wpl_a001", game="biased", algos=("wpl", "wpl"), alpha=0.01,
                         steps=200_000, runs=3, sample_every=50, seed=0)],
        "fig19": [_arena("fig19_biased_wpl_a1", game="biased", algos=("wpl", "wpl"), alpha=1.0,
                         steps=200_000, runs=3, sample_every=50, seed=0)],
        "fig21": [
            _dtap("fig21_dtap_wpl", algo="wpl"),
            _dtap("fig21_dtap_gigawolf", algo="giga-wolf"),
            _dtap("fig21_dtap_giga", algo="giga"),
        ],
    }
    return out


_PRESETS = _catalog()


def preset_names() -> list[str]:
    return sorted(_PRESETS)


def expand_preset(name: str) -> list[ExperimentConfig]:
    """The labeled experiment configs behind a figure preset."""
    if name not in _PRESETS:
        raise KeyError(f"unknown preset {name!r}; known: {', '.join(preset_names())}")
    return list(_PRESETS[name])
