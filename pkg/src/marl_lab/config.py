"""Experiment configuration: a small line-based text format.

One `key = value` statement per line, `#` starts a comment.  The `mode` key
selects the experiment family (arena | dynamics | dtap | sweep); the other
keys belong to that mode's section.  Example:

    mode = arena
    game = matching-pennies
    algos = wpl, wpl
    steps = 40000
    runs = 10
    init = 0.1 0.9 / 0.9 0.1
    seed = 7

Unset learning parameters fall back to the benchmark defaults eta=0.002,
alpha=0.1, epsilon=0.1.  Parsing reports syntax errors with their line
number and gathers all semantic problems into one ConfigError instead of
stopping at the first.
"""

from __future__ import annotations

from dataclasses import dataclass

from .arena import ArenaConfig, LearnerSpec
from .dtap import DtapConfig
from .games import BENCHMARK_NAMES, benchmark
from .learners import ALGORITHMS

MODES = ("arena", "dynamics", "dtap", "sweep")

DEFAULT_ETA = 0.002
DEFAULT_ALPHA = 0.1
DEFAULT_EPSILON = 0.1

DYNAMICS_KINDS = ("wpl", "iga", "iga-wolf", "compare", "grid")


class ConfigError(ValueError):
    """Carries every validation failure found in a config."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class ArenaSection:
    game: str = "matching-pennies"
    algos: tuple[str, ...] = ("wpl",)
    eta: float = DEFAULT_ETA
    alpha: float = DEFAULT_ALPHA
    epsilon: float = DEFAULT_EPSILON
    steps: int = 40_000
    runs: int = 10
    init: tuple[tuple[float, ...], ...] | None = None
    oracle: bool = False
    frozen: tuple[tuple[float, ...], ...] | None = None  # policies for static players
    sample_every: int = 1
    seed: int = 0


@dataclass(frozen=True)
class DynamicsSection:
    kind: str = "wpl"  # wpl | iga | iga-wolf | compare | grid
    game: str | None = None
    u: tuple[float, float, float, float] | None = None
    start: tuple[float, float] = (0.1, 0.1)
    starts: str = "point"  # point | boundary
    horizon: float = 800.0
    dt: float = 0.01
    sample_every: float = 0.0  # 0 -> every integrator step
    ne_grid: int = 10
    starts_per_side: int = 40
    late_window: float = 100.0
    l_win: float = 1.0
    l_lose: float = 2.0


@dataclass(frozen=True)
class SweepSection:
    presets: tuple[str, ...] = ()
    configs: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    arena: ArenaSection | None = None
    dynamics: DynamicsSection | None = None
    dtap: DtapConfig | None = None
    sweep: SweepSection | None = None
    label: str = "experiment"

    def section(self):
        return {"arena": self.arena, "dynamics": self.dynamics, "dtap": self.dtap, "sweep": self.sweep}[self.mode]


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _parse_policies(text: str) -> tuple[tuple[float, ...], ...]:
    return tuple(_parse_floats(part) for part in text.split("/"))


def _parse_names(text: str) -> tuple[str, ...]:
    return tuple(a.strip() for a in text.split(",") if a.strip())


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _statements(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError([f"line {lineno}: expected 'key = value', got {raw.strip()!r}"])
        key, value = line.split("=", 1)
        key = key.strip().lower()
        value = value.strip()
        if not key or not value:
            raise ConfigError([f"line {lineno}: empty key or value in {raw.strip()!r}"])
        if key in out:
            raise ConfigError([f"line {lineno}: duplicate key {key!r}"])
        out[key] = value
    return out


# file key -> (section field, converter)
_ARENA_KEYS = {
    "game": ("game", str),
    "algos": ("algos", _parse_names),
    "algo": ("algos", _parse_names),
    "eta": ("eta", float),
    "alpha": ("alpha", float),
    "epsilon": ("epsilon", float),
    "steps": ("steps", int),
    "runs": ("runs", int),
    "init": ("init", _parse_policies),
    "oracle": ("oracle", _parse_bool),
    "frozen": ("frozen", _parse_policies),
    "sample_every": ("sample_every", int),
    "seed": ("seed", int),
}

_DYNAMICS_KEYS = {
    "kind": ("kind", str),
    "algorithm": ("kind", str),
    "game": ("game", str),
    "u": ("u", _parse_floats),
    "start": ("start", _parse_floats),
    "starts": ("starts", str),
    "horizon": ("horizon", float),
    "dt": ("dt", float),
    "sample_every": ("sample_every", float),
    "ne_grid": ("ne_grid", int),
    "starts_per_side": ("starts_per_side", int),
    "late_window": ("late_window", float),
    "l_win": ("l_win", float),
    "l_lose": ("l_lose", float),
}

_DTAP_KEYS = {
    "width": ("width", int),
    "height": ("height", int),
    "delay": ("adjacent_delay", int),
    "service_rate": ("service_rate", float),
    "arrival_rate": ("arrival_rate", float),
    "sources": ("sources", str),
    "algo": ("algo", str),
    "eta": ("eta", float),
    "alpha": ("alpha", float),
    "epsilon": ("eps", float),
    "horizon": ("horizon", int),
    "tau": ("tau", int),
    "seed": ("seed", int),
}


def _convert(entries: dict[str, str], table, problems: list[str]) -> dict:
    out = {}
    for key, value in entries.items():
        if key not in table:
            problems.append(f"unknown key {key!r}")
            continue
        name, conv = table[key]
        try:
            out[name] = conv(value)
        except (TypeError, ValueError) as exc:
            problems.append(f"bad value for {key!r}: {value!r} ({exc})")
    return out


def parse_config(text: str, label: str = "experiment") -> ExperimentConfig:
    """Parse and fully validate a config; raises ConfigError listing every
    problem found."""
    entries = _statements(text)
    mode = entries.pop("mode", None)
    problems: list[str] = []
    if mode is None:
        raise ConfigError(["missing 'mode' (arena | dynamics | dtap | sweep)"])
    mode = mode.lower()
    if mode not in MODES:
        raise ConfigError([f"unknown mode {mode!r}; expected one of {', '.join(MODES)}"])

    if mode == "arena":
        sec = ArenaSection(**_convert(entries, _ARENA_KEYS, problems))
        if sec.game not in BENCHMARK_NAMES:
            problems.append(f"unknown game {sec.game!r}")
        for algo in sec.algos:
            if algo not in ALGORITHMS:
                problems.append(f"unknown algorithm {algo!r}")
        if sec.steps < 1:
            problems.append(f"steps must be >= 1, got {sec.steps}")
        if sec.runs < 1:
            problems.append(f"runs must be >= 1, got {sec.runs}")
        if not 0 < sec.alpha <= 1:
            problems.append(f"alpha must be in (0, 1], got {sec.alpha}")
        if sec.eta <= 0:
            problems.append(f"eta must be positive, got {sec.eta}")
        if sec.epsilon < 0:
            problems.append(f"epsilon must be >= 0, got {sec.epsilon}")
        if sec.sample_every < 1:
            problems.append(f"sample_every must be >= 1, got {sec.sample_every}")
        if sec.init is not None and any(abs(sum(p) - 1.0) > 1e-9 or min(p) < 0 for p in sec.init):
            problems.append("init policies must be probability vectors")
        cfg = ExperimentConfig(mode, arena=sec, label=label)
    elif mode == "dynamics":
        vals = _convert(entries, _DYNAMICS_KEYS, problems)
        if "u" in vals and len(vals["u"]) != 4:
            problems.append(f"u needs four constants, got {len(vals['u'])}")
            vals.pop("u")
        if "start" in vals and len(vals["start"]) != 2:
            problems.append("start needs two coordinates")
            vals.pop("start")
        sec = DynamicsSection(**vals)
        if sec.kind not in DYNAMICS_KINDS:
            problems.append(f"unknown dynamics kind {sec.kind!r}")
        if sec.game is not None and sec.game not in BENCHMARK_NAMES:
            problems.append(f"unknown game {sec.game!r}")
        if sec.game is None and sec.u is None and sec.kind != "grid":
            problems.append("dynamics needs either 'game' or 'u'")
        if sec.horizon <= 0 or sec.dt <= 0:
            problems.append("horizon and dt must be positive")
        if sec.kind == "grid" and (sec.ne_grid < 1 or sec.starts_per_side < 2 or sec.late_window > sec.horizon):
            problems.append("grid needs ne_grid >= 1, starts_per_side >= 2, late_window <= horizon")
        if not all(0.0 <= v <= 1.0 for v in sec.start):
            problems.append(f"start {sec.start} outside [0,1]^2")
        cfg = ExperimentConfig(mode, dynamics=sec, label=label)
    elif mode == "dtap":
        vals = _convert(entries, _DTAP_KEYS, problems)
        sources = vals.pop("sources", None)
        if sources is not None and sources.lower() not in ("center", "centre"):
            try:
                vals["sources"] = tuple(
                    tuple(int(c) for c in pair.split(",")) for pair in sources.split(";")
                )
            except ValueError:
                problems.append(f"bad sources {sources!r}; use 'center' or 'x,y;x,y;...'")
        sec = DtapConfig(**vals)
        try:
            sec.validate()
        except ValueError as exc:
            problems.append(str(exc))
        if sec.algo not in ALGORITHMS:
            problems.append(f"unknown algorithm {sec.algo!r}")
        cfg = ExperimentConfig(mode, dtap=sec, label=label)
    else:
        presets = _parse_names(entries.pop("presets", ""))
        configs = _parse_names(entries.pop("configs", ""))
        for key in entries:
            problems.append(f"unknown key {key!r}")
        if not presets and not configs:
            problems.append("sweep needs 'presets' and/or 'configs'")
        cfg = ExperimentConfig(mode, sweep=SweepSection(presets, configs), label=label)

    if problems:
        raise ConfigError(problems)
    return cfg


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def serialize_config(cfg: ExperimentConfig) -> str:
    """Render a config back to the text format; parse(serialize(c)) == c."""
    lines = [f"mode = {cfg.mode}"]
    if cfg.mode == "arena":
        sec = cfg.arena
        lines.append(f"game = {sec.game}")
        lines.append("algos = " + ", ".join(sec.algos))
        for key in ("eta", "alpha", "epsilon", "steps", "runs", "oracle", "sample_every", "seed"):
            lines.append(f"{key} = {_fmt(getattr(sec, key))}")
        if sec.init is not None:
            lines.append("init = " + " / ".join(" ".join(_fmt(v) for v in pol) for pol in sec.init))
        if sec.frozen is not None:
            lines.append("frozen = " + " / ".join(" ".join(_fmt(v) for v in pol) for pol in sec.frozen))
    elif cfg.mode == "dynamics":
        sec = cfg.dynamics
        lines.append(f"kind = {sec.kind}")
        if sec.game is not None:
            lines.append(f"game = {sec.game}")
        if sec.u is not None:
            lines.append("u = " + " ".join(_fmt(v) for v in sec.u))
        lines.append("start = " + " ".join(_fmt(v) for v in sec.start))
        for key in ("starts", "horizon", "dt", "sample_every", "ne_grid", "starts_per_side",
                    "late_window", "l_win", "l_lose"):
            lines.append(f"{key} = {_fmt(getattr(sec, key))}")
    elif cfg.mode == "dtap":
        sec = cfg.dtap
        lines.append(f"width = {sec.width}")
        lines.append(f"height = {sec.height}")
        lines.append(f"delay = {sec.adjacent_delay}")
        for key in ("service_rate", "arrival_rate", "algo", "eta", "alpha", "horizon", "tau", "seed"):
            lines.append(f"{key} = {_fmt(getattr(sec, key))}")
        lines.append(f"epsilon = {_fmt(sec.eps)}")
        if sec.sources is not None:
            lines.append("sources = " + ";".join(f"{x},{y}" for x, y in sec.sources))
    else:
        sec = cfg.sweep
        if sec.presets:
            lines.append("presets = " + ", ".join(sec.presets))
        if sec.configs:
            lines.append("configs = " + ", ".join(sec.configs))
    return "\n".join(lines) + "\n"


def arena_config(sec: ArenaSection) -> ArenaConfig:
    """Materialize an arena section into a runnable ArenaConfig."""
    game = benchmark(sec.game)
    n = game.num_players
    algos = sec.algos if len(sec.algos) > 1 else sec.algos * n
    if len(algos) != n:
        raise ConfigError([f"{len(algos)} algorithms for {n} players"])
    frozen = list(sec.frozen) if sec.frozen else []
    specs = []
    for algo in algos:
        if algo == "static":
            policy = tuple(frozen.pop(0)) if frozen else None
            specs.append(LearnerSpec(algo="static", eps=0.0, policy=policy))
        else:
            specs.append(
                LearnerSpec(algo=algo, eta=sec.eta, alpha=sec.alpha, eps=sec.epsilon, oracle=sec.oracle)
            )
    return ArenaConfig(game, tuple(specs), steps=sec.steps, runs=sec.runs, init=sec.init, seed=sec.seed)
