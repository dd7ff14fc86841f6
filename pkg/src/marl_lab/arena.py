"""Repeated normal-form play between learning agents.

Every step is simultaneous: all players sample an action from their current
policy, the joint action is scored, and then every (non-static) player folds
its own reward into its value estimates and takes one policy step.  Players
see nothing but their own reward; in oracle mode a player instead receives
the exact value gradient computed from the game and the opponents' current
policies (used to tie the simulation to the theoretical dynamics).

Randomness: a root numpy SeedSequence on the config seed is spawned once
per run, and each run sequence is spawned once per player, i.e. player i of
run r draws from SeedSequence(seed).spawn(runs)[r].spawn(players)[i].
Identical configs therefore reproduce bit-identical trajectories, and adding
runs never perturbs existing ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .games import Game, NashPoint, nash_2x2
from .learners import (
    LearnerState,
    estimate_gradient,
    make_learner,
    policy_is_valid,
    sample_action,
    step_policy,
    update_value,
)

ORACLE_CAPABLE = ("wpl", "iga", "giga", "giga-wolf", "phc-wolf", "iga-wolf")


@dataclass(frozen=True)
class LearnerSpec:
    """Per-player learner configuration for an arena run."""

    algo: str = "wpl"
    eta: float = 0.002
    alpha: float = 0.1
    eps: float = 0.1
    oracle: bool = False
    policy: tuple[float, ...] | None = None
    delta: float | None = None
    delta_ratio: float = 2.0
    l_win: float = 1.0
    l_lose: float = 2.0
    pi_star: tuple[float, ...] | None = None


@dataclass(frozen=True)
class ArenaConfig:
    game: Game
    specs: tuple[LearnerSpec, ...]
    steps: int
    runs: int = 1
    init: tuple[tuple[float, ...], ...] | None = None
    seed: int = 0

    def validate(self) -> None:
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if len(self.specs) != self.game.num_players:
            raise ValueError(
                f"{len(self.specs)} learner specs for {self.game.num_players} players"
            )
        for i, pol in enumerate(self._initial_policies()):
            if pol is not None and not policy_is_valid(pol, 0.0):
                raise ValueError(f"initial policy for player {i} is not a distribution: {pol}")

    def _initial_policies(self):
        if self.init is not None:
            if len(self.init) != len(self.specs):
                raise ValueError("init must give one policy per player")
            return [tuple(float(v) for v in pol) for pol in self.init]
        return [spec.policy for spec in self.specs]


@dataclass
class Trajectory:
    """Step-indexed record of one run: pre-update policies, the actions
    sampled from them, and the rewards they earned."""

    policies: list[np.ndarray]  # per player: (steps, num_actions)
    actions: np.ndarray  # (steps, players) int
    rewards: np.ndarray  # (steps, players) float

    @property
    def steps(self) -> int:
        return self.actions.shape[0]


def _reference_policy(game: Game, player: int) -> tuple[float, ...]:
    """Equilibrium policy handed to iga-wolf players that did not get one:
    the interior mixed NE when the game has one, else a pure NE, else uniform."""
    if game.actions_per_player == (2, 2):
        points = nash_2x2(game)
        for pt in points:
            if pt.kind == "mixed":
                return pt.policies[player]
        if points:
            return points[0].policies[player]
    k = game.actions_per_player[player]
    return (1.0 / k,) * k


def _build_state(game: Game, player: int, spec: LearnerSpec, init) -> LearnerState:
    policy = init if init is not None else spec.policy
    pi_star = spec.pi_star
    if spec.algo == "iga-wolf" and pi_star is None:
        pi_star = _reference_policy(game, player)
    return make_learner(
        spec.algo,
        game.actions_per_player[player],
        eta=spec.eta,
        alpha=spec.alpha,
        eps=spec.eps,
        policy=policy,
        delta=spec.delta,
        delta_ratio=spec.delta_ratio,
        l_win=spec.l_win,
        l_lose=spec.l_lose,
        pi_star=pi_star,
    )


def _oracle_gradient(payoff_rows, player: int, pols) -> list[float]:
    """Exact 2-player value gradient from nested payoff lists; matches
    learners.exact_gradient's conventions (tangent slope for 2 actions,
    baseline-adjusted action values otherwise)."""
    if player == 0:
        opp = pols[1]
        vals = [sum(op * cell[0] for op, cell in zip(opp, row)) for row in payoff_rows]
        mine = pols[0]
    else:
        opp = pols[0]
        cols = len(pols[1])
        vals = [
            sum(op * payoff_rows[a][b][1] for a, op in enumerate(opp))
            for b in range(cols)
        ]
        mine = pols[1]
    if len(vals) == 2:
        d = vals[0] - vals[1]
        return [d, -d]
    base = sum(m * v for m, v in zip(mine, vals))
    return [v - base for v in vals]


def run(config: ArenaConfig) -> list[Trajectory]:
    """Play the configured repeated game; one Trajectory per run."""
    config.validate()
    game = config.game
    n = game.num_players
    if any(spec.oracle for spec in config.specs) and n != 2:
        raise ValueError("oracle gradients are implemented for 2-player games")
    steps = config.steps
    payoff_rows = game.payoffs.tolist()
    inits = config._initial_policies()
    root = np.random.SeedSequence(config.seed)
    out: list[Trajectory] = []
    for run_seq in root.spawn(config.runs):
        states = [_build_state(game, i, spec, inits[i]) for i, spec in enumerate(config.specs)]
        uniforms = [np.random.default_rng(sq).random(steps).tolist() for sq in run_seq.spawn(n)]
        pol_rec = [np.empty((steps, game.actions_per_player[i])) for i in range(n)]
        act_rec = np.empty((steps, n), dtype=np.int64)
        rew_rec = np.empty((steps, n))
        for t in range(steps):
            pols = [list(st.policy) for st in states]
            acts = [sample_action(pols[i], uniforms[i][t]) for i in range(n)]
            cell = payoff_rows[acts[0]][acts[1]] if n == 2 else game.reward(acts)
            for i in range(n):
                pol_rec[i][t] = pols[i]
                act_rec[t, i] = acts[i]
                rew_rec[t, i] = cell[i]
            for i, spec in enumerate(config.specs):
                if spec.algo == "static":
                    continue
                st = states[i]
                update_value(st.values, acts[i], cell[i])
                if spec.oracle:
                    grad = _oracle_gradient(payoff_rows, i, pols)
                else:
                    grad = estimate_gradient(st)
                step_policy(st, grad)
        out.append(Trajectory(pol_rec, act_rec, rew_rec))
    return out


@dataclass
class ConvergenceReport:
    """Across-run summary of equal-length trajectories.

    mean/std are per-step across runs (population convention).  The trailing
    window is the final 10% of steps: trailing_mean averages it across runs
    and steps, and trailing_amplitude is the max-min of each action
    probability of the across-run mean series over that window (the
    oscillation visible on the averaged learning curves).  per_run_amplitude
    keeps the across-run mean of each individual run's max-min as a
    phase-insensitive diagnostic.
    """

    mean: list[np.ndarray]  # per player: (steps, k)
    std: list[np.ndarray]
    trailing_mean: list[np.ndarray]  # per player: (k,)
    trailing_amplitude: list[np.ndarray]  # per player: (k,)
    per_run_amplitude: list[np.ndarray]  # per player: (k,)
    window: int
    runs: int
    nearest_ne_distance: float | None = None

    @property
    def max_amplitude(self) -> float:
        return float(max(np.max(a) for a in self.trailing_amplitude))

    def distance_to(self, point) -> float:
        """L-inf distance between the trailing mean and a joint policy."""
        pols = point.policies if isinstance(point, NashPoint) else point
        return max(
            float(np.max(np.abs(mine - np.asarray(theirs, dtype=float))))
            for mine, theirs in zip(self.trailing_mean, pols)
        )


def aggregate(trajectories, nash_points=None, window_frac: float = 0.1) -> ConvergenceReport:
    """Fold runs into a ConvergenceReport (see the report's docstring)."""
    if not trajectories:
        raise ValueError("need at least one trajectory")
    steps = trajectories[0].steps
    if any(tr.steps != steps for tr in trajectories):
        raise ValueError("trajectories must have equal length")
    n = len(trajectories[0].policies)
    window = max(1, int(steps * window_frac))
    mean, std, t_mean, t_amp, t_run_amp = [], [], [], [], []
    for i in range(n):
        stacked = np.stack([tr.policies[i] for tr in trajectories])  # (runs, steps, k)
        series = stacked.mean(axis=0)
        mean.append(series)
        std.append(stacked.std(axis=0))
        tail = stacked[:, steps - window :, :]
        t_mean.append(tail.mean(axis=(0, 1)))
        mean_tail = series[steps - window :, :]
        t_amp.append(mean_tail.max(axis=0) - mean_tail.min(axis=0))
        t_run_amp.append((tail.max(axis=1) - tail.min(axis=1)).mean(axis=0))
    report = ConvergenceReport(
        mean=mean,
        std=std,
        trailing_mean=t_mean,
        trailing_amplitude=t_amp,
        per_run_amplitude=t_run_amp,
        window=window,
        runs=len(trajectories),
    )
    if nash_points:
        report.nearest_ne_distance = min(report.distance_to(ne) for ne in nash_points)
    return report


def converged(report: ConvergenceReport, ne, tol: float) -> bool:
    """True when the trailing mean sits within L-inf `tol` of `ne` and the
    trailing amplitude stays below `tol`."""
    return report.distance_to(ne) <= tol and report.max_amplitude < tol
