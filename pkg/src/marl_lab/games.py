"""Normal-form games: payoff tensors, benchmark catalog, values and equilibria.

A game is stored as a dense payoff tensor indexed by the joint action, with
one reward per player in the last axis.  Policies are plain probability
vectors (``list`` or 1-d array), one per player.

For 2-player-2-action games the value gradient of each player is affine in
the opponent's first-action probability; the four coefficients (u1..u4)
reduce the game to the constants used throughout the dynamics analysis:

    u1 = r11 - r12 - r21 + r22      u2 = r12 - r22      (row player)
    u3 = c11 - c12 - c21 + c22      u4 = c21 - c22      (column player)

so d(V_row)/dp = u1*q + u2 and d(V_col)/dq = u3*p + u4.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BENCHMARK_NAMES = (
    "coordination",
    "matching-pennies",
    "tricky",
    "rock-paper-scissors",
    "shapleys",
    "biased",
)


@dataclass(frozen=True)
class Game:
    """An n-player normal-form game with a complete payoff tensor.

    payoffs has shape actions_per_player + (num_players,): the entry
    payoffs[a1, ..., an, i] is player i's reward for that joint action.
    """

    actions_per_player: tuple[int, ...]
    payoffs: np.ndarray
    name: str = ""

    def __post_init__(self):
        payoffs = np.asarray(self.payoffs, dtype=float)
        object.__setattr__(self, "payoffs", payoffs)
        object.__setattr__(self, "actions_per_player", tuple(int(k) for k in self.actions_per_player))
        if self.num_players < 2:
            raise ValueError("a game needs at least two players")
        if any(k < 2 for k in self.actions_per_player):
            raise ValueError("every player needs at least two actions")
        expect = self.actions_per_player + (self.num_players,)
        if payoffs.shape != expect:
            raise ValueError(f"payoff tensor shape {payoffs.shape} != {expect}")
        if not np.all(np.isfinite(payoffs)):
            raise ValueError("payoff tensor has non-finite entries")
        payoffs.setflags(write=False)

    @property
    def num_players(self) -> int:
        return len(self.actions_per_player)

    def reward(self, joint_action) -> np.ndarray:
        """Reward vector (one entry per player) for a joint action."""
        return self.payoffs[tuple(joint_action)]


@dataclass(frozen=True)
class GradientConstants:
    u1: float
    u2: float
    u3: float
    u4: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.u1, self.u2, self.u3, self.u4)

    def mixed_point(self) -> tuple[float, float] | None:
        """Interior gradient-zero point (p*, q*) = (-u4/u3, -u2/u1), if defined."""
        if self.u1 == 0.0 or self.u3 == 0.0:
            return None
        return (-self.u4 / self.u3, -self.u2 / self.u1)


@dataclass(frozen=True)
class NashPoint:
    """A joint policy with the best-response property, tagged pure or mixed."""

    policies: tuple[tuple[float, ...], ...]
    kind: str  # "pure" | "mixed"

    def distance(self, joint_policy) -> float:
        """L-inf distance between this point and a joint policy."""
        return max(
            abs(float(p) - float(x))
            for mine, theirs in zip(self.policies, joint_policy)
            for p, x in zip(mine, theirs)
        )


def _game(name, rows, cols=None) -> Game:
    rows = np.asarray(rows, dtype=float)
    if cols is None:  # zero-sum
        cols = -rows
    else:
        cols = np.asarray(cols, dtype=float)
    return Game(rows.shape, np.stack([rows, cols], axis=-1), name=name)


def benchmark(name: str) -> Game:
    """Look up a catalog game by name (see BENCHMARK_NAMES)."""
    if name == "coordination":
        return _game(name, [[2, 0], [0, 1]], [[1, 0], [0, 2]])
    if name == "matching-pennies":
        return _game(name, [[1, -1], [-1, 1]])
    if name == "tricky":
        return _game(name, [[0, 3], [1, 2]], [[3, 2], [0, 1]])
    if name == "rock-paper-scissors":
        return _game(name, [[0, -1, 1], [1, 0, -1], [-1, 1, 0]])
    if name == "shapleys":
        return _game(
            name,
            [[0, 1, 0], [0, 0, 1], [1, 0, 0]],
            [[0, 0, 1], [1, 0, 0], [0, 1, 0]],
        )
    if name == "biased":
        return _game(name, [[1.0, 1.85], [1.15, 1.0]], [[1.85, 1.0], [1.0, 1.15]])
    raise KeyError(f"unknown benchmark game {name!r}; known: {', '.join(BENCHMARK_NAMES)}")


def _check_joint_policy(game: Game, joint_policy) -> list[np.ndarray]:
    if len(joint_policy) != game.num_players:
        raise ValueError(
            f"joint policy has {len(joint_policy)} players, game has {game.num_players}"
        )
    out = []
    for i, pol in enumerate(joint_policy):
        v = np.asarray(pol, dtype=float)
        if v.shape != (game.actions_per_player[i],):
            raise ValueError(
                f"player {i} policy has shape {v.shape}, expected ({game.actions_per_player[i]},)"
            )
        out.append(v)
    return out


def expected_value(game: Game, player: int, joint_policy) -> float:
    """Expected reward of `player` when everyone follows `joint_policy`."""
    pols = _check_joint_policy(game, joint_policy)
    acc = game.payoffs[..., player]
    for i in range(game.num_players - 1, -1, -1):
        acc = acc @ pols[i] if i == game.num_players - 1 else np.tensordot(acc, pols[i], axes=([i], [0]))
    return float(acc)


def action_values(game: Game, player: int, joint_policy) -> np.ndarray:
    """Expected reward of each of `player`'s pure actions against the others' policies."""
    pols = _check_joint_policy(game, joint_policy)
    acc = np.moveaxis(game.payoffs[..., player], player, 0)
    for i in range(game.num_players - 1, -1, -1):
        if i == player:
            continue
        axis = i + 1 if i < player else i
        acc = np.tensordot(acc, pols[i], axes=([axis], [0]))
    return acc


def _require_2x2(game: Game):
    if game.num_players != 2 or game.actions_per_player != (2, 2):
        raise ValueError(f"operation requires a 2-player 2-action game, got {game.actions_per_player}")


def gradient_constants(game: Game) -> GradientConstants:
    """The four affine-gradient constants of a 2x2 game."""
    _require_2x2(game)
    r = game.payoffs[..., 0]
    c = game.payoffs[..., 1]
    return GradientConstants(
        u1=float(r[0, 0] - r[0, 1] - r[1, 0] + r[1, 1]),
        u2=float(r[0, 1] - r[1, 1]),
        u3=float(c[0, 0] - c[0, 1] - c[1, 0] + c[1, 1]),
        u4=float(c[1, 0] - c[1, 1]),
    )


def gradient_2x2(game: Game, player: int, opponent_first_action_prob: float) -> float:
    """Value gradient of a 2x2 game player w.r.t. its own first-action probability.

    Equals V(first action, opp) - V(second action, opp): u1*q + u2 for the
    row player, u3*p + u4 for the column player.
    """
    _require_2x2(game)
    w = float(opponent_first_action_prob)
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"probability {w} outside [0, 1]")
    u = gradient_constants(game)
    if player == 0:
        return u.u1 * w + u.u2
    if player == 1:
        return u.u3 * w + u.u4
    raise ValueError(f"player must be 0 or 1, got {player}")


def best_response_gain(game: Game, point, grid: int = 101) -> float:
    """Largest value gain any single player gets from a grid of unilateral deviations.

    Because the value is linear in one player's policy, checking the pure
    deviations (which the grid includes) is exhaustive; a non-positive
    result certifies the Nash property.
    """
    gain = 0.0
    for i in range(game.num_players):
        base = expected_value(game, i, point)
        vals = action_values(game, i, point)
        k = game.actions_per_player[i]
        if k == 2:
            for step in range(grid):
                p = step / (grid - 1)
                gain = max(gain, p * vals[0] + (1 - p) * vals[1] - base)
        else:
            gain = max(gain, float(np.max(vals)) - base)
    return gain


def nash_2x2(game: Game) -> list[NashPoint]:
    """All pure NEs of a 2x2 game plus the interior mixed NE when one exists.

    Pure points come from cell enumeration.  The interior candidate
    (p*, q*) = (-u4/u3, -u2/u1) is returned only for games whose gradients
    have opposite orientation (u1*u3 < 0, the mixed-NE case); games with
    u1*u3 >= 0 are reported through their pure equilibria alone.
    """
    _require_2x2(game)
    r = game.payoffs[..., 0]
    c = game.payoffs[..., 1]
    out: list[NashPoint] = []
    tol = 1e-9
    for i in range(2):
        for j in range(2):
            if r[i, j] >= r[1 - i, j] - tol and c[i, j] >= c[i, 1 - j] - tol:
                pol_row = (1.0, 0.0) if i == 0 else (0.0, 1.0)
                pol_col = (1.0, 0.0) if j == 0 else (0.0, 1.0)
                out.append(NashPoint((pol_row, pol_col), "pure"))
    u = gradient_constants(game)
    if u.u1 * u.u3 < 0.0:
        p_star, q_star = u.mixed_point()
        if tol < p_star < 1.0 - tol and tol < q_star < 1.0 - tol:
            out.append(
                NashPoint(((p_star, 1.0 - p_star), (q_star, 1.0 - q_star)), "mixed")
            )
    return out


def catalog_nash(name: str) -> list[NashPoint]:
    """Known equilibria of the catalog games, used as measurement reference points.

    The two 3-action games carry their textbook uniform mixed NE; 2x2 games
    are solved by nash_2x2.
    """
    if name in ("rock-paper-scissors", "shapleys"):
        third = 1.0 / 3.0
        return [NashPoint(((third,) * 3, (third,) * 3), "mixed")]
    return nash_2x2(benchmark(name))


# --- game definition files -------------------------------------------------
#
# Plain text, one statement per line, '#' comments:
#   players 2
#   actions 2 2
#   payoff <a1> <a2> ... = <r1> <r2> ...


def parse_game_text(text: str, name: str = "") -> Game:
    players = None
    actions = None
    cells: dict[tuple[int, ...], list[float]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        try:
            if fields[0] == "players":
                players = int(fields[1])
            elif fields[0] == "actions":
                actions = tuple(int(x) for x in fields[1:])
            elif fields[0] == "payoff":
                eq = fields.index("=")
                joint = tuple(int(x) for x in fields[1:eq])
                rewards = [float(x) for x in fields[eq + 1 :]]
                cells[joint] = rewards
            else:
                raise ValueError(f"unknown keyword {fields[0]!r}")
        except (ValueError, IndexError) as exc:
            raise ValueError(f"line {lineno}: cannot parse {raw.strip()!r} ({exc})") from exc
    if players is None or actions is None:
        raise ValueError("game file must declare 'players' and 'actions'")
    if len(actions) != players:
        raise ValueError(f"'actions' lists {len(actions)} counts for {players} players")
    payoffs = np.full(actions + (players,), np.nan)
    for joint, rewards in cells.items():
        if len(joint) != players or len(rewards) != players:
            raise ValueError(f"payoff line for {joint} has wrong arity")
        payoffs[joint] = rewards
    if np.any(np.isnan(payoffs)):
        missing = int(np.isnan(payoffs[..., 0]).sum())
        raise ValueError(f"payoff tensor incomplete: {missing} joint actions missing")
    return Game(actions, payoffs, name=name)


def game_to_text(game: Game) -> str:
    lines = [f"players {game.num_players}", "actions " + " ".join(str(k) for k in game.actions_per_player)]
    for joint in np.ndindex(*game.actions_per_player):
        rewards = " ".join(f"{v:.9g}" for v in game.payoffs[joint])
        lines.append("payoff " + " ".join(str(a) for a in joint) + " = " + rewards)
    return "\n".join(lines) + "\n"


def load_game(path, name: str | None = None) -> Game:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_game_text(fh.read(), name=name if name is not None else str(path))
