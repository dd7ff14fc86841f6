"""Built-in correctness oracles, runnable via `marl-lab validate`.

Each suite checks an implementation path against an independent method:

  projection   sort-and-threshold projection vs. brute-force nearest grid
               point on the floored simplex (hierarchical grid at 1e-4)
  gradients    oracle value gradients vs. central finite differences of the
               expected value along simplex tangent directions
  integrator   conservation of the quadratic invariant along unconstrained
               iga orbits, plus the step-halving order measurement
  dtap         discrete-event bookkeeping audit (task conservation, message
               timing, FIFO, time decomposition) on a small scenario
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dtap as dtap_mod
from . import dynamics, games, learners


@dataclass(frozen=True)
class OracleResult:
    name: str
    passed: bool
    detail: str


def grid_project(x, eps_floor: float, resolution: float = 1e-4):
    """Brute-force nearest valid policy on a grid of the given resolution.

    Supports 2- and 3-action inputs.  The 3-action search runs a coarse
    pass over the whole floored simplex and refines on a local window, so
    the returned point is a true grid optimum at `resolution`.
    """
    x = np.asarray(x, dtype=float)
    k = x.shape[0]
    if k == 2:
        lo, hi = eps_floor, 1.0 - eps_floor
        p = np.arange(lo, hi + resolution / 2, resolution)
        d = (p - x[0]) ** 2 + (1.0 - p - x[1]) ** 2
        best = p[int(np.argmin(d))]
        return np.array([best, 1.0 - best])
    if k != 3:
        raise ValueError("grid oracle implemented for 2 and 3 actions")

    def best_on(p1, p2):
        p1g, p2g = np.meshgrid(p1, p2, indexing="ij")
        p3g = 1.0 - p1g - p2g
        ok = p3g >= eps_floor - 1e-12
        d = (p1g - x[0]) ** 2 + (p2g - x[1]) ** 2 + (p3g - x[2]) ** 2
        d = np.where(ok, d, np.inf)
        i, j = np.unravel_index(int(np.argmin(d)), d.shape)
        return p1g[i, j], p2g[i, j]

    lo, hi = eps_floor, 1.0 - 2.0 * eps_floor
    coarse = 2e-3
    axis = np.arange(lo, hi + coarse / 2, coarse)
    c1, c2 = best_on(axis, axis)
    span = 3.0 * coarse
    fine1 = np.arange(max(lo, c1 - span), min(hi, c1 + span) + resolution / 2, resolution)
    fine2 = np.arange(max(lo, c2 - span), min(hi, c2 + span) + resolution / 2, resolution)
    b1, b2 = best_on(fine1, fine2)
    return np.array([b1, b2, 1.0 - b1 - b2])


def fd_tangent(game, player, joint_policy, a: int, b: int, h: float = 1e-6) -> float:
    """Central finite difference of the expected value along the tangent
    direction raising action a and lowering action b."""
    joint = [list(pol) for pol in joint_policy]
    plus = [list(pol) for pol in joint]
    minus = [list(pol) for pol in joint]
    plus[player][a] += h
    plus[player][b] -= h
    minus[player][a] -= h
    minus[player][b] += h
    return (games.expected_value(game, player, plus) - games.expected_value(game, player, minus)) / (2.0 * h)


def check_gradient_vs_fd(game, player, joint_policy, tol: float = 1e-6) -> float:
    """Worst absolute deviation between the oracle gradient and the finite
    differences that pin it down (see learners.exact_gradient for the two
    conventions)."""
    g = learners.exact_gradient(game, player, joint_policy)
    k = len(g)
    worst = 0.0
    if k == 2:
        fd = fd_tangent(game, player, joint_policy, 0, 1)
        worst = max(abs(g[0] - fd), abs(g[1] + fd))
    else:
        for a in range(k):
            for b in range(a + 1, k):
                fd = fd_tangent(game, player, joint_policy, a, b)
                worst = max(worst, abs((g[a] - g[b]) - fd))
        pol = joint_policy[player]
        worst = max(worst, abs(sum(p * v for p, v in zip(pol, g))))
    return worst


def projection_suite(trials: int = 300, seed: int = 0, resolution: float = 1e-4) -> OracleResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        k = int(rng.integers(2, 4))
        eps = float(rng.choice([0.0, 0.05, 0.1]))
        x = rng.uniform(-1.0, 2.0, k)
        mine = learners.project(x.tolist(), eps)
        ref = grid_project(x, eps, resolution)
        worst = max(worst, float(np.max(np.abs(np.asarray(mine) - ref))))
    passed = worst <= resolution + 1e-9
    return OracleResult("projection-grid-oracle", passed, f"worst deviation {worst:.2e} over {trials} trials")


def gradient_suite(trials_per_game: int = 20, seed: int = 1) -> OracleResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for name in games.BENCHMARK_NAMES:
        game = games.benchmark(name)
        for _ in range(trials_per_game):
            joint = []
            for k in game.actions_per_player:
                v = rng.uniform(0.05, 1.0, k)
                joint.append((v / v.sum()).tolist())
            for player in range(game.num_players):
                worst = max(worst, check_gradient_vs_fd(game, player, joint))
    return OracleResult("finite-difference-gradients", worst < 1e-6, f"worst deviation {worst:.2e}")


def integrator_suite() -> OracleResult:
    u = games.gradient_constants(games.benchmark("matching-pennies"))
    field = dynamics.make_field("iga", u)
    h0 = float(dynamics.iga_invariant(u, 0.2, 0.5))
    drifts = {}
    for dt in (2e-3, 1e-3):
        pts = dynamics.integrate(field, (0.2, 0.5), 1.6, dt=dt)
        _, p, q = dynamics.path_arrays(pts)
        drifts[dt] = abs(float(dynamics.iga_invariant(u, p[-1], q[-1])) - h0)
    ratio = drifts[2e-3] / drifts[1e-3] if drifts[1e-3] > 0 else float("inf")
    passed = drifts[1e-3] < 1e-6 and 8.0 <= ratio <= 32.0
    return OracleResult(
        "iga-invariant-conservation",
        passed,
        f"|dH| = {drifts[1e-3]:.2e} at dt=1e-3; halving ratio {ratio:.1f}",
    )


def dtap_suite() -> OracleResult:
    cfg = dtap_mod.DtapConfig(width=5, height=5, adjacent_delay=2, arrival_rate=0.3,
                              horizon=1500, tau=100, seed=12345)
    world = dtap_mod.DtapWorld(cfg)
    world.keep_tasks = True
    problems: list[str] = []
    for tick in range(cfg.horizon):
        dtap_mod.step(world)
        if (tick + 1) % 250 == 0:
            problems.extend(dtap_mod.audit_world(world))
    ok = not problems and world.completed > 0
    detail = f"{world.completed} tasks audited clean" if ok else "; ".join(problems[:3])
    return OracleResult("dtap-event-bookkeeping", ok, detail)


def run_all(fast: bool = False) -> list[OracleResult]:
    return [
        projection_suite(trials=120 if fast else 300),
        gradient_suite(trials_per_game=8 if fast else 20),
        integrator_suite(),
        dtap_suite(),
    ]
