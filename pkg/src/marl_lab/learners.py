"""Policy learners: floored-simplex projection, value tracking, update rules.

Policies are plain lists of floats.  The action sets here are tiny (2-5
entries) and the update functions sit inside simulation hot loops, so the
arithmetic is written with scalar Python rather than numpy; the array-based
modules convert at their boundaries.

A valid policy with exploration floor eps satisfies sum(pi) == 1 and
eps <= pi(a) <= 1 - eps*(k-1) for every action.  All update rules finish by
projecting onto that set, so the invariant holds after every step.

Update rules:

  wpl        d(a) = g(a) * eta * (pi(a) if g(a) < 0 else 1 - pi(a))
  iga/giga   d(a) = eta * g(a)
  giga-wolf  pi_hat = proj(pi + delta*g); z' = proj(pi + delta*g/3)
             pi   <- pi_hat + min(1, |z'-z|/|z'-pi_hat|) * (z' - pi_hat)
  phc-wolf   two fixed rates, lose when the current policy scores worse
             than the historical average policy under the value estimates
  iga-wolf   two fixed rate factors, lose when the reference (equilibrium)
             policy scores better than the current one
"""

from __future__ import annotations

from dataclasses import dataclass


class InfeasibleFloorError(ValueError):
    """Raised when eps_floor * num_actions exceeds 1."""


class ConfigurationError(ValueError):
    """Raised when a learner is missing state its update rule requires."""


ALGORITHMS = ("wpl", "iga", "giga", "giga-wolf", "phc-wolf", "iga-wolf", "static")


def project(x, eps_floor: float = 0.0) -> list[float]:
    """Euclidean projection of a vector onto the eps-floored probability simplex.

    Shifts by the floor, projects onto the simplex of mass 1 - k*eps with the
    sort-and-threshold rule, and shifts back.  Exact (up to rounding) and
    idempotent.
    """
    k = len(x)
    if eps_floor < 0.0:
        raise InfeasibleFloorError(f"negative exploration floor {eps_floor}")
    if eps_floor * k > 1.0 + 1e-12:
        raise InfeasibleFloorError(f"floor {eps_floor} infeasible for {k} actions")
    mass = 1.0 - eps_floor * k
    if mass <= 0.0:
        return [1.0 / k] * k
    # Common case: the uniform shift already clears the floor.
    shift = (sum(x) - 1.0) / k
    out = [xi - shift for xi in x]
    if min(out) >= eps_floor:
        return out
    y = [xi - eps_floor for xi in x]
    u = sorted(y, reverse=True)
    cum = 0.0
    theta = 0.0
    for j, uj in enumerate(u, start=1):
        cum += uj
        t = (cum - mass) / j
        if uj - t > 0.0:
            theta = t
    return [max(yi - theta, 0.0) + eps_floor for yi in y]


def policy_is_valid(pol, eps_floor: float = 0.0, tol: float = 1e-9) -> bool:
    k = len(pol)
    if abs(sum(pol) - 1.0) > tol:
        return False
    hi = 1.0 - eps_floor * (k - 1)
    return all(eps_floor - tol <= p <= hi + tol for p in pol)


def sample_action(policy, unit: float) -> int:
    """Map a uniform draw in [0, 1) to an action index under `policy`."""
    acc = 0.0
    last = len(policy) - 1
    for a, p in enumerate(policy):
        acc += p
        if unit < acc:
            return a
    return last


@dataclass
class ValueEstimate:
    """Per-action reward estimates tracked by exponential averaging."""

    r_hat: list[float]
    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"value-learning-rate must be in (0, 1], got {self.alpha}")
        self.r_hat = [float(v) for v in self.r_hat]


def update_value(estimate: ValueEstimate, action: int, sample_reward: float) -> ValueEstimate:
    """Fold one observed reward into the chosen action's estimate (in place)."""
    r = estimate.r_hat
    if not 0 <= action < len(r):
        raise IndexError(f"action {action} out of range for {len(r)} actions")
    a = estimate.alpha
    r[action] = a * sample_reward + (1.0 - a) * r[action]
    return estimate


@dataclass
class LearnerState:
    """Mutable per-agent learner: policy, value estimates, and rule-specific extras."""

    algo: str
    policy: list[float]
    values: ValueEstimate
    eta: float = 0.002
    eps: float = 0.1
    # giga-wolf
    z: list[float] | None = None
    delta: float | None = None
    # phc-wolf
    avg_policy: list[float] | None = None
    avg_count: int = 0
    delta_win: float | None = None
    delta_lose: float | None = None
    # iga-wolf
    pi_star: list[float] | None = None
    l_win: float = 1.0
    l_lose: float = 2.0

    @property
    def num_actions(self) -> int:
        return len(self.policy)


def make_learner(
    algo: str,
    n_actions: int,
    eta: float = 0.002,
    alpha: float = 0.1,
    eps: float = 0.1,
    policy=None,
    delta: float | None = None,
    delta_ratio: float = 2.0,
    l_win: float = 1.0,
    l_lose: float = 2.0,
    pi_star=None,
) -> LearnerState:
    """Build a LearnerState with the extras its algorithm needs.

    Defaults: uniform policy, zero value estimates, giga-wolf step size
    delta = eta, phc-wolf rates (eta, delta_ratio*eta).
    """
    if algo not in ALGORITHMS:
        raise ConfigurationError(f"unknown algorithm {algo!r}; known: {', '.join(ALGORITHMS)}")
    if policy is None:
        policy = [1.0 / n_actions] * n_actions
    policy = project([float(p) for p in policy], eps)
    state = LearnerState(
        algo=algo,
        policy=policy,
        values=ValueEstimate([0.0] * n_actions, alpha),
        eta=eta,
        eps=eps,
    )
    if algo == "giga-wolf":
        state.z = list(policy)
        state.delta = eta if delta is None else delta
    elif algo == "phc-wolf":
        state.avg_policy = [0.0] * n_actions
        state.avg_count = 0
        state.delta_win = eta
        state.delta_lose = delta_ratio * eta
        if not state.delta_lose > state.delta_win > 0.0:
            raise ConfigurationError("phc-wolf needs delta_lose > delta_win > 0")
    elif algo == "iga-wolf":
        state.pi_star = None if pi_star is None else [float(p) for p in pi_star]
        state.l_win = l_win
        state.l_lose = l_lose
        if not l_lose > l_win > 0.0:
            raise ConfigurationError("iga-wolf needs l_lose > l_win > 0")
    return state


def estimate_gradient(state: LearnerState) -> list[float]:
    """Bandit gradient estimate: each action's value estimate minus the
    policy-weighted baseline, g(a) = r_hat(a) - sum_b pi(b) r_hat(b)."""
    pol = state.policy
    r = state.values.r_hat
    base = 0.0
    for p, v in zip(pol, r):
        base += p * v
    return [v - base for v in r]


def exact_gradient(game, player: int, joint_policy) -> list[float]:
    """Oracle gradient from full knowledge of the game and opponents.

    Two-action players get the scalar closed form along the simplex tangent,
    g = (D, -D) with D = V(a1, opp) - V(a2, opp); larger action sets get the
    baseline-adjusted action values V(a, opp) - V(joint).  Both conventions
    share sign structure and zero set with the bandit estimate.
    """
    from . import games as _games

    vals = _games.action_values(game, player, joint_policy)
    if len(vals) == 2:
        d = float(vals[0] - vals[1])
        return [d, -d]
    pol = joint_policy[player]
    base = float(sum(p * v for p, v in zip(pol, vals)))
    return [float(v) - base for v in vals]


def wpl_step(state: LearnerState, gradient) -> LearnerState:
    """Gradient step with the boundary-damped weighting: negative-gradient
    components scale by pi(a), positive ones by 1 - pi(a)."""
    eta = state.eta
    state.policy = project(
        [p + g * eta * (p if g < 0.0 else 1.0 - p) for p, g in zip(state.policy, gradient)],
        state.eps,
    )
    return state


def iga_step(state: LearnerState, gradient) -> LearnerState:
    """Plain projected gradient ascent (IGA; with the general projection, GIGA)."""
    eta = state.eta
    state.policy = project([p + eta * g for p, g in zip(state.policy, gradient)], state.eps)
    return state


def giga_wolf_step(state: LearnerState, gradient) -> LearnerState:
    """Two-policy no-regret step: the slow policy z reins in the fast one.

    z advances from its own previous value at a third of the step size;
    that is what keeps it slow enough to act as the win/lose reference.
    """
    if state.z is None or state.delta is None:
        raise ConfigurationError("giga-wolf state missing z / delta")
    d = state.delta
    pol = state.policy
    pi_hat = project([p + d * g for p, g in zip(pol, gradient)], state.eps)
    z_new = project([z + d * g / 3.0 for z, g in zip(state.z, gradient)], state.eps)
    num = sum((a - b) ** 2 for a, b in zip(z_new, state.z)) ** 0.5
    den = sum((a - b) ** 2 for a, b in zip(z_new, pi_hat)) ** 0.5
    mix = 1.0 if den == 0.0 else min(1.0, num / den)
    state.policy = [h + mix * (zn - h) for h, zn in zip(pi_hat, z_new)]
    state.z = z_new
    return state


def phc_wolf_step(state: LearnerState, gradient) -> LearnerState:
    """WoLF policy hill climbing against the running-average policy.

    Hill climbing moves a fixed amount of probability toward the best-valued
    action (the gradient's argmax; the baseline shift cannot change it)
    rather than scaling by the gradient, so the step size never decays near
    indifference.  The win/lose test compares the current policy against the
    full-history average policy under the value estimates.
    """
    if state.avg_policy is None or state.delta_win is None:
        raise ConfigurationError("phc-wolf state missing average policy / rates")
    state.avg_count += 1
    c = state.avg_count
    avg = state.avg_policy
    pol = state.policy
    for i in range(len(pol)):
        avg[i] += (pol[i] - avg[i]) / c
    r = state.values.r_hat
    v_cur = sum(p * v for p, v in zip(pol, r))
    v_avg = sum(p * v for p, v in zip(avg, r))
    rate = state.delta_lose if v_cur < v_avg else state.delta_win
    best = max(range(len(gradient)), key=gradient.__getitem__)
    down = rate / (len(pol) - 1)
    state.policy = project(
        [p + (rate if i == best else -down) for i, p in enumerate(pol)],
        state.eps,
    )
    return state


def iga_wolf_step(state: LearnerState, gradient, oracle_ne=None) -> LearnerState:
    """WoLF gradient step against a supplied equilibrium reference policy.

    Losing means the reference policy would score better than the current
    one against the same opponents; with a value gradient g that comparison
    is the sign of dot(pi_star - pi, g).
    """
    star = state.pi_star if oracle_ne is None else oracle_ne
    if star is None:
        raise ConfigurationError("iga-wolf requires an oracle equilibrium policy")
    pol = state.policy
    margin = sum((s - p) * g for s, p, g in zip(star, pol, gradient))
    rate = state.l_lose if margin > 0.0 else state.l_win
    scale = state.eta * rate
    state.policy = project([p + scale * g for p, g in zip(pol, gradient)], state.eps)
    return state


def learn_bandit(state: LearnerState, action: int, reward: float) -> LearnerState:
    """One full bandit learning event: fold the reward into the value
    estimates, then take the algorithm's policy step on the estimate
    gradient.  Exactly equivalent to update_value + estimate_gradient +
    step_policy (same operations in the same order), fused for the
    simulation hot loops.
    """
    values = state.values
    r = values.r_hat
    if not 0 <= action < len(r):
        raise IndexError(f"action {action} out of range for {len(r)} actions")
    a = values.alpha
    r[action] = a * reward + (1.0 - a) * r[action]
    algo = state.algo
    if algo == "static":
        return state
    pol = state.policy
    base = 0.0
    for p, v in zip(pol, r):
        base += p * v
    if algo == "wpl":
        eta = state.eta
        state.policy = project(
            [p + (v - base) * eta * (p if v < base else 1.0 - p) for p, v in zip(pol, r)],
            state.eps,
        )
        return state
    if algo in ("iga", "giga"):
        eta = state.eta
        state.policy = project([p + eta * (v - base) for p, v in zip(pol, r)], state.eps)
        return state
    if algo == "giga-wolf":
        d = state.delta
        z = state.z
        eps = state.eps
        pi_hat = project([p + d * (v - base) for p, v in zip(pol, r)], eps)
        z_new = project([zz + d * (v - base) / 3.0 for zz, v in zip(z, r)], eps)
        num = sum((a - b) ** 2 for a, b in zip(z_new, z)) ** 0.5
        den = sum((a - b) ** 2 for a, b in zip(z_new, pi_hat)) ** 0.5
        mix = 1.0 if den == 0.0 else min(1.0, num / den)
        state.policy = [h + mix * (zn - h) for h, zn in zip(pi_hat, z_new)]
        state.z = z_new
        return state
    return step_policy(state, [v - base for v in r])


def step_policy(state: LearnerState, gradient, oracle_ne=None) -> LearnerState:
    """Dispatch one policy update by the state's algorithm tag."""
    algo = state.algo
    if algo == "wpl":
        return wpl_step(state, gradient)
    if algo in ("iga", "giga"):
        return iga_step(state, gradient)
    if algo == "giga-wolf":
        return giga_wolf_step(state, gradient)
    if algo == "phc-wolf":
        return phc_wolf_step(state, gradient)
    if algo == "iga-wolf":
        return iga_wolf_step(state, gradient, oracle_ne)
    if algo == "static":
        return state
    raise ConfigurationError(f"unknown algorithm {algo!r}")
