"""Continuous-time policy dynamics of the 2x2-game learners.

With (p, q) the two players' first-action probabilities and u1..u4 the
game constants, the modeled vector fields are

  iga       p' = u1*q + u2                      q' = u3*p + u4
  iga-wolf  the iga field, each coordinate scaled by l_lose when that
            player currently scores worse than its equilibrium policy
            would (else l_win)
  wpl       p' = (u1*q + u2) * (1-p  if u1*q + u2 > 0  else p)
            and symmetrically for q'

Time is the rescaled clock of the learning process: one unit corresponds
to 1/eta simulation steps.

The integrator is fixed-step classical RK4.  The fields are piecewise
defined; whenever a branch-switching expression changes sign inside a
step, the crossing is located by bisection (to 1e-9 in time) and
integration restarts from just past the crossing, so no step straddles a
switching surface.  The wpl field is continuous across its surfaces (both
branches vanish there), which is what lets the batched grid integrator
skip event location without losing accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .games import Game, GradientConstants, gradient_constants

FIELD_KINDS = ("wpl", "iga", "iga-wolf")


class PhasePoint(NamedTuple):
    t: float
    p: float
    q: float


@dataclass(frozen=True)
class Field2x2:
    """A 2x2-game policy-dynamics vector field."""

    kind: str
    constants: GradientConstants
    ne: tuple[float, float] | None = None  # reference point, required for iga-wolf
    l_win: float = 1.0
    l_lose: float = 2.0

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}; known: {', '.join(FIELD_KINDS)}")
        if self.kind == "iga-wolf":
            if self.ne is None:
                raise ValueError("iga-wolf field requires the equilibrium point")
            if not all(0.0 <= v <= 1.0 for v in self.ne):
                raise ValueError(f"equilibrium {self.ne} outside [0,1]^2")
            if not self.l_lose > self.l_win > 0.0:
                raise ValueError("iga-wolf needs l_lose > l_win > 0")

    def mixed_point(self) -> tuple[float, float] | None:
        return self.constants.mixed_point()


def _coerce_constants(u) -> GradientConstants:
    if isinstance(u, GradientConstants):
        return u
    if isinstance(u, Game):
        return gradient_constants(u)
    u1, u2, u3, u4 = (float(v) for v in u)
    return GradientConstants(u1, u2, u3, u4)


def make_field(kind: str, u, ne=None, l_win: float = 1.0, l_lose: float = 2.0) -> Field2x2:
    """Build a field from a Game, GradientConstants, or a (u1,u2,u3,u4) tuple."""
    constants = _coerce_constants(u)
    if kind == "iga-wolf" and ne is None:
        ne = constants.mixed_point()
    return Field2x2(kind, constants, None if ne is None else (float(ne[0]), float(ne[1])),
                    l_win, l_lose)


def constants_for_ne(p_star: float, q_star: float, strength: float = 0.5) -> GradientConstants:
    """Constants of a mixed-NE game whose interior equilibrium is (p*, q*).

    u = (s, -s*q*, -s, s*p*); with s = 0.5 and NE (0.9, 0.9) this is the
    reference parameter set (0.5, -0.45, -0.5, 0.45).
    """
    s = float(strength)
    return GradientConstants(s, -s * q_star, -s, s * p_star)


def _deriv(field: Field2x2, p: float, q: float) -> tuple[float, float]:
    u = field.constants
    s1 = u.u1 * q + u.u2
    s2 = u.u3 * p + u.u4
    kind = field.kind
    if kind == "iga":
        return s1, s2
    if kind == "wpl":
        return (s1 * ((1.0 - p) if s1 > 0.0 else p),
                s2 * ((1.0 - q) if s2 > 0.0 else q))
    # iga-wolf: a player is losing when its value sits below the value its
    # equilibrium policy would earn now: sign((p - p*) * s1) < 0 for the row.
    p_star, q_star = field.ne
    rp = field.l_lose if (p - p_star) * s1 < 0.0 else field.l_win
    rq = field.l_lose if (q - q_star) * s2 < 0.0 else field.l_win
    return s1 * rp, s2 * rq


def field_eval(field: Field2x2, p: float, q: float) -> tuple[float, float]:
    """(dp/dt, dq/dt) at a joint policy; p and q must lie in [0, 1]."""
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ValueError(f"joint policy ({p}, {q}) outside [0,1]^2")
    return _deriv(field, p, q)


def _events(field: Field2x2, p: float, q: float) -> tuple[float, ...]:
    u = field.constants
    s1 = u.u1 * q + u.u2
    s2 = u.u3 * p + u.u4
    if field.kind == "iga-wolf":
        p_star, q_star = field.ne
        return (s1, s2, p - p_star, q - q_star)
    return (s1, s2)


def _rk4(field: Field2x2, p: float, q: float, h: float) -> tuple[float, float]:
    dp1, dq1 = _deriv(field, p, q)
    dp2, dq2 = _deriv(field, p + 0.5 * h * dp1, q + 0.5 * h * dq1)
    dp3, dq3 = _deriv(field, p + 0.5 * h * dp2, q + 0.5 * h * dq2)
    dp4, dq4 = _deriv(field, p + h * dp3, q + h * dq3)
    return (p + h / 6.0 * (dp1 + 2.0 * dp2 + 2.0 * dp3 + dp4),
            q + h / 6.0 * (dq1 + 2.0 * dq2 + 2.0 * dq3 + dq4))


_EVENT_TIME_TOL = 1e-9


def _integrate(field, p, q, horizon, dt, constrained, max_events=None):
    """Fixed-step RK4 with bisection event location at switching surfaces.

    Returns (points, crossings); crossings are (t, p, q, surface_index)
    tuples, recorded just past each located crossing.
    """
    clamp = constrained or field.kind == "wpl"
    t = 0.0
    points = [PhasePoint(t, p, q)]
    crossings: list[tuple[float, float, float, int]] = []
    end = horizon - 1e-12
    while t < end:
        h = min(dt, horizon - t)
        e0 = _events(field, p, q)
        p1, q1 = _rk4(field, p, q, h)
        e1 = _events(field, p1, q1)
        hit = None  # (theta_hi, surface)
        for i, (a, b) in enumerate(zip(e0, e1)):
            if a * b < 0.0:
                lo, hi = 0.0, 1.0
                while (hi - lo) * h > _EVENT_TIME_TOL:
                    mid = 0.5 * (lo + hi)
                    pm, qm = _rk4(field, p, q, mid * h)
                    if a * _events(field, pm, qm)[i] < 0.0:
                        hi = mid
                    else:
                        lo = mid
                if hit is None or hi < hit[0]:
                    hit = (hi, i)
        if hit is not None:
            theta, surf = hit
            p1, q1 = _rk4(field, p, q, theta * h)  # just past the crossing
            h = theta * h
            crossings.append((t + h, p1, q1, surf))
        if clamp:
            p1 = min(max(p1, 0.0), 1.0)
            q1 = min(max(q1, 0.0), 1.0)
        t += h
        p, q = p1, q1
        points.append(PhasePoint(t, p, q))
        if max_events is not None and len(crossings) >= max_events:
            break
    return points, crossings


def integrate(field: Field2x2, start, horizon: float, dt: float = 0.01,
              constrained: bool = False) -> list[PhasePoint]:
    """Integrate a field from a start point over [0, horizon].

    `constrained` clips each step to [0,1]^2 (the projected variant used in
    portrait comparisons); wpl trajectories are clipped regardless since the
    exact flow cannot leave the square.
    """
    if dt <= 0.0 or horizon <= 0.0:
        raise ValueError("dt and horizon must be positive")
    p0, q0 = (start.p, start.q) if isinstance(start, PhasePoint) else (float(start[0]), float(start[1]))
    points, _ = _integrate(field, p0, q0, horizon, dt, constrained)
    return points


def path_arrays(points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split a list of PhasePoints into (t, p, q) arrays."""
    arr = np.asarray(points, dtype=float)
    return arr[:, 0], arr[:, 1], arr[:, 2]


def iga_invariant(u, p, q):
    """Conserved quantity of the unconstrained iga flow:
    H = u3*p^2/2 + u4*p - u1*q^2/2 - u2*q."""
    c = _coerce_constants(u)
    return c.u3 * p * p / 2.0 + c.u4 * p - c.u1 * q * q / 2.0 - c.u2 * q


@dataclass(frozen=True)
class RevolutionRecord:
    """One full cycle around an interior equilibrium: the four crossing times
    of the lines p = p* and q = q*, and the policy extrema between them."""

    t1: float
    t2: float
    t3: float
    t4: float
    p_min1: float
    q_max: float
    p_max: float
    q_min: float
    p_min2: float


def revolution_analysis(field: Field2x2, start, horizon: float = 2000.0,
                        dt: float = 0.01) -> RevolutionRecord | None:
    """Track one revolution around the interior equilibrium.

    The start must sit on the q = q* line with p < p*.  Crossings of p = p*
    and q = q* then alternate; the four extrema are read off at the
    crossings (q is extremal where p = p*, p where q = q*).  Returns None
    when the field does not cycle (fewer than four crossings by `horizon`).
    """
    ne = field.mixed_point()
    if ne is None:
        raise ValueError("revolution analysis needs a field with an interior equilibrium")
    p_star, q_star = ne
    if not (0.0 < p_star < 1.0 and 0.0 < q_star < 1.0):
        raise ValueError(f"equilibrium {ne} is not interior")
    p0, q0 = (start.p, start.q) if isinstance(start, PhasePoint) else (float(start[0]), float(start[1]))
    if abs(q0 - q_star) > 1e-9:
        raise ValueError(f"start must lie on q = q* = {q_star}, got q = {q0}")
    if not p0 < p_star:
        raise ValueError(f"start needs p < p* = {p_star}, got p = {p0}")
    _, crossings = _integrate(field, p0, q_star, horizon, dt, constrained=False, max_events=4)
    # surfaces: 0 -> q = q* (p extremum), 1 -> p = p* (q extremum)
    if len(crossings) < 4:
        return None
    order = [surf for (_, _, _, surf) in crossings[:4]]
    if order != [1, 0, 1, 0]:
        return None
    (t1, _, qa, _), (t2, pa, _, _), (t3, _, qb, _), (t4, pb, _, _) = crossings[:4]
    return RevolutionRecord(
        t1=t1, t2=t2, t3=t3, t4=t4,
        p_min1=p0,
        q_max=max(qa, qb),
        p_max=pa,
        q_min=min(qa, qb),
        p_min2=pb,
    )


# --- grid experiment ---------------------------------------------------------


def boundary_starts(per_side: int) -> list[tuple[float, float]]:
    """Equally spaced joint policies around the boundary of [0,1]^2:
    `per_side` per edge including endpoints, corners deduplicated."""
    if per_side < 2:
        raise ValueError("need at least 2 points per side")
    ticks = [i / (per_side - 1) for i in range(per_side)]
    seen = set()
    out = []
    for tk in ticks:
        for pt in ((tk, 0.0), (tk, 1.0), (0.0, tk), (1.0, tk)):
            if pt not in seen:
                seen.add(pt)
                out.append(pt)
    return out


@dataclass(frozen=True)
class GridDispersion:
    """Late-window containment of the wpl flow around each grid equilibrium."""

    ne_points: list[tuple[float, float]]
    max_distance: np.ndarray  # per NE: max over starts and window samples
    num_starts: int
    horizon: float
    late_window: float

    @property
    def worst(self) -> float:
        return float(np.max(self.max_distance))


def _wpl_batch(u1, u2, u3, u4, p, q, horizon, dt, watch_from):
    """Vectorized RK4 for many wpl trajectories at once.

    The wpl field is continuous (both branches vanish on the switching
    surfaces), so skipping per-trajectory event location costs only a local
    drop in convergence order, far below the tolerances the grid experiment
    measures.  Returns max squared distance to (-u4/u3, -u2/u1) observed at
    sample times >= watch_from.
    """
    steps = int(round(horizon / dt))
    watch_step = int(round(watch_from / dt))
    ne_p = -u4 / u3
    ne_q = -u2 / u1
    worst2 = np.zeros_like(p)
    h2 = 0.5 * dt
    h6 = dt / 6.0

    def f(pp, qq):
        s1 = u1 * qq + u2
        s2 = u3 * pp + u4
        dp = s1 * np.where(s1 > 0.0, 1.0 - pp, pp)
        dq = s2 * np.where(s2 > 0.0, 1.0 - qq, qq)
        return dp, dq

    for step in range(steps):
        dp1, dq1 = f(p, q)
        dp2, dq2 = f(p + h2 * dp1, q + h2 * dq1)
        dp3, dq3 = f(p + h2 * dp2, q + h2 * dq2)
        dp4, dq4 = f(p + dt * dp3, q + dt * dq3)
        p += h6 * (dp1 + 2.0 * dp2 + 2.0 * dp3 + dp4)
        q += h6 * (dq1 + 2.0 * dq2 + 2.0 * dq3 + dq4)
        np.clip(p, 0.0, 1.0, out=p)
        np.clip(q, 0.0, 1.0, out=q)
        if step + 1 >= watch_step:
            d2 = (p - ne_p) ** 2 + (q - ne_q) ** 2
            np.maximum(worst2, d2, out=worst2)
    return worst2


def grid_experiment(num_ne_per_axis: int = 10, per_side_starts: int = 40,
                    horizon: float = 800.0, late_window: float = 100.0,
                    dt: float = 0.01, strength: float = 0.5) -> GridDispersion:
    """Late-window dispersion of the wpl flow over a grid of equilibria.

    For every equilibrium (p*, q*) on a num x num interior grid, a game with
    that NE is built via constants_for_ne and integrated from every boundary
    start; the result records, per NE, the largest Euclidean distance from
    the NE seen during [horizon - late_window, horizon].
    """
    if num_ne_per_axis < 1 or per_side_starts < 2:
        raise ValueError("grid sizes must be positive")
    if late_window > horizon:
        raise ValueError("late window cannot exceed the horizon")
    axis = [(i + 0.5) / num_ne_per_axis for i in range(num_ne_per_axis)]
    nes = [(ps, qs) for ps in axis for qs in axis]
    starts = boundary_starts(per_side_starts)
    n_start = len(starts)

    u1 = np.repeat([strength] * len(nes), n_start)
    u2 = np.repeat([-strength * qs for _, qs in nes], n_start)
    u3 = np.repeat([-strength] * len(nes), n_start)
    u4 = np.repeat([strength * ps for ps, _ in nes], n_start)
    p0 = np.tile(np.array([s[0] for s in starts]), len(nes))
    q0 = np.tile(np.array([s[1] for s in starts]), len(nes))

    if horizon == 0.0:
        ne_p = np.repeat([ps for ps, _ in nes], n_start)
        ne_q = np.repeat([qs for _, qs in nes], n_start)
        worst2 = (p0 - ne_p) ** 2 + (q0 - ne_q) ** 2
    else:
        worst2 = _wpl_batch(u1, u2, u3, u4, p0.copy(), q0.copy(),
                            horizon, dt, horizon - late_window)
    per_ne = np.sqrt(worst2.reshape(len(nes), n_start).max(axis=1))
    return GridDispersion(nes, per_ne, n_start, horizon, late_window)


# --- portrait comparison ------------------------------------------------------


def _reference_point(constants: GradientConstants, start: tuple[float, float]) -> tuple[float, float]:
    """Equilibrium handed to the iga-wolf field: the interior mixed point when
    the game has one, else the attracting corner nearest the start."""
    u = constants
    mixed = u.mixed_point()
    if u.u1 * u.u3 < 0.0 and mixed is not None:
        p_star, q_star = mixed
        if 0.0 < p_star < 1.0 and 0.0 < q_star < 1.0:
            return (p_star, q_star)
    best = None
    for cp in (0.0, 1.0):
        for cq in (0.0, 1.0):
            s1 = u.u1 * cq + u.u2
            s2 = u.u3 * cp + u.u4
            inward_p = s1 >= 0.0 if cp == 1.0 else s1 <= 0.0
            inward_q = s2 >= 0.0 if cq == 1.0 else s2 <= 0.0
            if inward_p and inward_q:
                d = (cp - start[0]) ** 2 + (cq - start[1]) ** 2
                if best is None or d < best[0]:
                    best = (d, (cp, cq))
    if best is None:
        raise ValueError("game has neither an interior equilibrium nor an attracting corner")
    return best[1]


def compare_portraits(u, start, horizon: float = 100.0, dt: float = 0.01,
                      l_win: float = 1.0, l_lose: float = 2.0) -> dict[str, list[PhasePoint]]:
    """Integrate iga, iga-wolf, and wpl from one start for side-by-side portraits.

    iga and iga-wolf run in the constrained variant (each step projected
    onto [0,1]^2); wpl needs no projection.  Accepts a Game, constants, or a
    u-tuple.
    """
    constants = _coerce_constants(u)
    p0, q0 = float(start[0]), float(start[1])
    ref = _reference_point(constants, (p0, q0))
    out: dict[str, list[PhasePoint]] = {}
    for kind in FIELD_KINDS:
        field = make_field(kind, constants, ne=ref if kind == "iga-wolf" else None,
                           l_win=l_win, l_lose=l_lose)
        out[kind] = integrate(field, (p0, q0), horizon, dt, constrained=kind != "wpl")
    return out
