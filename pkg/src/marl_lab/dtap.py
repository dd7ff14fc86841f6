"""Distributed task allocation on a grid of learning agents.

Integer-tick discrete-event simulation.  Tasks arrive at source agents; on
receiving a task request an agent immediately either queues it for local
execution (FIFO, unbounded, exponential service rounded up to whole ticks)
or forwards it to a neighbor.  Messages between adjacent agents take a
fixed delay.  When a task finishes, completion feedback flows back along
the chain of forwarding agents, one UPDATE message per hop; every agent
involved learns from the elapsed time attributable to its own decision:

  execute locally  cost = queue wait + service time
  forward to j     cost = one-way link delay + the R reported by j

Rewards are the negated costs, fed to the same learner stack the matrix
game arena uses (value update, bandit gradient, policy step), with action
set {execute-local} + neighbors.  Agents never observe queue states or
other agents' policies; the reward is the only feedback.

Per tick the order is: deliver due messages (UPDATE deliveries trigger
learning and backward relays), draw arrivals, decide on every request that
arrived this tick, then advance service (completions trigger local
learning, updates, and the next queued task).  The event loop is
single-threaded and, for a fixed seed, bit-deterministic: message and
completion heaps break ties by sequence number, and all random draws come
from chunked generator streams consumed in event order.
"""

from __future__ import annotations

import heapq
import math
from array import array
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .learners import learn_bandit, make_learner, sample_action

_REQUEST = 0
_UPDATE = 1

_CHUNK = 1 << 15


@dataclass(frozen=True)
class DtapConfig:
    """Scenario parameters; the defaults reproduce the 10x10 benchmark
    (central 4x4 sources at 0.5 tasks/tick each, service rate 0.1,
    value-learning-rate 1, policy-learning-rate 1e-4)."""

    width: int = 10
    height: int = 10
    adjacent_delay: int = 2
    service_rate: float = 0.1
    sources: tuple[tuple[int, int], ...] | None = None  # None -> centered 4x4 block
    arrival_rate: float = 0.5
    algo: str = "wpl"
    eta: float = 1e-4
    alpha: float = 1.0
    eps: float = 0.05
    horizon: int = 200_000
    tau: int = 500
    seed: int = 0

    def validate(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError("grid dimensions must be >= 1")
        if self.adjacent_delay < 1:
            raise ValueError("adjacent delay must be >= 1 tick")
        if self.service_rate <= 0.0:
            raise ValueError("service rate must be positive")
        if self.arrival_rate < 0.0:
            raise ValueError("arrival rate cannot be negative")
        if self.horizon < 0 or self.tau < 1:
            raise ValueError("horizon must be >= 0 and tau >= 1")
        for x, y in self.source_cells():
            if not (0 <= x < self.width and 0 <= y < self.height):
                raise ValueError(f"source ({x},{y}) outside the grid")

    def source_cells(self) -> list[tuple[int, int]]:
        if self.sources is not None:
            return [(int(x), int(y)) for x, y in self.sources]
        side_x = min(4, self.width)
        side_y = min(4, self.height)
        x0 = (self.width - side_x) // 2
        y0 = (self.height - side_y) // 2
        return [(x, y) for x in range(x0, x0 + side_x) for y in range(y0, y0 + side_y)]


class Task:
    """A task and its forwarding history.

    agents[k] received the request at receipts[k] and chose actions[k]
    (0 = execute locally, otherwise a forward).  The executing agent is the
    last entry."""

    __slots__ = ("tid", "birth", "agents", "receipts", "actions", "enqueue", "start", "end")

    def __init__(self, tid: int, birth: int, agent: int):
        self.tid = tid
        self.birth = birth
        self.agents = [agent]
        self.receipts = [birth]
        self.actions: list[int] = []
        self.enqueue = -1
        self.start = -1
        self.end = -1

    @property
    def hops(self) -> int:
        return len(self.agents) - 1


class AgentNode:
    """One grid cell: FIFO task queue, learner over {local} + neighbors."""

    __slots__ = ("idx", "x", "y", "neighbors", "delays", "state", "queue", "busy", "service_end")

    def __init__(self, idx, x, y):
        self.idx = idx
        self.x = x
        self.y = y
        self.neighbors: list[int] = []
        self.delays: list[int] = []
        self.state = None
        self.queue: deque[Task] = deque()
        self.busy: Task | None = None
        self.service_end = -1


class DtapWorld:
    """Mutable simulation state; advance with step(world)."""

    def __init__(self, config: DtapConfig):
        config.validate()
        self.config = config
        self.clock = -1  # step() first advances to tick 0
        self.agents: list[AgentNode] = []
        self.sources: list[int] = []
        self.msg_heap: list = []
        self.done_heap: list = []
        self._seq = 0
        self.generated = 0
        self.completed = 0
        self.completion_ticks = array("q")
        self.completion_tst = array("q")
        self.completion_hops = array("q")
        self.max_hops = 0
        self.keep_tasks = False
        self.finished_tasks: list[Task] = []

        root = np.random.SeedSequence(config.seed)
        sq_arrival, sq_service, sq_policy = root.spawn(3)
        self._rng_service = np.random.default_rng(sq_service)
        self._rng_policy = np.random.default_rng(sq_policy)
        self._service_chunk: list[float] = []
        self._uniform_chunk: list[float] = []
        self._arrivals = np.random.default_rng(sq_arrival)
        self._arrival_buf = np.empty(0, dtype=np.int64)
        self._arrival_pos = 0

        w, h = config.width, config.height
        for y in range(h):
            for x in range(w):
                self.agents.append(AgentNode(y * w + x, x, y))
        self._link: dict[tuple[int, int], int] = {}
        for ag in self.agents:
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                nx, ny = ag.x + dx, ag.y + dy
                if 0 <= nx < w and 0 <= ny < h:
                    other = ny * w + nx
                    ag.neighbors.append(other)
                    d = self.delay(ag.idx, other)
                    ag.delays.append(d)
                    self._link[(ag.idx, other)] = d
            ag.state = make_learner(
                config.algo,
                1 + len(ag.neighbors),
                eta=config.eta,
                alpha=config.alpha,
                eps=config.eps,
            )
        self.sources = [cy * w + cx for cx, cy in config.source_cells()]
        self._tick_counter = 0

    def delay(self, i: int, j: int) -> int:
        """Message delay in ticks: adjacent_delay per unit of Euclidean
        distance (exactly adjacent_delay between grid neighbors)."""
        a, b = self.agents[i], self.agents[j]
        dist = math.hypot(a.x - b.x, a.y - b.y)
        return max(1, round(self.config.adjacent_delay * dist))

    @property
    def in_flight(self) -> int:
        return self.generated - self.completed

    # -- internal draws -------------------------------------------------------

    def _service_ticks(self) -> int:
        chunk = self._service_chunk
        if not chunk:
            scale = 1.0 / self.config.service_rate
            chunk.extend(self._rng_service.exponential(scale, _CHUNK).tolist())
            chunk.reverse()
        return max(1, math.ceil(chunk.pop()))

    def _uniform(self) -> float:
        chunk = self._uniform_chunk
        if not chunk:
            chunk.extend(self._rng_policy.random(_CHUNK).tolist())
            chunk.reverse()
        return chunk.pop()

    def _arrival_counts(self):
        if self._arrival_pos >= len(self._arrival_buf):
            n = len(self.sources)
            self._arrival_buf = self._arrivals.poisson(self.config.arrival_rate, _CHUNK * max(1, n)).reshape(-1)
            self._arrival_pos = 0
        n = len(self.sources)
        row = self._arrival_buf[self._arrival_pos : self._arrival_pos + n]
        self._arrival_pos += n
        return row.tolist()


def build_grid(width: int, height: int, adjacent_delay: int, **overrides) -> DtapWorld:
    """Construct a fresh world for a width x height grid; remaining scenario
    keys (rates, learner, seed, ...) are DtapConfig fields."""
    return DtapWorld(DtapConfig(width=width, height=height, adjacent_delay=adjacent_delay, **overrides))


def _complete(world: DtapWorld, agent: AgentNode, task: Task, now: int) -> None:
    task.end = now
    tst = now - task.birth
    world.completed += 1
    world.completion_ticks.append(now)
    world.completion_tst.append(tst)
    world.completion_hops.append(task.hops)
    if task.hops > world.max_hops:
        world.max_hops = task.hops
    if world.keep_tasks:
        world.finished_tasks.append(task)
    # the executing agent learns from its own elapsed time
    cost = now - task.receipts[-1]
    learn_bandit(agent.state, 0, -float(cost))
    if len(task.agents) > 1:
        hop = len(task.agents) - 2
        link = world._link[(task.agents[hop], task.agents[hop + 1])]
        world._seq += 1
        heapq.heappush(world.msg_heap, (now + link, world._seq, _UPDATE, hop, cost, task, now))


def _start_service(world: DtapWorld, agent: AgentNode, now: int) -> None:
    while agent.busy is None and agent.queue:
        task = agent.queue.popleft()
        task.start = now
        agent.busy = task
        agent.service_end = now + world._service_ticks()
        world._seq += 1
        heapq.heappush(world.done_heap, (agent.service_end, world._seq, agent.idx))
        return


def _decide(world: DtapWorld, agent: AgentNode, task: Task, now: int, kicks: set) -> None:
    action = sample_action(agent.state.policy, world._uniform())
    task.actions.append(action)
    if action == 0:
        task.enqueue = now
        agent.queue.append(task)
        if agent.busy is None:
            kicks.add(agent.idx)
    else:
        target = agent.neighbors[action - 1]
        world._seq += 1
        heapq.heappush(world.msg_heap, (now + agent.delays[action - 1], world._seq, _REQUEST, target, 0, task, now))


def step(world: DtapWorld) -> DtapWorld:
    """Advance the world by one tick."""
    now = world.clock + 1
    world.clock = now
    agents = world.agents
    decisions: list[tuple[AgentNode, Task]] = []
    kicks: set[int] = set()

    # 1. deliver messages due now
    heap = world.msg_heap
    link_of = world._link
    while heap and heap[0][0] == now:
        _, _, kind, key, cost, task, _sent = heapq.heappop(heap)
        if kind == _REQUEST:
            task.agents.append(key)
            task.receipts.append(now)
            decisions.append((agents[key], task))
        else:
            # key = hop index of the receiving (forwarding) agent
            chain = task.agents
            my_cost = link_of[(chain[key], chain[key + 1])] + cost
            learn_bandit(agents[chain[key]].state, task.actions[key], -float(my_cost))
            if key > 0:
                world._seq += 1
                heapq.heappush(
                    heap,
                    (now + link_of[(chain[key - 1], chain[key])], world._seq, _UPDATE, key - 1, my_cost, task, now),
                )

    # 2. new arrivals
    if world.sources and world.config.arrival_rate > 0.0:
        for src, count in zip(world.sources, world._arrival_counts()):
            for _ in range(count):
                world.generated += 1
                task = Task(world.generated, now, src)
                decisions.append((agents[src], task))

    # 3. decisions on everything received this tick
    for agent, task in decisions:
        _decide(world, agent, task, now, kicks)

    # 4. service: completions free their agent, then idle agents start work
    done = world.done_heap
    while done and done[0][0] == now:
        _, _, idx = heapq.heappop(done)
        agent = agents[idx]
        task = agent.busy
        agent.busy = None
        _complete(world, agent, task, now)
        _start_service(world, agent, now)
    for idx in kicks:
        agent = agents[idx]
        if agent.busy is None:
            _start_service(world, agent, now)
    return world


def atst(world: DtapWorld, window_end: int, tau: int | None = None) -> float | None:
    """Mean total service time over tasks completed in (window_end - tau,
    window_end]; None when no task completed in the window."""
    if window_end > world.clock:
        raise ValueError(f"window end {window_end} is in the future (clock {world.clock})")
    tau = world.config.tau if tau is None else tau
    lo, hi = window_end - tau, window_end
    total = 0
    count = 0
    for tick, tst in zip(world.completion_ticks, world.completion_tst):
        if lo < tick <= hi:
            total += tst
            count += 1
    if count == 0:
        return None
    return total / count


@dataclass(frozen=True)
class WindowStat:
    window_end: int
    atst: float | None
    completed: int
    max_hops: int


@dataclass
class DtapResult:
    config: DtapConfig
    windows: list[WindowStat]
    generated: int
    completed: int
    max_hops: int

    def steady_atst(self, fraction: float = 0.2) -> float:
        """Mean windowed ATST over the trailing `fraction` of windows."""
        vals = [w.atst for w in self.windows if w.atst is not None]
        if not vals:
            return math.nan
        k = max(1, int(len(vals) * fraction))
        return sum(vals[-k:]) / k


def audit_world(world: DtapWorld) -> list[str]:
    """Consistency checks over the live world; returns human-readable
    violations (empty list = clean).

    Verifies task conservation (generated = completed + queued + in service
    + request messages in flight), exact message timing, learner policy
    validity, and, when task records are kept, FIFO service order and the
    per-task time decomposition routing + queue wait + service = total.
    """
    from .learners import policy_is_valid

    problems = []
    queued = sum(len(ag.queue) for ag in world.agents)
    busy = sum(1 for ag in world.agents if ag.busy is not None)
    in_transit = sum(1 for msg in world.msg_heap if msg[2] == _REQUEST)
    if world.generated != world.completed + queued + busy + in_transit:
        problems.append(
            f"conservation: generated {world.generated} != completed {world.completed}"
            f" + queued {queued} + busy {busy} + transit {in_transit}"
        )
    for msg in world.msg_heap:
        delivery, _, kind, key, _, task, sent = msg
        if kind == _REQUEST:
            sender = task.agents[-1]
            receiver = key
        else:
            sender = task.agents[key + 1]
            receiver = task.agents[key]
        want = world._link[(sender, receiver)] if sender != receiver else 0
        if delivery - sent != want:
            problems.append(f"message timing: delivery {delivery} - sent {sent} != delay {want}")
    for ag in world.agents:
        if not policy_is_valid(ag.state.policy, ag.state.eps):
            problems.append(f"agent {ag.idx} policy invalid: {ag.state.policy}")
    if world.keep_tasks:
        per_agent: dict[int, list[tuple[int, int]]] = {}
        for task in world.finished_tasks:
            routing = task.receipts[-1] - task.birth
            wait = task.start - task.enqueue
            service = task.end - task.start
            if routing + wait + service != task.end - task.birth:
                problems.append(f"task {task.tid}: decomposition {routing}+{wait}+{service}"
                                f" != TST {task.end - task.birth}")
            per_agent.setdefault(task.agents[-1], []).append((task.start, task.enqueue))
        for idx, entries in per_agent.items():
            entries.sort()
            enqueues = [e for _, e in entries]
            if enqueues != sorted(enqueues):
                problems.append(f"agent {idx}: service order violates FIFO")
    return problems


def run_experiment(config: DtapConfig, world: DtapWorld | None = None) -> DtapResult:
    """Run the scenario for config.horizon ticks, reporting one ATST row per
    tau-tick window.  Deterministic for a fixed config (seed included)."""
    if world is None:
        world = DtapWorld(config)
    tau = config.tau
    windows: list[WindowStat] = []
    pos = 0  # completions already summarized
    for tick in range(config.horizon):
        step(world)
        if (tick + 1) % tau == 0:
            ticks = world.completion_tst
            hops = world.completion_hops
            n = len(ticks)
            count = n - pos
            if count > 0:
                total = sum(ticks[pos:n])
                hops_max = max(hops[pos:n])
                windows.append(WindowStat(world.clock, total / count, count, hops_max))
            else:
                windows.append(WindowStat(world.clock, None, 0, 0))
            pos = n
    return DtapResult(config, windows, world.generated, world.completed, world.max_hops)
