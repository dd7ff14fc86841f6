"""marl_lab: gradient-ascent multiagent learning on matrix games, the ODE
dynamics of those learners, and a distributed task-allocation simulator."""

from .games import (
    BENCHMARK_NAMES,
    Game,
    GradientConstants,
    NashPoint,
    benchmark,
    catalog_nash,
    expected_value,
    gradient_2x2,
    gradient_constants,
    load_game,
    nash_2x2,
)
from .learners import (
    ALGORITHMS,
    LearnerState,
    ValueEstimate,
    estimate_gradient,
    exact_gradient,
    make_learner,
    project,
    step_policy,
    update_value,
)

__version__ = "0.1.0"
