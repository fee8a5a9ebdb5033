"""Capturability analysis of a linear inverted pendulum with swing-leg kernels."""

from .capturability import (
    CapturabilityResult,
    Regime,
    RobotSpec,
    SolverOptions,
    StepPlan,
    StepSequence,
    decision_boundary,
    disturbance_of_sequence,
    forward_check,
    max_disturbance,
    min_actuation,
    one_step_analytic,
    plan_steps,
    replay_plan,
    step_objective,
    unconstrained_optimum,
)
from .kernel import (
    CalibrationFit,
    DomainError,
    FitError,
    ReachExceededError,
    SwingKernel,
    calibrate,
    swing_sim,
)
from .lipm import (
    PendulumState,
    Trajectory,
    evolve_icp,
    icp,
    icp_2d,
    is_captured,
    simulate,
)

__version__ = "0.1.0"
