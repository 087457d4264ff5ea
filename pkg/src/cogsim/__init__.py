"""Deterministic three-layer cognitive agent simulation engine."""

from .affect import (
    ActionTendency,
    AffectiveProcess,
    Appraisal,
    compute_force,
    prepare_action,
    run_affective_cycle,
)
from .agent import (
    ReactiveRule,
    SimulationState,
    deliberative_step,
    perceive,
    reactive_step,
    select_action,
    simulate_whatif,
    tick,
)
from .arguments import Argument, ArgumentTemplate, CaseReport, active_set, aggregate, build_case
from .metacog import (
    Commitment,
    CountermeasureSpec,
    Inconsistency,
    ReasoningTrace,
    TraceEvent,
    check_consistency,
    control,
    monitor,
    record,
)
from .planner import Plan, PredictedOutcome, plan_tidy_task
from .runner import RunConfig, RunResult, run_simulation
from .scenario import (
    AgentConfig,
    ScenarioSpec,
    ValidationReport,
    instantiate,
    load_bundled,
    parse_scenario,
    serialize_scenario,
    validate_scenario,
)
from .world import (
    GoalSpec,
    GoalStatus,
    ObjectState,
    WorldEvent,
    WorldState,
    apply_action,
    evaluate_goal,
    step_events,
)

__version__ = "0.1.0"

__all__ = [
    "ActionTendency",
    "AffectiveProcess",
    "AgentConfig",
    "Appraisal",
    "Argument",
    "ArgumentTemplate",
    "CaseReport",
    "Commitment",
    "CountermeasureSpec",
    "GoalSpec",
    "GoalStatus",
    "Inconsistency",
    "ObjectState",
    "Plan",
    "PredictedOutcome",
    "ReactiveRule",
    "ReasoningTrace",
    "RunConfig",
    "RunResult",
    "ScenarioSpec",
    "SimulationState",
    "TraceEvent",
    "ValidationReport",
    "WorldEvent",
    "WorldState",
    "active_set",
    "aggregate",
    "apply_action",
    "build_case",
    "check_consistency",
    "compute_force",
    "control",
    "deliberative_step",
    "evaluate_goal",
    "instantiate",
    "load_bundled",
    "monitor",
    "parse_scenario",
    "perceive",
    "plan_tidy_task",
    "prepare_action",
    "reactive_step",
    "record",
    "run_affective_cycle",
    "run_simulation",
    "select_action",
    "serialize_scenario",
    "simulate_whatif",
    "step_events",
    "tick",
    "validate_scenario",
]
