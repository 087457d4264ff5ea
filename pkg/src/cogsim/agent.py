"""Per-tick orchestration of the three-layer agent.

Stage order within one tick:

    scheduled events -> perception -> reactive rules -> plan following
    -> deliberation (periodic) -> monitoring + control -> deliberation
    (again, if control requested it) -> purge + force recomputation ->
    selection -> execution.

Events fire before perception so adversity is perceivable in the tick
it occurs; metacognition runs after deliberation so it can veto this
tick's biased tendencies before anything is executed; control may
request a same-tick second deliberation for replanning.  Exactly one
world action is applied per tick — an illegal or absent selection
degrades to idle and is traced, never raised.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from . import world as W
from .affect import (
    ActionTendency,
    AffectiveProcess,
    compute_force,
    run_affective_cycle,
    supporting_argument_ids,
)
from .arguments import Argument, active_set, build_case
from .errors import IllegalAction, NoTendency, RoutingViolation
from .metacog import Commitment, ReasoningTrace, control, monitor
from .planner import Plan, TaskPlanner, plan_tidy_task, simulate_whatif  # noqa: F401
from .rules import BeliefStore, RuleContext, eval_condition

if TYPE_CHECKING:  # pragma: no cover - typing only
    from .scenario import AgentConfig


@dataclass(frozen=True)
class ReactiveRule:
    """Fast rule over current percepts; no hypothetical states."""

    id: str
    when: dict
    action: str
    urgency: float
    label: str = ""


@dataclass
class SimulationState:
    """Complete state of one simulation instance."""

    world: W.WorldState
    beliefs: BeliefStore
    processes: list[AffectiveProcess]
    trace: ReasoningTrace
    config: "AgentConfig"
    goal: W.GoalSpec
    events: tuple[W.WorldEvent, ...]
    bct_profile: str = "prime"
    rng_seed: int = 0
    tendency_pool: list[ActionTendency] = field(default_factory=list)
    arguments: list[Argument] = field(default_factory=list)
    sticky_arguments: list[Argument] = field(default_factory=list)
    goal_variant: str = "strict"
    plan: Plan | None = None
    plan_cursor: int = 0
    monitor_cursor: tuple[int, int] = (-1, -1)
    pending_deliberation: bool = False
    metacognition_enabled: bool = True
    weight_overrides: dict[str, float] = field(default_factory=dict)
    countermeasures_fired: int = 0
    routing_violations: int = 0
    last_option_set: tuple = ()
    last_tick_stats: dict = field(default_factory=dict)
    _tendency_counter: int = 0

    # -- small helpers shared with the metacognition module ------------------

    def set_belief(self, atom: str, value) -> bool:
        changed = self.beliefs.set(atom, value, self.world.tick)
        if changed:
            self.trace.append(
                tick=self.world.tick,
                layer="world",
                kind="BeliefChange",
                payload={"atom": atom, "value": value},
            )
        return changed

    def upsert_argument(self, arg: Argument) -> None:
        self.sticky_arguments = [a for a in self.sticky_arguments if a.id != arg.id]
        self.sticky_arguments.append(arg)
        self.arguments = [a for a in self.arguments if a.id != arg.id]
        self.arguments.append(arg)

    def config_weight(self, template_id: str, default: float) -> float:
        return self.weight_overrides.get(template_id, default)

    def commitments(self) -> list[Commitment]:
        return list(self.config.commitments)

    def process_rank(self, process_id: str) -> int:
        for proc in self.processes:
            if proc.id == process_id:
                return proc.priority_rank
        return 10**6

    def os_process_id(self) -> str | None:
        designated = [p for p in self.processes if p.os_role]
        if designated:
            return designated[0].id
        if not self.processes:
            return None
        return max(self.processes, key=lambda p: p.priority_rank).id

    def task_process(self) -> AffectiveProcess | None:
        for proc in self.processes:
            if proc.goal_ref == "task":
                return proc
        return None

    def next_tendency_id(self) -> str:
        self._tendency_counter += 1
        return f"td{self._tendency_counter:05d}"


# -- pipeline stages ----------------------------------------------------------


def perceive(state: SimulationState) -> SimulationState:
    """Refresh beliefs from the world; every change is traced."""
    world = state.world
    snapshot: list[tuple[str, object]] = []
    for obj_id in sorted(world.objects):
        snapshot.append((f"location({obj_id})", world.objects[obj_id].location))
    for fixture in sorted(world.layout.fixtures, key=lambda f: f.id):
        snapshot.append((f"broken({fixture.id})", fixture.id in world.broken_fixtures))
    snapshot.append(("agent_pos", W.cell_loc(world.agent_pos)))
    snapshot.append(("holding", world.agent_holding))
    snapshot.append(("abandoned", world.abandoned))
    status = W.evaluate_goal(world, state.goal)
    snapshot.append(("misplaced_count", status.misplaced_count))
    snapshot.append(("strict_tidy", status.strict))
    snapshot.append(("relaxed_tidy", status.relaxed))
    snapshot.append(("goal_variant", state.goal_variant))
    for atom in sorted(world.facts):
        snapshot.append((atom, world.facts[atom]))
    for atom, value in snapshot:
        state.set_belief(atom, value)
    return state


def reactive_step(state: SimulationState) -> list[ActionTendency]:
    """Fire every reactive rule whose condition holds, in declaration
    order; runs every tick while the agent is engaged."""
    if state.world.abandoned:
        return []
    os_pid = state.os_process_id()
    if os_pid is None:
        return []
    ctx = RuleContext(
        beliefs=state.beliefs,
        appraisals=_all_appraisals(state),
        commitments=state.commitments(),
    )
    out: list[ActionTendency] = []
    for rule in state.config.reactive_rules:
        if not eval_condition(rule.when, ctx):
            continue
        out.append(
            ActionTendency(
                action=rule.action,
                source_process=os_pid,
                base_urgency=rule.urgency,
                created_tick=state.world.tick,
                label=rule.label or rule.id,
                origin="reactive",
            )
        )
    return out


def _all_appraisals(state: SimulationState) -> list:
    out = []
    for proc in state.processes:
        out.extend(proc.active_appraisals)
    return out


def _inject(state: SimulationState, tendency: ActionTendency) -> None:
    tendency.id = state.next_tendency_id()
    state.tendency_pool.append(tendency)
    layer = "reactive" if tendency.origin == "reactive" else "deliberative"
    state.trace.append(
        tick=state.world.tick,
        layer=layer,
        kind="TendencyInjected",
        payload={
            "tendency": tendency.id,
            "process": tendency.source_process,
            "action": tendency.action,
            "option": tendency.option,
            "label": tendency.label,
            "base_urgency": tendency.base_urgency,
        },
    )


def _drop_plan_tendencies(state: SimulationState) -> None:
    # Plan-step tendencies are refreshed, not accumulated: the current
    # intention supersedes the previous injection silently.
    state.tendency_pool = [t for t in state.tendency_pool if t.origin != "plan"]


def _inject_plan_step(state: SimulationState) -> None:
    if state.world.abandoned or state.plan is None:
        return
    if state.plan_cursor >= len(state.plan.steps):
        return
    task_proc = state.task_process()
    if task_proc is None:
        return
    _drop_plan_tendencies(state)
    _inject(
        state,
        ActionTendency(
            action=state.plan.steps[state.plan_cursor],
            source_process=task_proc.id,
            base_urgency=task_proc.urgency,
            created_tick=state.world.tick,
            label="task_step",
            origin="plan",
        ),
    )


def intention_step(state: SimulationState) -> SimulationState:
    """Keep the standing intention generating impulses between
    deliberations: inject the plan's next step as a fresh tendency."""
    _inject_plan_step(state)
    return state


def deliberative_step(state: SimulationState) -> SimulationState:
    """One slow-layer pass: step every active process one phase (in
    priority-rank order), rebuild the argument case over the currently
    proposed options, and generate or repair the task plan."""
    now = state.world.tick
    planner = TaskPlanner(state.world, state.goal, state.goal_variant, tick=now)
    focus: tuple[str, str] | None = None

    order = sorted(range(len(state.processes)),
                   key=lambda i: state.processes[i].priority_rank)
    for index in order:
        proc = state.processes[index]
        old = proc
        executed_phase = proc.phase
        stepped, new_apps, new_tends = run_affective_cycle(
            proc,
            state.beliefs,
            world_model=state.world,
            planner=planner,
            tick=now,
            commitments=state.commitments(),
        )
        state.processes[index] = stepped

        if stepped.phase != old.phase and focus is None:
            focus = (stepped.id, executed_phase)
        if stepped.attention_target != old.attention_target:
            state.trace.append(
                tick=now,
                layer="deliberative",
                kind="AttentionShift",
                payload={"process": stepped.id, "target": stepped.attention_target},
            )
        dropped = [
            a
            for a in old.active_appraisals
            if all(b.rule_id != a.rule_id for b in stepped.active_appraisals)
        ]
        for appraisal in dropped:
            state.trace.append(
                tick=now,
                layer="deliberative",
                kind="AppraisalChange",
                payload=_appraisal_payload(appraisal, active=False),
            )
        for appraisal in new_apps:
            state.trace.append(
                tick=now,
                layer="deliberative",
                kind="AppraisalChange",
                payload=_appraisal_payload(appraisal, active=True),
            )
        for desired in stepped.desirable_states:
            if desired not in old.desirable_states:
                state.set_belief(f"proposed({desired})", True)
        for candidate in stepped.candidate_goals:
            if candidate not in old.candidate_goals:
                state.trace.append(
                    tick=now,
                    layer="deliberative",
                    kind="GoalChange",
                    payload={
                        "process": stepped.id,
                        "state": candidate,
                        "option": _option_for_state(stepped, candidate),
                    },
                )
        for tendency in new_tends:
            if tendency.origin == "plan":
                _drop_plan_tendencies(state)
            _inject(state, tendency)

    if focus is not None:
        state.trace.append(
            tick=now,
            layer="deliberative",
            kind="AttentionShift",
            payload={"process": focus[0], "phase": focus[1], "focus": True},
        )

    # Plan generation / repair for the committed task goal, then the
    # argument case over everything now proposed (the fresh plan step
    # must be covered by the case before selection happens this tick).
    if state.task_process() is not None and not state.world.abandoned:
        state.plan = plan_tidy_task(state.world, state.goal, state.goal_variant, now)
        state.plan_cursor = 0
        _inject_plan_step(state)

    _rebuild_case(state)

    return state


def _option_for_state(proc: AffectiveProcess, state_atom: str) -> str:
    for option in proc.options:
        if option.state == state_atom:
            return option.action
    return state_atom


def _appraisal_payload(appraisal, active: bool) -> dict:
    return {
        "process": appraisal.source_process,
        "atom": appraisal.atom,
        "valence": appraisal.valence,
        "magnitude": appraisal.magnitude,
        "label": appraisal.label,
        "active": active,
    }


def _rebuild_case(state: SimulationState) -> None:
    now = state.world.tick
    live = [t for t in state.tendency_pool
            if not t.expired(now, state.config.tendency_ttl)]
    options = sorted({t.option for t in live})
    sources: dict[str, set[str]] = {}
    for t in live:
        sources.setdefault(t.option, set()).add(t.source_process)
    ctx = RuleContext(
        beliefs=state.beliefs,
        appraisals=_all_appraisals(state),
        commitments=state.commitments(),
    )
    args = build_case(
        options,
        list(state.config.argument_templates),
        ctx,
        weight_overrides=state.weight_overrides,
        option_sources=sources,
    )
    fresh_ids = {a.id for a in args}
    for sticky in state.sticky_arguments:
        if sticky.id not in fresh_ids:
            args.append(sticky)
    state.arguments = args
    _emit_option_set(state, options)


def _emit_option_set(state: SimulationState, options: list[str]) -> None:
    active = active_set(state.arguments)
    rows = tuple(
        (a.id, a.option, a.polarity, a.weight, a.id in active)
        for a in state.arguments
    )
    signature = (tuple(options), rows)
    if signature == state.last_option_set:
        return
    state.last_option_set = signature
    state.trace.append(
        tick=state.world.tick,
        layer="deliberative",
        kind="OptionSet",
        payload={
            "options": list(options),
            "arguments": [
                {
                    "id": r[0],
                    "option": r[1],
                    "polarity": r[2],
                    "weight": r[3],
                    "active": r[4],
                }
                for r in rows
            ],
        },
    )


def _purge_and_recompute(state: SimulationState) -> None:
    now = state.world.tick
    ttl = state.config.tendency_ttl
    kept: list[ActionTendency] = []
    for tendency in state.tendency_pool:
        if tendency.expired(now, ttl):
            state.trace.append(
                tick=now,
                layer="deliberative",
                kind="TendencyExpired",
                payload={"tendency": tendency.id, "option": tendency.option},
            )
        else:
            kept.append(tendency)
    state.tendency_pool = kept
    # The moment of action judges the pool against the current case:
    # options injected since the last deliberation must be covered too.
    _rebuild_case(state)
    ids = active_set(state.arguments)
    active_args = [a for a in state.arguments if a.id in ids]
    for tendency in state.tendency_pool:
        tendency.force = compute_force(tendency, active_args)
        tendency.supporting_arguments = supporting_argument_ids(tendency, active_args)


def _select_tendency(state: SimulationState) -> ActionTendency:
    candidates = [t for t in state.tendency_pool if t.force > 0]
    if not candidates:
        raise NoTendency("no tendency with positive force")
    best = min(
        candidates,
        key=lambda t: (-t.force, state.process_rank(t.source_process), t.action),
    )
    state.trace.append(
        tick=state.world.tick,
        layer="deliberative",
        kind="OptionSelected",
        payload={
            "option": best.option,
            "process": best.source_process,
            "force": best.force,
            "tendency": best.id,
        },
        reasons=best.supporting_arguments,
    )
    return best


def select_action(state: SimulationState) -> tuple[str, str]:
    """The moment of action: pick the maximal-force pooled tendency.

    Only tendencies with strictly positive force can drive behaviour; a
    fully suppressed pool raises :class:`NoTendency` just like an empty
    one.  Ties break to the more committed (lower-rank) source process,
    then to the lexicographically smallest action encoding.
    """
    best = _select_tendency(state)
    return best.action, best.source_process


def _profile_note(state: SimulationState, tendency: ActionTendency | None) -> dict:
    if tendency is None:
        return {}
    if state.bct_profile == "ceos":
        return {"os_tendency": tendency.id}
    return {"momentary_need": tendency.force}


def _verify_routing(state: SimulationState, tendency: ActionTendency) -> bool:
    pooled = any(t.id == tendency.id for t in state.tendency_pool)
    if pooled:
        return True
    state.routing_violations += 1
    if state.bct_profile == "ceos":
        raise RoutingViolation(
            f"tendency {tendency.id} executed without pool membership"
        )
    return False


def tick(state: SimulationState) -> SimulationState:
    """Advance the simulation by exactly one world action."""
    now = state.world.tick

    new_world, fired = W.step_events(state.world, list(state.events))
    state.world = new_world
    for event in fired:
        state.trace.append(
            tick=now,
            layer="world",
            kind="WorldEventFired",
            payload={"effect": dict(event.effect), "fire_tick": event.fire_tick},
        )

    perceive(state)

    for tendency in reactive_step(state):
        _inject(state, tendency)

    due = now % state.config.deliberation_period == 0
    if not due:
        intention_step(state)
    if due:
        deliberative_step(state)

    if state.metacognition_enabled:
        findings = monitor(
            state.trace,
            state.commitments(),
            state.monitor_cursor,
            world=state.world,
            goal=state.goal,
        )
        for finding in findings:
            control(finding, list(state.config.countermeasures), state)
        state.monitor_cursor = state.trace.head()

    if state.pending_deliberation:
        state.pending_deliberation = False
        deliberative_step(state)

    _purge_and_recompute(state)

    forces: dict[str, float] = {p.id: 0.0 for p in state.processes}
    for tendency in state.tendency_pool:
        pid = tendency.source_process
        forces[pid] = max(forces.get(pid, 0.0), tendency.force)

    executed = "idle"
    selected_action = "idle"
    winner = ""
    fallback = True
    error = None
    tendency = None
    try:
        tendency = _select_tendency(state)
        selected_action, winner = tendency.action, tendency.source_process
        fallback = False
    except NoTendency:
        state.trace.append(
            tick=now, layer="reactive", kind="NoTendency", payload={}
        )

    if tendency is not None:
        routed = _verify_routing(state, tendency)
        executed = selected_action
        world_action = executed if W.is_world_action(executed) else "idle"
        try:
            state.world = W.apply_action(state.world, world_action)
        except IllegalAction as exc:
            error = exc.reason
            executed = "idle"
            fallback = True
            state.world = W.apply_action(state.world, "idle")
        payload = {
            "action": executed,
            "option": tendency.option,
            "process": winner,
            "tendency": tendency.id,
            "fallback": fallback,
        }
        if error is not None:
            payload["error"] = error
        if not routed:
            payload["routing_warning"] = True
        payload.update(_profile_note(state, tendency))
    else:
        state.world = W.apply_action(state.world, "idle")
        payload = {
            "action": "idle",
            "option": None,
            "process": None,
            "tendency": None,
            "fallback": True,
        }
    state.trace.append(
        tick=now, layer="world", kind="ActionExecuted", payload=payload
    )
    if state.world.abandoned:
        # Walking out discharges every impulse; the agent is disengaged.
        state.tendency_pool = []

    if (
        state.plan is not None
        and state.plan_cursor < len(state.plan.steps)
        and not fallback
        and executed == state.plan.steps[state.plan_cursor]
    ):
        state.plan_cursor += 1

    status = W.evaluate_goal(state.world, state.goal)
    state.last_tick_stats = {
        "tick": now,
        "selected_action": selected_action if tendency is not None else "idle",
        "executed_action": executed,
        "winning_process": winner,
        "forces": forces,
        "misplaced_count": status.misplaced_count,
        "strict_tidy": status.strict,
        "relaxed_tidy": status.relaxed,
        "idle": executed == "idle",
    }
    return state
