"""Affective processes: the iterative attend / evaluate / prepare cycle.

Each process is a motive.  It directs attention at the most salient
recent belief change its appraisal rules care about, evaluates the
attended situation or option as positive or negative (appraisals carry
a magnitude; a neutral evaluation is simply not an appraisal), and
then prepares action: it lists states that would flip its negative
appraisals or sustain its positive ones, keeps the achievable ones as
candidate goals, and emits one action tendency per candidate.  The
tendency's force — base urgency plus the net weight of active
arguments about its option — is what competes at the moment of action.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .arguments import Argument
from .rules import BeliefStore, RuleContext, eval_condition, referenced_atoms

PHASES = ("attending", "evaluating", "preparing")


@dataclass(frozen=True)
class Appraisal:
    """A positive or negative evaluation of one atom, with magnitude > 0."""

    atom: str
    valence: str  # "positive" | "negative"
    magnitude: float
    source_process: str
    tick: int
    label: str = ""
    rule_id: str = ""


@dataclass(frozen=True)
class AppraisalRule:
    id: str
    process: str
    when: dict
    subject: str
    valence: str
    magnitude: float
    label: str = ""


@dataclass(frozen=True)
class ProcessOption:
    """A response the process knows about: a state worth wanting.

    ``flips`` lists appraisal atoms the state would improve; a positive
    appraisal of the state itself also re-triggers the option, at which
    point the emitted tendency carries ``commit_label`` (an intention
    has formed) instead of ``label`` (a mere proposal).
    """

    state: str
    action: str
    label: str = ""
    commit_label: str = ""
    flips: tuple[str, ...] = ()
    sustains: tuple[str, ...] = ()


@dataclass
class ActionTendency:
    """A proposed action carrying affective force."""

    action: str
    source_process: str
    base_urgency: float
    created_tick: int
    option: str = ""
    label: str = ""
    origin: str = "affect"  # "affect" | "reactive" | "plan"
    id: str = ""
    force: float = 0.0
    supporting_arguments: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.option:
            self.option = self.action

    def expired(self, now: int, ttl: int) -> bool:
        return now - self.created_tick > ttl


@dataclass
class AffectiveProcess:
    id: str
    priority_rank: int
    goal_ref: str
    phase: str = "attending"
    attention_target: str | None = None
    active_appraisals: list[Appraisal] = field(default_factory=list)
    desirable_states: list[str] = field(default_factory=list)
    candidate_goals: list[str] = field(default_factory=list)
    rules: tuple[AppraisalRule, ...] = ()
    options: tuple[ProcessOption, ...] = ()
    urgency: float = 0.5
    os_role: bool = False

    def copy(self) -> "AffectiveProcess":
        dup = replace(self)
        dup.active_appraisals = list(self.active_appraisals)
        dup.desirable_states = list(self.desirable_states)
        dup.candidate_goals = list(self.candidate_goals)
        return dup


def _salience_pick(
    proc: AffectiveProcess, beliefs: BeliefStore, ctx: RuleContext
) -> str | None:
    """Target of attention: the most recent belief change with the
    largest matching rule magnitude; ties break by rule declaration
    order."""
    best_key: tuple[int, float, int] | None = None
    best_atom: str | None = None
    for index, rule in enumerate(proc.rules):
        if not eval_condition(rule.when, ctx):
            continue
        atoms = referenced_atoms(rule.when)
        if atoms:
            atom = max(atoms, key=lambda a: (beliefs.last_changed(a), -atoms.index(a)))
            recency = beliefs.last_changed(atom)
        else:
            atom = rule.subject
            recency = -1
        key = (recency, rule.magnitude, -index)
        if best_key is None or key > best_key:
            best_key = key
            best_atom = atom
    return best_atom


def run_affective_cycle(
    proc: AffectiveProcess,
    beliefs: BeliefStore,
    world_model=None,
    planner=None,
    tick: int = 0,
    commitments: list | None = None,
) -> tuple[AffectiveProcess, list[Appraisal], list[ActionTendency]]:
    """Execute exactly one phase step of the process.

    A phase with nothing applicable is a no-op step: attending with no
    salient target leaves the process where it is, and preparing with
    no active appraisal simply cycles back to attending.
    """
    proc = proc.copy()
    ctx = RuleContext(
        beliefs=beliefs,
        appraisals=list(proc.active_appraisals),
        commitments=commitments or [],
    )
    new_appraisals: list[Appraisal] = []
    new_tendencies: list[ActionTendency] = []

    if proc.phase == "attending":
        target = _salience_pick(proc, beliefs, ctx)
        if target is None:
            return proc, [], []
        proc.attention_target = target
        proc.phase = "evaluating"
        return proc, [], []

    if proc.phase == "evaluating":
        target = proc.attention_target
        kept: list[Appraisal] = []
        by_rule = {a.rule_id: a for a in proc.active_appraisals}
        rules_by_id = {r.id: r for r in proc.rules}
        for app in proc.active_appraisals:
            rule = rules_by_id.get(app.rule_id)
            if rule is not None and not eval_condition(rule.when, ctx):
                continue  # the grounds for this appraisal are gone
            kept.append(app)
        proc.active_appraisals = kept
        for rule in proc.rules:
            related = target == rule.subject or target in referenced_atoms(rule.when)
            if not related or not eval_condition(rule.when, ctx):
                continue
            existing = by_rule.get(rule.id)
            if existing is not None and existing.magnitude == rule.magnitude:
                continue
            appraisal = Appraisal(
                atom=rule.subject,
                valence=rule.valence,
                magnitude=rule.magnitude,
                source_process=proc.id,
                tick=tick,
                label=rule.label,
                rule_id=rule.id,
            )
            proc.active_appraisals = [
                a for a in proc.active_appraisals if a.rule_id != rule.id
            ]
            proc.active_appraisals.append(appraisal)
            new_appraisals.append(appraisal)
        proc.phase = "preparing"
        return proc, new_appraisals, []

    # preparing
    if not proc.active_appraisals:
        proc.phase = "attending"
        return proc, [], []
    new_tendencies = prepare_action(proc, world_model, planner, tick=tick)
    proc.phase = "attending"
    return proc, [], new_tendencies


def prepare_action(
    proc: AffectiveProcess, world_model=None, planner=None, tick: int = 0
) -> list[ActionTendency]:
    """Turn the process's appraisals into concrete action tendencies.

    Three steps: list desirable states, keep the achievable ones as
    candidate goals, and emit a tendency for each candidate's first
    action with base urgency equal to the strongest triggering
    appraisal.  An empty result is legal when nothing is achievable.
    """
    tendencies: list[ActionTendency] = []

    for option in proc.options:
        triggers = [
            a
            for a in proc.active_appraisals
            if (a.valence == "negative" and a.atom in option.flips)
            or (a.valence == "positive" and a.atom in option.sustains)
            or (a.valence == "positive" and a.atom == option.state)
        ]
        if not triggers:
            continue
        if option.state not in proc.desirable_states:
            proc.desirable_states.append(option.state)
        # Declared options have no world model, so achievability cannot
        # rule them out; the conflict filter only concerns the process's
        # own goal, which a declared response never contradicts.
        if option.state not in proc.candidate_goals:
            proc.candidate_goals.append(option.state)
        committed = any(
            a.valence == "positive" and a.atom == option.state
            for a in proc.active_appraisals
        )
        label = option.commit_label if committed and option.commit_label else option.label
        tendencies.append(
            ActionTendency(
                action=option.action,
                source_process=proc.id,
                base_urgency=max(a.magnitude for a in triggers),
                created_tick=tick,
                label=label,
            )
        )

    if proc.goal_ref == "task" and planner is not None:
        negatives = [a for a in proc.active_appraisals if a.valence == "negative"]
        if negatives and planner.achievable():
            if "task_goal" not in proc.desirable_states:
                proc.desirable_states.append("task_goal")
            if "task_goal" not in proc.candidate_goals:
                proc.candidate_goals.append("task_goal")
            first = planner.first_action()
            if first is not None:
                tendencies.append(
                    ActionTendency(
                        action=first,
                        source_process=proc.id,
                        base_urgency=max(a.magnitude for a in negatives),
                        created_tick=tick,
                        label="task_step",
                        origin="plan",
                    )
                )
    return tendencies


def compute_force(tendency: ActionTendency, active_args) -> float:
    """Base urgency plus net active argument weight, floored at zero.

    ``active_args`` holds the currently active arguments; only those
    about this tendency's option count.  Pure, and rounded so repeated
    runs serialize identically.
    """
    net = tendency.base_urgency
    for arg in active_args:
        if arg.option != tendency.option:
            continue
        net += arg.weight if arg.polarity == "pro" else -arg.weight
    return round(max(0.0, net), 9)


def supporting_argument_ids(tendency: ActionTendency, active_args) -> tuple[str, ...]:
    """Active pro arguments for the tendency's option (falling back to
    any active argument about it, so explanations are never empty when
    the case mentions the option at all)."""
    pro = tuple(
        a.id for a in active_args if a.option == tendency.option and a.polarity == "pro"
    )
    if pro:
        return pro
    return tuple(a.id for a in active_args if a.option == tendency.option)
