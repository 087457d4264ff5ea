"""Scenario documents: parse, validate, instantiate, serialize.

A scenario is a single UTF-8 JSON document with exactly the top-level
keys {meta, ontology, starting_state, events, goal, agent, bct_profile}.
The schema is closed: unknown keys anywhere are rejected with a
SchemaError naming the offending path.  Optional inner fields fall back
to engine defaults (8x8 grid, deliberation every 3 ticks, tendencies
live 2 ticks).

Validation never raises; it returns a report of coded errors and
warnings.  Instantiation turns a clean spec plus a seed into a complete
initial simulation state; any randomized ("scattered") placement is a
pure function of the seed.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from importlib import resources

from . import world as W
from .affect import AffectiveProcess, AppraisalRule, ProcessOption
from .agent import ReactiveRule, SimulationState
from .arguments import ArgumentTemplate
from .errors import InvalidSpec, ParseError, SchemaError
from .metacog import Commitment, CountermeasureSpec, ReasoningTrace
from .rules import BeliefStore, referenced_atoms

FORMAT_VERSION = 1
TOP_KEYS = ("meta", "ontology", "starting_state", "events", "goal", "agent",
            "bct_profile")
AGENT_KEYS = (
    "processes",
    "reactive_rules",
    "appraisal_rules",
    "argument_templates",
    "countermeasures",
    "commitments",
    "deliberation_period",
    "tendency_ttl",
)

DEFAULT_GRID = (8, 8)
DEFAULT_DELIBERATION_PERIOD = 3
DEFAULT_TENDENCY_TTL = 2


@dataclass(frozen=True)
class Meta:
    name: str
    description: str = ""
    format_version: int = FORMAT_VERSION


@dataclass(frozen=True)
class Ontology:
    object_kinds: tuple[str, ...]
    fixtures: tuple[W.Fixture, ...]
    relations: tuple[str, ...] = ()


@dataclass(frozen=True)
class ObjectDecl:
    id: str
    kind: str
    location: str  # "scattered" or a location string


@dataclass(frozen=True)
class StartingState:
    grid: tuple[int, int]
    agent: tuple[int, int]
    objects: tuple[ObjectDecl, ...] = ()
    scatter_region: tuple[tuple[int, int], tuple[int, int]] | None = None
    facts: tuple[tuple[str, object], ...] = ()


@dataclass(frozen=True)
class ProcessDecl:
    id: str
    rank: int
    goal: str
    urgency: float = 0.5
    os: bool = False
    options: tuple[ProcessOption, ...] = ()


@dataclass(frozen=True)
class AgentConfig:
    processes: tuple[ProcessDecl, ...] = ()
    reactive_rules: tuple[ReactiveRule, ...] = ()
    appraisal_rules: tuple[AppraisalRule, ...] = ()
    argument_templates: tuple[ArgumentTemplate, ...] = ()
    countermeasures: tuple[CountermeasureSpec, ...] = ()
    commitments: tuple[Commitment, ...] = ()
    deliberation_period: int = DEFAULT_DELIBERATION_PERIOD
    tendency_ttl: int = DEFAULT_TENDENCY_TTL


@dataclass(frozen=True)
class ScenarioSpec:
    meta: Meta
    ontology: Ontology
    starting_state: StartingState
    events: tuple[W.WorldEvent, ...]
    goal: W.GoalSpec
    agent: AgentConfig
    bct_profile: str


@dataclass
class ValidationReport:
    errors: list[tuple[str, str, str]] = field(default_factory=list)
    warnings: list[tuple[str, str, str]] = field(default_factory=list)

    def error(self, code: str, location: str, message: str) -> None:
        self.errors.append((code, location, message))

    def warn(self, code: str, location: str, message: str) -> None:
        self.warnings.append((code, location, message))

    def ok(self) -> bool:
        return not self.errors


# -- schema walking helpers ---------------------------------------------------


def _check_keys(obj: dict, path: str, required: tuple[str, ...],
                optional: tuple[str, ...] = ()) -> None:
    if not isinstance(obj, dict):
        raise SchemaError(path, f"expected an object, got {type(obj).__name__}")
    for key in obj:
        if key not in required and key not in optional:
            raise SchemaError(f"{path}.{key}", "unknown key")
    for key in required:
        if key not in obj:
            raise SchemaError(path, f"missing required key: {key}")


def _str(obj: dict, path: str, key: str, default=None) -> str:
    if key not in obj:
        if default is not None:
            return default
        raise SchemaError(path, f"missing required key: {key}")
    value = obj[key]
    if not isinstance(value, str):
        raise SchemaError(f"{path}.{key}", "expected a string")
    return value


_ID_PATTERN = re.compile(r"^[a-z][a-z0-9_]*$")


def _id(obj: dict, path: str, key: str) -> str:
    value = _str(obj, path, key)
    if not _ID_PATTERN.match(value):
        raise SchemaError(f"{path}.{key}",
                          f"ids must be lowercase snake_case, got {value!r}")
    return value


def _int(obj: dict, path: str, key: str, default=None) -> int:
    if key not in obj:
        if default is not None:
            return default
        raise SchemaError(path, f"missing required key: {key}")
    value = obj[key]
    if not isinstance(value, int) or isinstance(value, bool):
        raise SchemaError(f"{path}.{key}", "expected an integer")
    return value


def _number(obj: dict, path: str, key: str, default=None) -> float:
    if key not in obj:
        if default is not None:
            return default
        raise SchemaError(path, f"missing required key: {key}")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{path}.{key}", "expected a number")
    return float(value)


def _bool(obj: dict, path: str, key: str, default: bool) -> bool:
    value = obj.get(key, default)
    if not isinstance(value, bool):
        raise SchemaError(f"{path}.{key}", "expected a boolean")
    return value


def _list(obj: dict, path: str, key: str, default=None) -> list:
    if key not in obj:
        return [] if default is None else default
    value = obj[key]
    if not isinstance(value, list):
        raise SchemaError(f"{path}.{key}", "expected a list")
    return value


def _dict(obj: dict, path: str, key: str, default=None) -> dict:
    if key not in obj:
        if default is None:
            raise SchemaError(path, f"missing required key: {key}")
        return default
    value = obj[key]
    if not isinstance(value, dict):
        raise SchemaError(f"{path}.{key}", "expected an object")
    return value


def _cell(value, path: str) -> tuple[int, int]:
    if (
        not isinstance(value, list)
        or len(value) != 2
        or not all(isinstance(v, int) and not isinstance(v, bool) for v in value)
    ):
        raise SchemaError(path, "expected a [x, y] integer pair")
    return (value[0], value[1])


def _str_list(value, path: str) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise SchemaError(path, "expected a list of strings")
    return tuple(value)


def _ids_list(value, path: str) -> tuple[str, ...]:
    ids = _str_list(value, path)
    for entry in ids:
        if not _ID_PATTERN.match(entry):
            raise SchemaError(path, f"ids must be lowercase snake_case, got {entry!r}")
    return ids


def _condition(obj: dict, path: str, key: str, default=None):
    if key not in obj:
        return default
    value = obj[key]
    if not isinstance(value, dict):
        raise SchemaError(f"{path}.{key}", "expected a condition object")
    try:
        referenced_atoms(value)
    except Exception:
        raise SchemaError(f"{path}.{key}", "malformed condition") from None
    return value


# -- parsing ------------------------------------------------------------------


def parse_scenario(document: str) -> ScenarioSpec:
    """Parse a scenario document into a spec, applying defaults.

    Malformed JSON raises ParseError with the line and column; schema
    problems (wrong types, unknown keys, undeclared entities in an
    event) raise SchemaError with the offending path.
    """
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.colno, exc.msg) from None
    if not isinstance(data, dict):
        raise SchemaError("$", "top level must be an object")
    _check_keys(data, "$", TOP_KEYS)

    meta_obj = _dict(data, "$", "meta")
    _check_keys(meta_obj, "meta", ("name", "format_version"), ("description",))
    version = _int(meta_obj, "meta", "format_version")
    if version != FORMAT_VERSION:
        raise SchemaError("meta.format_version", f"unsupported version: {version}")
    meta = Meta(
        name=_str(meta_obj, "meta", "name"),
        description=_str(meta_obj, "meta", "description", default=""),
        format_version=version,
    )

    ontology = _parse_ontology(_dict(data, "$", "ontology"))
    starting = _parse_starting_state(_dict(data, "$", "starting_state"), ontology)
    events = _parse_events(_list(data, "$", "events"), ontology)
    goal = _parse_goal(_dict(data, "$", "goal"))
    agent = _parse_agent(_dict(data, "$", "agent"))
    profile = _str(data, "$", "bct_profile")
    if profile not in ("prime", "ceos"):
        raise SchemaError("bct_profile", f"must be 'prime' or 'ceos', got {profile!r}")

    return ScenarioSpec(
        meta=meta,
        ontology=ontology,
        starting_state=starting,
        events=events,
        goal=goal,
        agent=agent,
        bct_profile=profile,
    )


def _parse_ontology(obj: dict) -> Ontology:
    _check_keys(obj, "ontology", (), ("object_kinds", "fixtures", "relations"))
    kinds = _str_list(obj.get("object_kinds", []), "ontology.object_kinds")
    fixtures = []
    for i, f in enumerate(_list(obj, "ontology", "fixtures")):
        path = f"ontology.fixtures[{i}]"
        _check_keys(f, path, ("id", "cell", "accepts"), ("slots", "capacity"))
        capacity = f.get("capacity")
        if capacity is not None and (
            not isinstance(capacity, int) or isinstance(capacity, bool)
        ):
            raise SchemaError(f"{path}.capacity", "expected an integer or null")
        fixtures.append(
            W.Fixture(
                id=_id(f, path, "id"),
                cell=_cell(f["cell"], f"{path}.cell"),
                accepts=_str(f, path, "accepts"),
                slots=_ids_list(f.get("slots", []), f"{path}.slots"),
                capacity=capacity,
            )
        )
    relations = _str_list(obj.get("relations", []), "ontology.relations")
    return Ontology(object_kinds=kinds, fixtures=tuple(fixtures), relations=relations)


def _parse_location(value, path: str) -> str:
    if value == "scattered":
        return "scattered"
    if isinstance(value, dict):
        _check_keys(value, path, (), ("cell", "slot", "fixture"))
        if len(value) != 1:
            raise SchemaError(path, "location needs exactly one of cell/slot/fixture")
        if "cell" in value:
            return W.cell_loc(_cell(value["cell"], f"{path}.cell"))
        if "slot" in value:
            return f"slot:{value['slot']}"
        return f"fixture:{value['fixture']}"
    raise SchemaError(path, "expected 'scattered' or a location object")


def _parse_starting_state(obj: dict, ontology: Ontology) -> StartingState:
    _check_keys(
        obj, "starting_state", (),
        ("grid", "agent", "objects", "scatter_region", "facts"),
    )
    grid = _cell(obj["grid"], "starting_state.grid") if "grid" in obj else DEFAULT_GRID
    agent = _cell(obj["agent"], "starting_state.agent") if "agent" in obj else (0, 0)
    objects = []
    for i, o in enumerate(_list(obj, "starting_state", "objects")):
        path = f"starting_state.objects[{i}]"
        _check_keys(o, path, ("id", "kind", "location"))
        objects.append(
            ObjectDecl(
                id=_id(o, path, "id"),
                kind=_str(o, path, "kind"),
                location=_parse_location(o["location"], f"{path}.location"),
            )
        )
    region = None
    if "scatter_region" in obj:
        raw = obj["scatter_region"]
        if not isinstance(raw, list) or len(raw) != 2:
            raise SchemaError("starting_state.scatter_region",
                              "expected [[x0, y0], [x1, y1]]")
        region = (
            _cell(raw[0], "starting_state.scatter_region[0]"),
            _cell(raw[1], "starting_state.scatter_region[1]"),
        )
    facts = _dict(obj, "starting_state", "facts", default={})
    return StartingState(
        grid=grid,
        agent=agent,
        objects=tuple(objects),
        scatter_region=region,
        facts=tuple(sorted(facts.items())),
    )


def _parse_events(raw: list, ontology: Ontology) -> tuple[W.WorldEvent, ...]:
    declared_fixtures = {f.id for f in ontology.fixtures}
    events = []
    for i, e in enumerate(raw):
        path = f"events[{i}]"
        _check_keys(e, path, ("fire_tick", "effect"))
        fire_tick = _int(e, path, "fire_tick")
        if fire_tick < 0:
            raise SchemaError(f"{path}.fire_tick", "must be non-negative")
        effect = _dict(e, path, "effect")
        kind = _str(effect, f"{path}.effect", "kind")
        if kind == "break_fixture":
            _check_keys(effect, f"{path}.effect", ("kind", "fixture"))
            if effect["fixture"] not in declared_fixtures:
                raise SchemaError(
                    f"{path}.effect", f"undeclared fixture: {effect['fixture']}"
                )
        elif kind == "spawn_object":
            _check_keys(effect, f"{path}.effect", ("kind", "object"))
            spawned = _dict(effect, f"{path}.effect", "object")
            _check_keys(spawned, f"{path}.effect.object", ("id", "kind", "location"))
            _id(spawned, f"{path}.effect.object", "id")
            if spawned["location"] == "scattered":
                raise SchemaError(
                    f"{path}.effect.object.location",
                    "spawned objects need a concrete location",
                )
            if spawned["kind"] not in ontology.object_kinds:
                raise SchemaError(
                    f"{path}.effect.object.kind",
                    f"undeclared kind: {spawned['kind']}",
                )
            effect = {
                "kind": "spawn_object",
                "object": {
                    "id": spawned["id"],
                    "kind": spawned["kind"],
                    "location": _parse_location(
                        spawned["location"], f"{path}.effect.object.location"
                    ),
                },
            }
        elif kind == "remove_object":
            _check_keys(effect, f"{path}.effect", ("kind", "object_id"))
        else:
            raise SchemaError(f"{path}.effect.kind", f"unknown effect: {kind}")
        events.append(W.WorldEvent(fire_tick=fire_tick, effect=dict(effect)))
    return tuple(events)


def _parse_goal(obj: dict) -> W.GoalSpec:
    _check_keys(obj, "goal", ("strict",), ("relaxed", "deadline_tick"))
    strict = _dict(obj, "goal", "strict")
    relaxed = _dict(obj, "goal", "relaxed", default=dict(strict))
    deadline = obj.get("deadline_tick")
    if deadline is not None and (
        not isinstance(deadline, int) or isinstance(deadline, bool)
    ):
        raise SchemaError("goal.deadline_tick", "expected an integer or null")

    def as_map(raw: dict, path: str) -> dict[str, tuple[str, ...]]:
        out = {}
        for kind, allowed in raw.items():
            out[kind] = _str_list(allowed, f"{path}.{kind}")
        return out

    return W.GoalSpec(
        strict=as_map(strict, "goal.strict"),
        relaxed=as_map(relaxed, "goal.relaxed"),
        deadline_tick=deadline,
    )


def _parse_agent(obj: dict) -> AgentConfig:
    _check_keys(obj, "agent", (), AGENT_KEYS)

    processes = []
    raw_processes = _list(obj, "agent", "processes")
    if not raw_processes:
        raw_processes = [{"id": "proc0", "rank": 0, "goal": "task"}]
    for i, p in enumerate(raw_processes):
        path = f"agent.processes[{i}]"
        _check_keys(p, path, ("id", "rank", "goal"), ("urgency", "os", "options"))
        options = []
        for j, opt in enumerate(_list(p, path, "options")):
            opath = f"{path}.options[{j}]"
            _check_keys(
                opt, opath, ("state", "action"),
                ("label", "commit_label", "flips", "sustains"),
            )
            options.append(
                ProcessOption(
                    state=_str(opt, opath, "state"),
                    action=_str(opt, opath, "action"),
                    label=_str(opt, opath, "label", default=opt["state"]),
                    commit_label=_str(opt, opath, "commit_label", default=""),
                    flips=_str_list(opt.get("flips", []), f"{opath}.flips"),
                    sustains=_str_list(opt.get("sustains", []), f"{opath}.sustains"),
                )
            )
        processes.append(
            ProcessDecl(
                id=_id(p, path, "id"),
                rank=_int(p, path, "rank"),
                goal=_str(p, path, "goal"),
                urgency=_number(p, path, "urgency", default=0.5),
                os=_bool(p, path, "os", default=False),
                options=tuple(options),
            )
        )

    reactive = []
    for i, r in enumerate(_list(obj, "agent", "reactive_rules")):
        path = f"agent.reactive_rules[{i}]"
        _check_keys(r, path, ("id", "when", "action", "urgency"), ("label",))
        reactive.append(
            ReactiveRule(
                id=_id(r, path, "id"),
                when=_condition(r, path, "when", default={"const": True}),
                action=_str(r, path, "action"),
                urgency=_number(r, path, "urgency"),
                label=_str(r, path, "label", default=""),
            )
        )

    appraisal = []
    for i, a in enumerate(_list(obj, "agent", "appraisal_rules")):
        path = f"agent.appraisal_rules[{i}]"
        _check_keys(
            a, path, ("id", "process", "when", "subject", "valence", "magnitude"),
            ("label",),
        )
        valence = _str(a, path, "valence")
        if valence not in ("positive", "negative"):
            raise SchemaError(f"{path}.valence", "must be 'positive' or 'negative'")
        magnitude = _number(a, path, "magnitude")
        if magnitude <= 0:
            raise SchemaError(f"{path}.magnitude", "must be > 0")
        appraisal.append(
            AppraisalRule(
                id=_id(a, path, "id"),
                process=_str(a, path, "process"),
                when=_condition(a, path, "when", default={"const": True}),
                subject=_str(a, path, "subject"),
                valence=valence,
                magnitude=magnitude,
                label=_str(a, path, "label", default=""),
            )
        )

    templates = []
    for i, t in enumerate(_list(obj, "agent", "argument_templates")):
        path = f"agent.argument_templates[{i}]"
        _check_keys(
            t, path, ("id", "process", "polarity", "weight", "options"),
            ("when", "undercuts", "grounds"),
        )
        polarity = _str(t, path, "polarity")
        if polarity not in ("pro", "con"):
            raise SchemaError(f"{path}.polarity", "must be 'pro' or 'con'")
        weight = _number(t, path, "weight")
        if weight < 0:
            raise SchemaError(f"{path}.weight", "must be >= 0")
        templates.append(
            ArgumentTemplate(
                id=_id(t, path, "id"),
                process=_str(t, path, "process"),
                polarity=polarity,
                weight=weight,
                option_selector=_dict(t, path, "options"),
                trigger=_condition(t, path, "when", default={"const": True}),
                undercuts_template=t.get("undercuts"),
                grounds=_str_list(t.get("grounds", []), f"{path}.grounds"),
            )
        )

    countermeasures = []
    for i, c in enumerate(_list(obj, "agent", "countermeasures")):
        path = f"agent.countermeasures[{i}]"
        _check_keys(c, path, ("id", "matches", "action"))
        matches = _dict(c, path, "matches")
        _check_keys(matches, f"{path}.matches", (), ("kind", "atom"))
        action = _dict(c, path, "action")
        kind = _str(action, f"{path}.action", "kind")
        if kind == "redescription":
            _check_keys(action, f"{path}.action", ("kind", "template"))
        elif kind == "replanning":
            _check_keys(action, f"{path}.action", ("kind",), ("goal_variant",))
        else:
            raise SchemaError(f"{path}.action.kind", f"unknown countermeasure: {kind}")
        countermeasures.append(
            CountermeasureSpec(
                id=_id(c, path, "id"), matches=dict(matches), action=dict(action)
            )
        )

    commitments = []
    for i, c in enumerate(_list(obj, "agent", "commitments")):
        path = f"agent.commitments[{i}]"
        _check_keys(c, path, ("atom", "valence"), ("origin", "weight"))
        valence = _str(c, path, "valence")
        if valence not in ("positive", "negative"):
            raise SchemaError(f"{path}.valence", "must be 'positive' or 'negative'")
        weight = _number(c, path, "weight", default=1.0)
        if weight < 0:
            raise SchemaError(f"{path}.weight", "must be >= 0")
        commitments.append(
            Commitment(
                atom=_str(c, path, "atom"),
                required_valence=valence,
                origin=_str(c, path, "origin", default="initial_goal"),
                weight=weight,
            )
        )

    period = _int(obj, "agent", "deliberation_period",
                  default=DEFAULT_DELIBERATION_PERIOD)
    ttl = _int(obj, "agent", "tendency_ttl", default=DEFAULT_TENDENCY_TTL)
    if period < 1:
        raise SchemaError("agent.deliberation_period", "must be >= 1")
    if ttl < 1:
        raise SchemaError("agent.tendency_ttl", "must be >= 1")

    return AgentConfig(
        processes=tuple(processes),
        reactive_rules=tuple(reactive),
        appraisal_rules=tuple(appraisal),
        argument_templates=tuple(templates),
        countermeasures=tuple(countermeasures),
        commitments=tuple(commitments),
        deliberation_period=period,
        tendency_ttl=ttl,
    )


# -- validation ---------------------------------------------------------------


def validate_scenario(spec: ScenarioSpec) -> ValidationReport:
    """Cross-check the spec; problems become report entries, never raises."""
    report = ValidationReport()
    onto = spec.ontology
    fixture_ids = {f.id for f in onto.fixtures}
    slot_ids: dict[str, str] = {}
    width, height = spec.starting_state.grid

    seen_cells: set[tuple[int, int]] = set()
    for f in onto.fixtures:
        for slot in f.slots:
            if slot in slot_ids:
                report.error("DUPLICATE_SLOT", f"ontology.fixtures[{f.id}]",
                             f"slot {slot} declared twice")
            slot_ids[slot] = f.id
        if not (0 <= f.cell[0] < width and 0 <= f.cell[1] < height):
            report.error("OUT_OF_BOUNDS", f"ontology.fixtures[{f.id}]",
                         f"fixture cell {f.cell} outside the {width}x{height} grid")
        if f.cell in seen_cells:
            report.error("CELL_CONFLICT", f"ontology.fixtures[{f.id}]",
                         f"cell {f.cell} already occupied by another fixture")
        seen_cells.add(f.cell)

    ax, ay = spec.starting_state.agent
    if not (0 <= ax < width and 0 <= ay < height):
        report.error("OUT_OF_BOUNDS", "starting_state.agent",
                     "agent starts outside the grid")
    elif (ax, ay) in seen_cells:
        report.error("CELL_CONFLICT", "starting_state.agent",
                     "agent starts on a fixture cell")

    object_ids: set[str] = set()
    used_slots: set[str] = set()
    scattered = 0
    for obj in spec.starting_state.objects:
        loc = f"starting_state.objects[{obj.id}]"
        if obj.id in object_ids:
            report.error("DUPLICATE_OBJECT", loc, "object id declared twice")
        object_ids.add(obj.id)
        if obj.kind not in onto.object_kinds:
            report.error("DANGLING_REF", loc, f"undeclared kind: {obj.kind}")
        if obj.location == "scattered":
            scattered += 1
        elif obj.location.startswith("slot:"):
            slot = obj.location[5:]
            if slot not in slot_ids:
                report.error("DANGLING_REF", loc, f"undeclared slot: {slot}")
            elif slot in used_slots:
                report.error("SLOT_CONFLICT", loc, f"slot {slot} used twice")
            used_slots.add(slot)
        elif obj.location.startswith("fixture:"):
            if obj.location[8:] not in fixture_ids:
                report.error("DANGLING_REF", loc,
                             f"undeclared fixture: {obj.location[8:]}")
        else:
            cell = W.parse_cell(obj.location)
            if cell is not None and (
                not (0 <= cell[0] < width and 0 <= cell[1] < height)
                or cell in seen_cells
            ):
                report.error("OUT_OF_BOUNDS", loc,
                             f"object placed on unusable cell {cell}")

    if scattered:
        free = len(_scatter_cells(spec)) if spec.starting_state else 0
        if free < scattered:
            report.error("SCATTER_SPACE", "starting_state",
                         f"{scattered} scattered objects but only {free} free cells")

    for i, event in enumerate(spec.events):
        effect = event.effect
        if effect["kind"] == "break_fixture" and effect["fixture"] not in fixture_ids:
            report.error("DANGLING_REF", f"events[{i}].effect",
                         f"undeclared fixture: {effect['fixture']}")
        if effect["kind"] == "remove_object" and effect["object_id"] not in object_ids:
            report.error("DANGLING_REF", f"events[{i}].effect",
                         f"undeclared object: {effect['object_id']}")
        if (
            spec.goal.deadline_tick is not None
            and event.fire_tick > spec.goal.deadline_tick
        ):
            report.warn("UNREACHABLE_EVENT", f"events[{i}]",
                        "fires after the goal deadline")

    for which, mapping in (("strict", spec.goal.strict), ("relaxed", spec.goal.relaxed)):
        for kind, allowed in mapping.items():
            if kind not in onto.object_kinds:
                report.error("DANGLING_REF", f"goal.{which}.{kind}",
                             f"undeclared kind: {kind}")
            for fixture_id in allowed:
                if fixture_id not in fixture_ids:
                    report.error("DANGLING_REF", f"goal.{which}.{kind}",
                                 f"undeclared fixture: {fixture_id}")
    if not spec.goal.entails():
        report.error("GOAL_ENTAILMENT", "goal",
                     "a strict placement is excluded by the relaxed predicate")

    agent = spec.agent
    process_ids = [p.id for p in agent.processes]
    if len(set(process_ids)) != len(process_ids):
        report.error("DUPLICATE_PROCESS", "agent.processes",
                     "process ids must be unique")
    ranks = [p.rank for p in agent.processes]
    if len(set(ranks)) != len(ranks):
        report.error("DUPLICATE_PRIORITY", "agent.processes",
                     "priority ranks must be unique")
    if sum(1 for p in agent.processes if p.os) > 1:
        report.error("MULTIPLE_OS", "agent.processes",
                     "at most one process may be the operational-system owner")
    if sum(1 for p in agent.processes if p.goal == "task") > 1:
        report.error("MULTIPLE_TASK", "agent.processes",
                     "at most one process may own the task goal")
    if agent.reactive_rules and not agent.processes:
        report.error("NO_OS_PROCESS", "agent.reactive_rules",
                     "reactive rules need a process to attribute tendencies to")

    for rule in agent.appraisal_rules:
        if rule.process not in process_ids:
            report.error("DANGLING_REF", f"agent.appraisal_rules[{rule.id}]",
                         f"undeclared process: {rule.process}")

    template_ids = {t.id for t in agent.argument_templates}
    owned: set[str] = set()
    for template in agent.argument_templates:
        owned.add(template.process)
        if template.process not in process_ids:
            report.error("DANGLING_REF", f"agent.argument_templates[{template.id}]",
                         f"undeclared process: {template.process}")
        if (
            template.undercuts_template is not None
            and template.undercuts_template not in template_ids
        ):
            report.error("DANGLING_REF", f"agent.argument_templates[{template.id}]",
                         f"undeclared undercut target: {template.undercuts_template}")
    if _undercut_cycle(agent.argument_templates):
        report.error("CYCLIC_UNDERCUT", "agent.argument_templates",
                     "undercut relation among templates is cyclic")
    for process in agent.processes:
        if process.id not in owned:
            report.warn("NO_TEMPLATES", f"agent.processes[{process.id}]",
                        "process advances no argument templates")

    for cm in agent.countermeasures:
        if cm.action["kind"] == "redescription":
            if cm.action["template"] not in template_ids:
                report.error("DANGLING_REF", f"agent.countermeasures[{cm.id}]",
                             f"undeclared template: {cm.action['template']}")
        elif cm.action.get("goal_variant", "relaxed") not in ("strict", "relaxed"):
            report.error("DANGLING_REF", f"agent.countermeasures[{cm.id}]",
                         "unknown goal variant")

    declared_atoms = {r.subject for r in agent.appraisal_rules}
    for commitment in agent.commitments:
        if commitment.atom not in declared_atoms:
            report.error(
                "COMMITMENT_ATOM",
                f"agent.commitments[{commitment.atom}]",
                "commitment atom is not the subject of any appraisal rule",
            )

    return report


def _undercut_cycle(templates) -> bool:
    graph = {t.id: t.undercuts_template for t in templates}
    for start in graph:
        seen = set()
        node = start
        while node is not None:
            if node in seen:
                return True
            seen.add(node)
            node = graph.get(node)
    return False


# -- instantiation ------------------------------------------------------------


def _scatter_cells(spec: ScenarioSpec) -> list[tuple[int, int]]:
    start = spec.starting_state
    width, height = start.grid
    region = start.scatter_region or ((0, 0), (width - 1, height - 1))
    (x0, y0), (x1, y1) = region
    blocked = {f.cell for f in spec.ontology.fixtures}
    cells = []
    for y in range(max(0, y0), min(height - 1, y1) + 1):
        for x in range(max(0, x0), min(width - 1, x1) + 1):
            if (x, y) not in blocked:
                cells.append((x, y))
    return cells


def instantiate(spec: ScenarioSpec, seed: int) -> SimulationState:
    """Build the complete initial simulation state.

    Scattered objects draw distinct floor cells from the declared
    scatter region without replacement; the draw is a pure function of
    the seed.  A spec with validation errors raises InvalidSpec.
    """
    report = validate_scenario(spec)
    if not report.ok():
        raise InvalidSpec(f"scenario has {len(report.errors)} validation error(s)")

    start = spec.starting_state
    layout = W.RoomLayout(
        width=start.grid[0], height=start.grid[1], fixtures=spec.ontology.fixtures
    )

    rng = random.Random(seed)
    scattered = [o for o in start.objects if o.location == "scattered"]
    cells = _scatter_cells(spec)
    drawn = rng.sample(cells, len(scattered)) if scattered else []
    placement = dict(zip((o.id for o in scattered), drawn))

    objects: dict[str, W.ObjectState] = {}
    for decl in start.objects:
        location = decl.location
        if location == "scattered":
            location = W.cell_loc(placement[decl.id])
        objects[decl.id] = W.ObjectState(id=decl.id, kind=decl.kind, location=location)

    world = W.WorldState(
        tick=0,
        layout=layout,
        agent_pos=start.agent,
        agent_holding=None,
        objects=objects,
        broken_fixtures=frozenset(),
        abandoned=False,
        facts=dict(start.facts),
    )

    processes = []
    for decl in spec.agent.processes:
        processes.append(
            AffectiveProcess(
                id=decl.id,
                priority_rank=decl.rank,
                goal_ref=decl.goal,
                rules=tuple(
                    r for r in spec.agent.appraisal_rules if r.process == decl.id
                ),
                options=decl.options,
                urgency=decl.urgency,
                os_role=decl.os,
            )
        )

    return SimulationState(
        world=world,
        beliefs=BeliefStore(),
        processes=processes,
        trace=ReasoningTrace(),
        config=spec.agent,
        goal=spec.goal,
        events=spec.events,
        bct_profile=spec.bct_profile,
        rng_seed=seed,
    )


# -- serialization ------------------------------------------------------------


def _location_doc(location: str):
    if location == "scattered":
        return "scattered"
    if location.startswith("cell:"):
        return {"cell": list(W.parse_cell(location))}
    if location.startswith("slot:"):
        return {"slot": location[5:]}
    return {"fixture": location[8:]}


def serialize_scenario(spec: ScenarioSpec) -> str:
    """Render a spec back to document text; parsing it reproduces the spec."""
    doc = {
        "meta": {
            "name": spec.meta.name,
            "description": spec.meta.description,
            "format_version": spec.meta.format_version,
        },
        "ontology": {
            "object_kinds": list(spec.ontology.object_kinds),
            "fixtures": [
                {
                    "id": f.id,
                    "cell": list(f.cell),
                    "accepts": f.accepts,
                    "slots": list(f.slots),
                    "capacity": f.capacity,
                }
                for f in spec.ontology.fixtures
            ],
            "relations": list(spec.ontology.relations),
        },
        "starting_state": {
            "grid": list(spec.starting_state.grid),
            "agent": list(spec.starting_state.agent),
            "objects": [
                {"id": o.id, "kind": o.kind, "location": _location_doc(o.location)}
                for o in spec.starting_state.objects
            ],
            "facts": dict(spec.starting_state.facts),
        },
        "events": [
            {"fire_tick": e.fire_tick, "effect": _effect_doc(e.effect)}
            for e in spec.events
        ],
        "goal": {
            "strict": {k: list(v) for k, v in spec.goal.strict.items()},
            "relaxed": {k: list(v) for k, v in spec.goal.relaxed.items()},
            "deadline_tick": spec.goal.deadline_tick,
        },
        "agent": {
            "processes": [
                {
                    "id": p.id,
                    "rank": p.rank,
                    "goal": p.goal,
                    "urgency": p.urgency,
                    "os": p.os,
                    "options": [
                        {
                            "state": o.state,
                            "action": o.action,
                            "label": o.label,
                            "commit_label": o.commit_label,
                            "flips": list(o.flips),
                            "sustains": list(o.sustains),
                        }
                        for o in p.options
                    ],
                }
                for p in spec.agent.processes
            ],
            "reactive_rules": [
                {
                    "id": r.id,
                    "when": r.when,
                    "action": r.action,
                    "urgency": r.urgency,
                    "label": r.label,
                }
                for r in spec.agent.reactive_rules
            ],
            "appraisal_rules": [
                {
                    "id": a.id,
                    "process": a.process,
                    "when": a.when,
                    "subject": a.subject,
                    "valence": a.valence,
                    "magnitude": a.magnitude,
                    "label": a.label,
                }
                for a in spec.agent.appraisal_rules
            ],
            "argument_templates": [
                {
                    "id": t.id,
                    "process": t.process,
                    "polarity": t.polarity,
                    "weight": t.weight,
                    "options": t.option_selector,
                    "when": t.trigger,
                    **(
                        {"undercuts": t.undercuts_template}
                        if t.undercuts_template
                        else {}
                    ),
                    "grounds": list(t.grounds),
                }
                for t in spec.agent.argument_templates
            ],
            "countermeasures": [
                {"id": c.id, "matches": c.matches, "action": c.action}
                for c in spec.agent.countermeasures
            ],
            "commitments": [
                {
                    "atom": c.atom,
                    "valence": c.required_valence,
                    "origin": c.origin,
                    "weight": c.weight,
                }
                for c in spec.agent.commitments
            ],
            "deliberation_period": spec.agent.deliberation_period,
            "tendency_ttl": spec.agent.tendency_ttl,
        },
        "bct_profile": spec.bct_profile,
    }
    if spec.starting_state.scatter_region is not None:
        doc["starting_state"]["scatter_region"] = [
            list(spec.starting_state.scatter_region[0]),
            list(spec.starting_state.scatter_region[1]),
        ]
    return json.dumps(doc, indent=2) + "\n"


def _effect_doc(effect: dict) -> dict:
    if effect["kind"] == "spawn_object":
        spawned = effect["object"]
        return {
            "kind": "spawn_object",
            "object": {
                "id": spawned["id"],
                "kind": spawned["kind"],
                "location": _location_doc(spawned["location"]),
            },
        }
    return dict(effect)


# -- bundled assets -----------------------------------------------------------

BUNDLED = ("room_tidy", "room_tidy_redescription", "non_smoking", "office_cake")


def bundled_document(name: str) -> str:
    """Raw text of a bundled scenario asset."""
    return (
        resources.files("cogsim").joinpath(f"assets/{name}.json").read_text("utf-8")
    )


def load_bundled(name: str) -> ScenarioSpec:
    return parse_scenario(bundled_document(name))
