"""Deterministic gridworld for the room-tidying task.

The world is a small bounded grid containing an agent, loose objects
(books and toys by default), and fixtures (a shelf with single-book
slots, a table, a box).  All operations are pure: they take a world
value and return a new one, so equal inputs always produce equal
outputs and hypothetical rollouts can never leak into the live world.

Locations and actions are encoded as plain strings so they are cheap
to compare, order, and serialize:

    locations   "cell:X,Y" | "slot:SLOT_ID" | "fixture:FIXTURE_ID" | "held"
    actions     "idle" | "abandon" | "move:DIR" | "pick_up:OBJ" | "place:TARGET"

``TARGET`` is a slot id for slot-addressed fixtures and a fixture id
for bulk fixtures.  Any other string is treated by the agent layer as
an abstract (non-spatial) act and leaves the grid untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import IllegalAction, UnknownEntity

DIRECTIONS: dict[str, tuple[int, int]] = {
    "north": (0, -1),
    "south": (0, 1),
    "east": (1, 0),
    "west": (-1, 0),
}

WORLD_ACTION_KINDS = ("move", "pick_up", "place", "idle", "abandon")


@dataclass(frozen=True)
class Fixture:
    """A placement target occupying one impassable grid cell.

    A fixture with ``slots`` is slot-addressed (each slot holds one
    object); otherwise ``capacity`` bounds how many objects it holds,
    with ``None`` meaning unlimited.
    """

    id: str
    cell: tuple[int, int]
    accepts: str
    slots: tuple[str, ...] = ()
    capacity: int | None = None


@dataclass(frozen=True)
class RoomLayout:
    """Static room geometry: grid size and fixture placement."""

    width: int
    height: int
    fixtures: tuple[Fixture, ...] = ()

    def fixture(self, fixture_id: str) -> Fixture:
        for f in self.fixtures:
            if f.id == fixture_id:
                return f
        raise UnknownEntity(f"unknown fixture: {fixture_id}")

    def has_fixture(self, fixture_id: str) -> bool:
        return any(f.id == fixture_id for f in self.fixtures)

    def slot_parent(self, slot_id: str) -> Fixture | None:
        for f in self.fixtures:
            if slot_id in f.slots:
                return f
        return None

    def fixture_cells(self) -> set[tuple[int, int]]:
        return {f.cell for f in self.fixtures}

    def in_bounds(self, cell: tuple[int, int]) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def passable(self, cell: tuple[int, int]) -> bool:
        return self.in_bounds(cell) and cell not in self.fixture_cells()


@dataclass(frozen=True)
class ObjectState:
    id: str
    kind: str
    location: str


@dataclass(frozen=True)
class WorldState:
    """One instant of the simulated room.

    ``facts`` carries non-spatial situation features (used by abstract,
    one-cell scenarios whose content lives entirely in the agent's
    rules).  ``abandoned`` latches once the agent walks out: from then
    on only ``idle`` is legal.
    """

    tick: int
    layout: RoomLayout
    agent_pos: tuple[int, int]
    agent_holding: str | None = None
    objects: dict[str, ObjectState] = field(default_factory=dict)
    broken_fixtures: frozenset[str] = frozenset()
    abandoned: bool = False
    facts: dict[str, object] = field(default_factory=dict)

    def object(self, object_id: str) -> ObjectState:
        try:
            return self.objects[object_id]
        except KeyError:
            raise UnknownEntity(f"unknown object: {object_id}") from None


@dataclass(frozen=True)
class WorldEvent:
    """A scheduled exogenous change, fixed at scenario load."""

    fire_tick: int
    effect: dict


@dataclass(frozen=True)
class GoalSpec:
    """Placement conditions per object kind, in a strict and a relaxed form.

    Each map sends an object kind to the fixture ids where that kind
    counts as correctly placed.  The strict map must entail the relaxed
    one (strict allowances are a subset of relaxed allowances).
    """

    strict: dict[str, tuple[str, ...]]
    relaxed: dict[str, tuple[str, ...]]
    deadline_tick: int | None = None

    def entails(self) -> bool:
        for kind, allowed in self.strict.items():
            if not set(allowed) <= set(self.relaxed.get(kind, ())):
                return False
        return True


@dataclass(frozen=True)
class GoalStatus:
    strict: bool
    relaxed: bool
    misplaced_count: int


# -- location / action string helpers ---------------------------------------


def cell_loc(cell: tuple[int, int]) -> str:
    return f"cell:{cell[0]},{cell[1]}"


def parse_cell(location: str) -> tuple[int, int] | None:
    if not location.startswith("cell:"):
        return None
    x, y = location[5:].split(",")
    return int(x), int(y)


def encode_action(kind: str, arg: str | None = None) -> str:
    return kind if arg is None else f"{kind}:{arg}"


def split_action(action: str) -> tuple[str, str | None]:
    if ":" in action:
        kind, arg = action.split(":", 1)
        return kind, arg
    return action, None


def is_world_action(action: str) -> bool:
    kind, arg = split_action(action)
    if kind not in WORLD_ACTION_KINDS:
        return False
    if kind in ("idle", "abandon"):
        return arg is None
    return arg is not None and (kind != "move" or arg in DIRECTIONS)


def manhattan(a: tuple[int, int], b: tuple[int, int]) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def _fixture_of_target(layout: RoomLayout, target: str) -> tuple[Fixture, str | None]:
    """Resolve a place target to (fixture, slot id or None)."""
    if layout.has_fixture(target):
        return layout.fixture(target), None
    parent = layout.slot_parent(target)
    if parent is not None:
        return parent, target
    raise UnknownEntity(f"unknown placement target: {target}")


def _occupants(world: WorldState, fixture: Fixture, slot: str | None) -> list[str]:
    if slot is not None:
        wanted = f"slot:{slot}"
    else:
        wanted = f"fixture:{fixture.id}"
    return [o.id for o in world.objects.values() if o.location == wanted]


# -- operations ---------------------------------------------------------------


def apply_action(world: WorldState, action: str) -> WorldState:
    """Apply one action, returning the successor world with tick + 1.

    Illegal actions raise :class:`IllegalAction`; nothing is ever
    silently coerced.
    """
    kind, arg = split_action(action)
    if kind not in WORLD_ACTION_KINDS:
        raise IllegalAction(f"not a world action: {action}")
    if world.abandoned and kind != "idle":
        raise IllegalAction("task abandoned: only idle is legal")

    if kind == "idle":
        return replace(world, tick=world.tick + 1)

    if kind == "abandon":
        return replace(world, tick=world.tick + 1, abandoned=True)

    if kind == "move":
        if arg not in DIRECTIONS:
            raise IllegalAction(f"unknown direction: {arg}")
        dx, dy = DIRECTIONS[arg]
        dest = (world.agent_pos[0] + dx, world.agent_pos[1] + dy)
        if not world.layout.in_bounds(dest):
            raise IllegalAction("move out of bounds")
        if dest in world.layout.fixture_cells():
            raise IllegalAction("cell occupied by fixture")
        return replace(world, tick=world.tick + 1, agent_pos=dest)

    if kind == "pick_up":
        if world.agent_holding is not None:
            raise IllegalAction("already holding an object")
        obj = world.object(arg)  # type: ignore[arg-type]
        cell = parse_cell(obj.location)
        if cell is None:
            if obj.location == "held":
                raise IllegalAction("object already held")
            # In a fixture: stand next to the fixture to take it back out.
            target = obj.location.split(":", 1)[1]
            fixture, _ = _fixture_of_target(world.layout, target)
            cell = fixture.cell
            if manhattan(world.agent_pos, cell) > 1:
                raise IllegalAction("fixture not adjacent")
        elif manhattan(world.agent_pos, cell) > 1:
            raise IllegalAction("object not adjacent")
        objects = dict(world.objects)
        objects[obj.id] = replace(obj, location="held")
        return replace(
            world, tick=world.tick + 1, agent_holding=obj.id, objects=objects
        )

    # place
    if world.agent_holding is None:
        raise IllegalAction("nothing held")
    fixture, slot = _fixture_of_target(world.layout, arg)  # type: ignore[arg-type]
    if fixture.id in world.broken_fixtures:
        raise IllegalAction("fixture broken")
    if manhattan(world.agent_pos, fixture.cell) > 1:
        raise IllegalAction("fixture not adjacent")
    held = world.object(world.agent_holding)
    if fixture.accepts != held.kind:
        raise IllegalAction(f"fixture does not accept kind {held.kind}")
    if fixture.slots and slot is None:
        raise IllegalAction("fixture is slot-addressed: name a slot")
    if slot is not None and _occupants(world, fixture, slot):
        raise IllegalAction("slot full")
    if slot is None and fixture.capacity is not None:
        if len(_occupants(world, fixture, None)) >= fixture.capacity:
            raise IllegalAction("fixture full")
    location = f"slot:{slot}" if slot is not None else f"fixture:{fixture.id}"
    objects = dict(world.objects)
    objects[held.id] = replace(held, location=location)
    return replace(world, tick=world.tick + 1, agent_holding=None, objects=objects)


def step_events(
    world: WorldState, schedule: list[WorldEvent]
) -> tuple[WorldState, list[WorldEvent]]:
    """Fire every event scheduled for the world's current tick.

    Events fire in schedule order; the tick counter is untouched (it
    advances with the agent's action), and because ticks pass through
    each value exactly once per run, no event can fire twice.
    """
    fired: list[WorldEvent] = []
    for event in schedule:
        if event.fire_tick != world.tick:
            continue
        world = _apply_effect(world, event.effect)
        fired.append(event)
    return world, fired


def _apply_effect(world: WorldState, effect: dict) -> WorldState:
    kind = effect.get("kind")
    if kind == "break_fixture":
        fixture_id = effect["fixture"]
        if not world.layout.has_fixture(fixture_id):
            raise UnknownEntity(f"unknown fixture: {fixture_id}")
        return replace(
            world, broken_fixtures=world.broken_fixtures | {fixture_id}
        )
    if kind == "spawn_object":
        decl = effect["object"]
        objects = dict(world.objects)
        objects[decl["id"]] = ObjectState(
            id=decl["id"], kind=decl["kind"], location=decl["location"]
        )
        return replace(world, objects=objects)
    if kind == "remove_object":
        object_id = effect["object_id"]
        if object_id not in world.objects:
            raise UnknownEntity(f"unknown object: {object_id}")
        objects = dict(world.objects)
        del objects[object_id]
        holding = world.agent_holding
        if holding == object_id:
            holding = None
        return replace(world, objects=objects, agent_holding=holding)
    raise UnknownEntity(f"unknown event effect: {kind}")


def placed_ok(world: WorldState, obj: ObjectState, allowed: tuple[str, ...]) -> bool:
    """True iff the object sits in one of the allowed fixtures."""
    if obj.location.startswith("slot:"):
        parent = world.layout.slot_parent(obj.location[5:])
        return parent is not None and parent.id in allowed
    if obj.location.startswith("fixture:"):
        return obj.location[8:] in allowed
    return False


def evaluate_goal(world: WorldState, goal: GoalSpec) -> GoalStatus:
    """Evaluate both tidiness predicates plus the strict misplaced count."""
    misplaced = 0
    relaxed_ok = True
    for obj in world.objects.values():
        if not placed_ok(world, obj, goal.strict.get(obj.kind, ())):
            misplaced += 1
        if not placed_ok(world, obj, goal.relaxed.get(obj.kind, ())):
            relaxed_ok = False
    return GoalStatus(
        strict=misplaced == 0,
        relaxed=relaxed_ok,
        misplaced_count=misplaced,
    )
