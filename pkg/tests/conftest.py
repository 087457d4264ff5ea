import pytest

from cogsim import world as W


@pytest.fixture
def small_layout() -> W.RoomLayout:
    """3x3 room: one two-slot shelf, one unlimited box."""
    return W.RoomLayout(
        width=3,
        height=3,
        fixtures=(
            W.Fixture(
                id="shelf_1",
                cell=(0, 0),
                accepts="book",
                slots=("shelf_slot_1", "shelf_slot_2"),
            ),
            W.Fixture(id="box_1", cell=(2, 0), accepts="toy"),
        ),
    )


@pytest.fixture
def small_world(small_layout) -> W.WorldState:
    return W.WorldState(
        tick=0,
        layout=small_layout,
        agent_pos=(1, 1),
        agent_holding=None,
        objects={
            "book_1": W.ObjectState(id="book_1", kind="book", location="cell:0,1"),
            "toy_1": W.ObjectState(id="toy_1", kind="toy", location="cell:2,2"),
        },
    )


@pytest.fixture
def small_goal() -> W.GoalSpec:
    return W.GoalSpec(
        strict={"book": ("shelf_1",), "toy": ("box_1",)},
        relaxed={"book": ("shelf_1",), "toy": ("box_1",)},
    )
