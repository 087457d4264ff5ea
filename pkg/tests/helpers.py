"""Independent oracles shared by unit and acceptance tests."""

from __future__ import annotations

import itertools
import random
from collections import deque

from cogsim.arguments import Argument


def brute_force_active_set(args: list[Argument]) -> set[str]:
    """Enumerate every activation assignment and keep the one that is a
    fixed point of "active iff no active argument undercuts it"."""
    ids = [a.id for a in args]
    undercutters: dict[str, list[str]] = {a.id: [] for a in args}
    by_id = {a.id: a for a in args}
    for a in args:
        if a.undercuts is not None and a.undercuts in by_id:
            undercutters[a.undercuts].append(a.id)
    solutions = []
    for bits in itertools.product((False, True), repeat=len(ids)):
        active = {i for i, bit in zip(ids, bits) if bit}
        ok = all(
            (i in active) == (not any(u in active for u in undercutters[i]))
            for i in ids
        )
        if ok:
            solutions.append(active)
    assert len(solutions) == 1, "acyclic undercuts must have a unique fixed point"
    return solutions[0]


def brute_force_scores(options: list[str], args: list[Argument]) -> dict[str, float]:
    active = brute_force_active_set(args)
    scores = {opt: 0.0 for opt in options}
    for a in args:
        if a.id in active and a.option in scores:
            scores[a.option] += a.weight if a.polarity == "pro" else -a.weight
    return {opt: round(v, 9) for opt, v in scores.items()}


def random_argument_instance(
    rng: random.Random, max_options: int = 6, max_args: int = 12
) -> tuple[list[str], list[Argument]]:
    """Random options and arguments with DAG undercuts and 0.1-grid weights."""
    option_count = rng.randint(1, max_options)
    options = [f"opt_{i}" for i in range(option_count)]
    arg_count = rng.randint(0, max_args)
    args: list[Argument] = []
    for i in range(arg_count):
        undercuts = None
        if args and rng.random() < 0.4:
            undercuts = rng.choice(args).id  # earlier targets only: acyclic
        args.append(
            Argument(
                id=f"arg_{i}",
                option=rng.choice(options),
                polarity=rng.choice(("pro", "con")),
                weight=rng.randint(0, 20) / 10.0,
                source_process="p",
                undercuts=undercuts,
            )
        )
    return options, args


def bfs_distance(layout, start, goals) -> int | None:
    """Shortest move count from start to any goal cell; None if unreachable."""
    if start in goals:
        return 0
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        cell, dist = queue.popleft()
        for dx, dy in ((0, -1), (0, 1), (1, 0), (-1, 0)):
            nxt = (cell[0] + dx, cell[1] + dy)
            if nxt in seen or not layout.passable(nxt):
                continue
            if nxt in goals:
                return dist + 1
            seen.add(nxt)
            queue.append((nxt, dist + 1))
    return None
