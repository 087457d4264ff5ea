"""Arguments for and against options, and their aggregation.

Argument templates are instantiated against concrete options whenever
their trigger condition holds.  Each argument may undercut at most one
other argument; an argument is *active* iff no active argument
undercuts it, which over an acyclic undercut relation has a unique
solution computable in topological order.  Net option scores sum the
weights of active pro arguments and subtract active con arguments;
inactive arguments contribute nothing but stay in the explanation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CyclicUndercut
from .rules import RuleContext, eval_condition


@dataclass(frozen=True)
class Argument:
    id: str
    option: str
    polarity: str  # "pro" | "con"
    weight: float
    grounds: tuple[str, ...] = ()
    source_process: str = ""
    undercuts: str | None = None


@dataclass(frozen=True)
class ArgumentTemplate:
    """A rule that yields one argument per option it matches.

    ``option_selector`` forms:
        {"option": ID}            exactly that option id
        {"action": ID}            alias of the above (reads better in data)
        {"from_process": PID}     options proposed by tendencies of PID
        {"any": true}             every option under consideration
    ``undercuts_template`` names another template: the instantiated
    argument undercuts that template's argument *for the same option*.
    """

    id: str
    process: str
    polarity: str
    weight: float
    option_selector: dict
    trigger: dict | None = None
    undercuts_template: str | None = None
    grounds: tuple[str, ...] = ()


@dataclass(frozen=True)
class CaseReport:
    """Scores, ranking and per-argument explanation for one decision."""

    scores: dict[str, float]
    ranking: tuple[str, ...]
    recommended: str
    explanation: tuple[tuple[str, str, str, float, bool], ...] = ()
    # explanation rows: (argument id, option, polarity, weight, active)


def argument_id(template_id: str, option: str) -> str:
    return f"{template_id}@{option}"


def _selector_matches(
    selector: dict, option: str, option_sources: dict[str, set[str]] | None
) -> bool:
    if "option" in selector:
        return option == selector["option"]
    if "action" in selector:
        return option == selector["action"]
    if "from_process" in selector:
        sources = (option_sources or {}).get(option, set())
        return selector["from_process"] in sources
    if selector.get("any"):
        return True
    return False


def build_case(
    options: list[str],
    templates: list[ArgumentTemplate],
    context: RuleContext,
    weight_overrides: dict[str, float] | None = None,
    option_sources: dict[str, set[str]] | None = None,
) -> list[Argument]:
    """Instantiate every (template, option) pair whose trigger holds.

    Argument ids are deterministic functions of (template id, option
    id), so rebuilding the case over the same inputs reproduces the
    same arguments in the same order.
    """
    overrides = weight_overrides or {}
    out: list[Argument] = []
    produced: set[str] = set()
    for template in templates:
        for option in options:
            if not _selector_matches(template.option_selector, option, option_sources):
                continue
            ctx = RuleContext(
                beliefs=context.beliefs,
                appraisals=context.appraisals,
                commitments=context.commitments,
                option=option,
            )
            if not eval_condition(template.trigger, ctx):
                continue
            arg_id = argument_id(template.id, option)
            produced.add(arg_id)
            out.append(
                Argument(
                    id=arg_id,
                    option=option,
                    polarity=template.polarity,
                    weight=overrides.get(template.id, template.weight),
                    grounds=template.grounds,
                    source_process=template.process,
                    undercuts=(
                        argument_id(template.undercuts_template, option)
                        if template.undercuts_template
                        else None
                    ),
                )
            )
    # An undercut edge only exists if its target was actually produced.
    return [
        a if (a.undercuts is None or a.undercuts in produced)
        else Argument(
            id=a.id,
            option=a.option,
            polarity=a.polarity,
            weight=a.weight,
            grounds=a.grounds,
            source_process=a.source_process,
            undercuts=None,
        )
        for a in out
    ]


def active_set(args: list[Argument]) -> set[str]:
    """Ids of active arguments: those no active argument undercuts.

    Evaluated in topological order of the undercut edges; a cycle
    raises :class:`CyclicUndercut`.
    """
    by_id = {a.id: a for a in args}
    # undercutters[target] = ids attacking target
    undercutters: dict[str, list[str]] = {a.id: [] for a in args}
    for a in args:
        if a.undercuts is not None and a.undercuts in by_id:
            undercutters[a.undercuts].append(a.id)

    status: dict[str, bool] = {}
    visiting: set[str] = set()

    def resolve(arg_id: str) -> bool:
        if arg_id in status:
            return status[arg_id]
        if arg_id in visiting:
            raise CyclicUndercut(f"undercut cycle through {arg_id}")
        visiting.add(arg_id)
        active = not any(resolve(u) for u in undercutters[arg_id])
        visiting.discard(arg_id)
        status[arg_id] = active
        return active

    return {a.id for a in args if resolve(a.id)}


def aggregate(options: list[str], args: list[Argument]) -> CaseReport:
    """Rank options by net weight of their active arguments.

    Ties break to the lexicographically smallest option id so repeated
    runs always agree on the recommendation.
    """
    active = active_set(args)
    scores: dict[str, float] = {opt: 0.0 for opt in options}
    explanation: list[tuple[str, str, str, float, bool]] = []
    for a in args:
        is_active = a.id in active
        explanation.append((a.id, a.option, a.polarity, a.weight, is_active))
        if not is_active or a.option not in scores:
            continue
        scores[a.option] += a.weight if a.polarity == "pro" else -a.weight
    scores = {opt: round(val, 9) for opt, val in scores.items()}
    ranking = tuple(sorted(scores, key=lambda opt: (-scores[opt], opt)))
    return CaseReport(
        scores=scores,
        ranking=ranking,
        recommended=ranking[0],
        explanation=tuple(explanation),
    )
