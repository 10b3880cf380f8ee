"""Two-agent hyperallocations and the exact level-deficiency decision procedure.

A hyperallocation with ``r`` replicas is summarised by a weight vector: cell
``A`` is given to the distinguished agent in ``w_A`` of the replicas.  Agent
``i`` then values it at ``sum(w_A * alpha_i(A)) / r``.

A two-agent record is *level-deficient* for threshold ``e1`` when no
hyperallocation with at most ``level`` replicas is worth at least ``e1`` to
agent 1 while worth at most ``e1`` to agent 2.

The search runs over every ``r`` and every weight vector, with two exact
reductions: points dominated in (agent-1 value up, agent-2 value down) are
discarded after each cell, and the last cell's weight is solved for in
closed form.  ``method="exhaustive"`` skips both reductions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import EnumerationBudgetExceeded, PreconditionError, UnsupportedSetting
from .exact import ZERO, Scalar, scalar
from .records import PartitionRecord

DEFAULT_BUDGET = 5_000_000


@dataclass(frozen=True)
class WeightedHyperallocation:
    replicas: int
    weights: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))
        if self.replicas < 1:
            raise PreconditionError("need at least one replica")
        if any(not 0 <= w <= self.replicas for w in self.weights):
            raise PreconditionError("weights must lie in 0..replicas")

    def to_json(self) -> dict:
        return {"replicas": self.replicas, "weights": list(self.weights)}


@dataclass(frozen=True)
class DeficiencyVerdict:
    deficient: bool
    counterexample: WeightedHyperallocation | None = None

    def __bool__(self) -> bool:
        return self.deficient

    def to_json(self) -> dict:
        return {"deficient": self.deficient,
                "counterexample": self.counterexample and self.counterexample.to_json()}


def hyper_value(P: PartitionRecord, agent: int, h: WeightedHyperallocation) -> Scalar:
    if len(h.weights) != len(P.cells):
        raise PreconditionError("weights must align with the record's cells")
    return weighted_value(P.agent_values(agent), h.weights, h.replicas)


def weighted_value(values: Sequence[Scalar], weights: Sequence[int], r: int) -> Scalar:
    total = ZERO
    for w, v in zip(weights, values):
        if w:
            total = total + v * w
    return total / r


class Budget:
    """Counts enumerated points and raises once the allowance is spent."""

    def __init__(self, limit: int | None = DEFAULT_BUDGET):
        self.limit = limit
        self.used = 0

    def spend(self, n: int) -> None:
        self.used += n
        if self.limit is not None and self.used > self.limit:
            raise EnumerationBudgetExceeded(
                f"enumeration exceeded its budget of {self.limit} points")


def _as_budget(budget) -> Budget:
    return budget if isinstance(budget, Budget) else Budget(budget)


def frontier(values1: Sequence[Scalar], values2: Sequence[Scalar], r: int,
             budget: Budget | None = None) -> list[tuple[Scalar, Scalar, tuple[int, ...]]]:
    """Non-dominated (sum w·v1, sum w·v2, w) over w in {0..r}^cells.

    A point dominates another when its first sum is no smaller and its
    second no larger.  Every quantity optimised in this package is monotone
    in that order, so the frontier loses nothing.
    """
    budget = budget or Budget(None)
    points = [(ZERO, ZERO, ())]
    for a1, a2 in zip(values1, values2):
        budget.spend(len(points) * (r + 1))
        grown = []
        for x1, x2, ws in points:
            y1, y2 = x1, x2
            for w in range(r + 1):
                grown.append((y1, y2, ws + (w,)))
                y1 = y1 + a1
                y2 = y2 + a2
        if len(points) == 1:
            # a single ray: both sums grow with w, so nothing is dominated
            points = grown
            continue
        grown.sort(key=lambda p: (-p[0], p[1]))
        points = []
        best = None
        for p in grown:
            if best is None or p[1] < best:
                points.append(p)
                best = p[1]
    return points


def _two_agent_values(P: PartitionRecord) -> tuple[tuple[Scalar, ...], tuple[Scalar, ...]]:
    if P.n_agents != 2:
        raise UnsupportedSetting("deficiency is defined for two agents only")
    return P.agent_values(1), P.agent_values(2)


def find_acceptable(values1: Sequence[Scalar], values2: Sequence[Scalar], e1: Scalar,
                    level: int, budget=DEFAULT_BUDGET,
                    method: str = "pareto") -> WeightedHyperallocation | None:
    """A hyperallocation worth >= e1 to agent 1 and <= e1 to agent 2, if one exists."""
    e1 = scalar(e1)
    budget = _as_budget(budget)
    s = len(values1)
    if method == "exhaustive":
        for r in range(1, level + 1):
            budget.spend((r + 1) ** s)
            for ws in itertools.product(range(r + 1), repeat=s):
                if (weighted_value(values1, ws, r) >= e1
                        and weighted_value(values2, ws, r) <= e1):
                    return WeightedHyperallocation(r, ws)
        return None
    if method != "pareto":
        raise PreconditionError(f"unknown method {method!r}")
    last1, last2 = values1[-1], values2[-1]
    for r in range(1, level + 1):
        target = e1 * r
        for k1, k2, ws in frontier(values1[:-1], values2[:-1], r, budget):
            lo = max(0, math.ceil((target - k1) / last1))
            hi = min(r, math.floor((target - k2) / last2))
            if lo <= hi:
                return WeightedHyperallocation(r, ws + (lo,))
    return None


def is_deficient(P: PartitionRecord, e1, level: int, budget=DEFAULT_BUDGET,
                 method: str = "pareto") -> DeficiencyVerdict:
    values1, values2 = _two_agent_values(P)
    if level < 0:
        raise PreconditionError("level must be nonnegative")
    h = find_acceptable(values1, values2, scalar(e1), level, budget, method)
    return DeficiencyVerdict(h is None, h)


def deficit(values1, values2, e1: Scalar, h: WeightedHyperallocation) -> Scalar:
    """max(e1 - agent-1 value, agent-2 value - e1): positive iff h is not acceptable."""
    return max(e1 - weighted_value(values1, h.weights, h.replicas),
               weighted_value(values2, h.weights, h.replicas) - e1)


def min_deficit_values(values1: Sequence[Scalar], values2: Sequence[Scalar], e1,
                       level: int, budget=DEFAULT_BUDGET) -> Scalar:
    e1 = scalar(e1)
    if level < 1:
        raise PreconditionError("min_deficit needs level >= 1")
    budget = _as_budget(budget)
    last1, last2 = values1[-1], values2[-1]
    best = None
    for r in range(1, level + 1):
        for k1, k2, _ in frontier(values1[:-1], values2[:-1], r, budget):
            # the two terms cross where the last weight balances them
            cross = (e1 * (2 * r) - k1 - k2) / (last1 + last2)
            for w in {min(r, max(0, math.floor(cross))), min(r, max(0, math.ceil(cross)))}:
                d = max(e1 - (k1 + last1 * w) / r, (k2 + last2 * w) / r - e1)
                if best is None or d < best:
                    best = d
    if best <= ZERO:
        raise PreconditionError(f"record is not {level}-deficient for threshold {e1}")
    return best


def min_deficit(P: PartitionRecord, e1, level: int, budget=DEFAULT_BUDGET) -> Scalar:
    values1, values2 = _two_agent_values(P)
    return min_deficit_values(values1, values2, e1, level, budget)


def swap_roles(P: PartitionRecord, e1) -> tuple[PartitionRecord, Scalar]:
    """Exchange the two agents; the threshold becomes 1 - e1."""
    _two_agent_values(P)
    return P.select_agents((2, 1)), 1 - scalar(e1)
