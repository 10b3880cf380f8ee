"""Independent reference implementations used by the tests.

Nothing here shares code paths with the package beyond its data types.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import mpmath

from cakediv.deficiency import is_deficient
from cakediv.exact import ZERO, Scalar
from cakediv.kitchen import KitchenMeasure, Serving
from cakediv.records import PartitionRecord

mpmath.mp.dps = 80


def to_mpf(x: Scalar) -> mpmath.mpf:
    value = mpmath.mpf(x.rat.numerator) / x.rat.denominator
    if x.coef:
        value += mpmath.mpf(x.coef.numerator) / x.coef.denominator * mpmath.sqrt(x.radicand)
    return value


# ------------------------------------------------------------ servings by sampling

def sample_points(*servings: Serving, extra: int = 0, rng=None) -> list[Scalar]:
    """Endpoints, midpoints between consecutive endpoints, and a few random points."""
    marks = {Scalar(0), Scalar(1)}
    for s in servings:
        for lo, hi in s.intervals:
            marks.update((lo, hi))
    marks = sorted(marks)
    points = marks + [(a + b) / 2 for a, b in zip(marks, marks[1:])]
    rng = rng or random.Random(0)
    points += [Scalar(Fraction(rng.randint(1, 999), 1000)) for _ in range(extra)]
    return [p for p in points if 0 < p <= 1]


def member(s: Serving, x) -> bool:
    return any(lo < x <= hi for lo, hi in s.intervals)


# ------------------------------------------------------------ literal hyperallocations

def literal_acceptable(values1, values2, e1, level):
    """Deficiency straight from the definition.

    A hyperallocation with r replicas is a tuple of r cell-unions; union k
    goes to the distinguished agent in replica k.  Every tuple is tried.
    """
    cells = range(len(values1))
    unions = [frozenset(c for c in cells if mask >> c & 1) for mask in range(1 << len(values1))]
    for r in range(1, level + 1):
        for tup in itertools.product(unions, repeat=r):
            v1 = sum((values1[c] for u in tup for c in u), ZERO) / r
            v2 = sum((values2[c] for u in tup for c in u), ZERO) / r
            if v1 >= e1 and v2 <= e1:
                return tup
    return None


def literal_deficient(P: PartitionRecord, e1, level: int) -> bool:
    return literal_acceptable(P.agent_values(1), P.agent_values(2), e1, level) is None


# ------------------------------------------------------------ random objects

def random_fraction_split(rng, total: Fraction, parts: int) -> list[Fraction]:
    weights = [rng.randint(1, 9) for _ in range(parts)]
    s = sum(weights)
    return [total * w / s for w in weights]


def random_record(rng, n_cells: int, n_agents: int = 2, grid: int = 24) -> PartitionRecord:
    """A valid record with interval cells on a grid and random positive values."""
    cuts = sorted(rng.sample(range(1, grid), n_cells - 1))
    bounds = [Fraction(0)] + [Fraction(c, grid) for c in cuts] + [Fraction(1)]
    cells = [Serving.interval(a, b) for a, b in zip(bounds, bounds[1:])]
    rng.shuffle(cells)
    values = tuple(tuple(random_fraction_split(rng, Fraction(1), n_cells))
                   for _ in range(n_agents))
    return PartitionRecord(tuple(cells), values)


def random_extension(P: PartitionRecord, rng, pieces: int = 3) -> list[KitchenMeasure]:
    """A random measure profile extending ``P``: each cell's value spread unevenly inside it."""
    profile = []
    for a in range(1, P.n_agents + 1):
        parts = []
        for cell, v in zip(P.cells, P.agent_values(a)):
            for lo, hi in cell.intervals:
                share = v * (hi - lo) / cell.length()
                k = rng.randint(1, pieces)
                inner = sorted({Fraction(rng.randint(1, 99), 100) for _ in range(k - 1)})
                marks = [lo] + [lo + (hi - lo) * f for f in inner] + [hi]
                masses = random_fraction_split(rng, Fraction(1), len(marks) - 1)
                parts += [(marks[i], marks[i + 1], share * masses[i])
                          for i in range(len(marks) - 1)]
        parts.sort(key=lambda p: p[0])
        profile.append(KitchenMeasure([ZERO] + [hi for _, hi, _ in parts],
                                      [m for _, _, m in parts]))
    return profile


def random_serving(rng, grid: int = 24, max_pieces: int = 3) -> Serving:
    k = rng.randint(1, max_pieces)
    marks = sorted(rng.sample(range(grid + 1), 2 * k))
    return Serving((Fraction(marks[2 * i], grid), Fraction(marks[2 * i + 1], grid))
                   for i in range(k))


def random_threshold(rng, level: int) -> Scalar:
    """A threshold whose precision exceeds ``level`` (so one-cell records are deficient)."""
    if rng.random() < 0.3:
        return Scalar.golden()
    den = rng.randint(level + 1, 4 * level + 50)
    num = rng.randint(1, den - 1)
    while Fraction(num, den).denominator <= level:
        num = rng.randint(1, den - 1)
    return Scalar(Fraction(num, den))


def random_deficient_record(rng, max_cells: int = 4, max_level: int = 18):
    """(record, e1, level) with the record level-deficient for agent 1 at threshold e1.

    Agent 2's values are a small perturbation of agent 1's and e1 has a large
    denominator, which makes deficiency common; candidates are filtered
    with the exact test.
    """
    while True:
        level = rng.randint(2, max_level)
        e1 = random_threshold(rng, level)
        n = rng.randint(1, max_cells)
        P = random_record(rng, n)
        if n > 1:
            row = list(P.values[0])
            jitter = [Fraction(rng.randint(-3, 3), 4000) for _ in range(n - 1)]
            jitter.append(-sum(jitter))
            row2 = [v + j for v, j in zip(row, jitter)]
            if any(v <= 0 for v in row2):
                continue
            P = PartitionRecord(P.cells, (tuple(row), tuple(row2)))
        if is_deficient(P, e1, level):
            return P, e1, level


def brute_deficient(P: PartitionRecord, e1, level: int) -> bool:
    """Plain weight-vector enumeration when small enough, else the exact pruned search."""
    size = sum((r + 1) ** len(P) for r in range(1, level + 1))
    method = "exhaustive" if size <= 200_000 else "pareto"
    return bool(is_deficient(P, e1, level, budget=None, method=method))
