"""The interval cake (0,1] cut by the standard knife t -> (0,t].

Servings are finite unions of half-open intervals, measures are
piecewise-constant strictly positive densities, and a query asks one agent
to cut a prefix of a serving worth a given share of it.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import PreconditionError
from .exact import ONE, ZERO, Scalar, scalar, total


class Serving:
    """Canonical finite union of intervals (lo, hi] inside (0,1]."""

    __slots__ = ("intervals", "_length")

    def __init__(self, intervals: Iterable[Sequence] = ()):
        pieces = []
        for lo, hi in intervals:
            lo, hi = scalar(lo), scalar(hi)
            if lo < ZERO or hi > ONE:
                raise PreconditionError(f"interval ({lo},{hi}] leaves the cake")
            if lo < hi:
                pieces.append((lo, hi))
        pieces.sort(key=lambda iv: iv[0])
        merged: list[tuple[Scalar, Scalar]] = []
        for lo, hi in pieces:
            if merged and lo <= merged[-1][1]:
                if hi > merged[-1][1]:
                    merged[-1] = (merged[-1][0], hi)
            else:
                merged.append((lo, hi))
        self.intervals: tuple[tuple[Scalar, Scalar], ...] = tuple(merged)
        self._length = None

    @classmethod
    def _canonical(cls, intervals) -> "Serving":
        obj = cls.__new__(cls)
        obj.intervals = tuple(intervals)
        obj._length = None
        return obj

    @classmethod
    def whole(cls) -> "Serving":
        return WHOLE

    @classmethod
    def interval(cls, lo, hi) -> "Serving":
        return cls([(lo, hi)])

    def __eq__(self, other) -> bool:
        return isinstance(other, Serving) and self.intervals == other.intervals

    def __hash__(self) -> int:
        return hash(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def is_empty(self) -> bool:
        return not self.intervals

    def __str__(self) -> str:
        if not self.intervals:
            return "∅"
        return " ∪ ".join(f"({lo},{hi}]" for lo, hi in self.intervals)

    def __repr__(self) -> str:
        return f"Serving({self})"

    def length(self) -> Scalar:
        if self._length is None:
            self._length = total(hi - lo for lo, hi in self.intervals)
        return self._length

    def sup(self) -> Scalar:
        return self.intervals[-1][1] if self.intervals else ZERO

    def inf(self) -> Scalar:
        return self.intervals[0][0] if self.intervals else ONE

    def apart_from(self, other: "Serving") -> bool:
        """Cheap sufficient test for disjointness: the hulls do not overlap."""
        return self.sup() <= other.inf() or other.sup() <= self.inf()

    def __contains__(self, x) -> bool:
        x = scalar(x)
        for lo, hi in self.intervals:
            if x <= hi:
                return lo < x
        return False

    def __and__(self, other: "Serving") -> "Serving":
        out = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            (alo, ahi), (blo, bhi) = a[i], b[j]
            lo = blo if alo < blo else alo
            a_first = ahi < bhi
            hi = ahi if a_first else bhi
            if lo < hi:
                out.append((lo, hi))
            if a_first:
                i += 1
            else:
                j += 1
        return Serving._canonical(out)

    def complement(self) -> "Serving":
        out = []
        prev = ZERO
        for lo, hi in self.intervals:
            if prev < lo:
                out.append((prev, lo))
            prev = hi
        if prev < ONE:
            out.append((prev, ONE))
        return Serving._canonical(out)

    def __sub__(self, other: "Serving") -> "Serving":
        return self & other.complement()

    def __or__(self, other: "Serving") -> "Serving":
        return Serving(self.intervals + other.intervals)

    def issubset(self, other: "Serving") -> bool:
        b, j = other.intervals, 0
        for lo, hi in self.intervals:
            # the one interval of ``other`` that could hold (lo, hi]
            while j < len(b) and b[j][1] < hi:
                j += 1
            if j == len(b) or lo < b[j][0]:
                return False
        return True

    def isdisjoint(self, other: "Serving") -> bool:
        return not (self & other)

    def prefix(self, t) -> "Serving":
        """The part of this serving inside (0, t]."""
        t = scalar(t)
        out = []
        for lo, hi in self.intervals:
            if lo >= t:
                break
            out.append((lo, min(hi, t)))
        return Serving._canonical(out)

    def to_json(self) -> list:
        return [[str(lo), str(hi)] for lo, hi in self.intervals]

    @classmethod
    def from_json(cls, data, radicand: int = 5) -> "Serving":
        return cls((Scalar.parse(lo, radicand), Scalar.parse(hi, radicand)) for lo, hi in data)


EMPTY = Serving._canonical(())
WHOLE = Serving._canonical(((ZERO, ONE),))


def union_all(servings: Iterable[Serving]) -> Serving:
    intervals = []
    for s in servings:
        intervals.extend(s.intervals)
    return Serving(intervals)


class KitchenMeasure:
    """Piecewise-constant density with breakpoints 0 = t0 < ... < tk = 1.

    ``masses[i]`` is the mass of (t_i, t_{i+1}]; all masses are positive and
    sum to one, so the CDF is continuous and strictly increasing.
    """

    __slots__ = ("breakpoints", "masses", "_cum", "_density")

    def __init__(self, breakpoints: Sequence, masses: Sequence):
        bps = tuple(scalar(t) for t in breakpoints)
        ms = tuple(scalar(m) for m in masses)
        if len(bps) != len(ms) + 1 or not ms:
            raise PreconditionError("need one more breakpoint than masses")
        if bps[0] != ZERO or bps[-1] != ONE:
            raise PreconditionError("breakpoints must start at 0 and end at 1")
        if any(bps[i] >= bps[i + 1] for i in range(len(ms))):
            raise PreconditionError("breakpoints must be strictly increasing")
        if any(m <= ZERO for m in ms):
            raise PreconditionError("masses must be strictly positive")
        cum = [ZERO]
        for m in ms:
            cum.append(cum[-1] + m)
        if cum[-1] != ONE:
            raise PreconditionError(f"masses sum to {cum[-1]}, not 1")
        self.breakpoints = bps
        self.masses = ms
        self._cum = tuple(cum)
        self._density = tuple(m / (bps[i + 1] - bps[i]) for i, m in enumerate(ms))

    @classmethod
    def uniform(cls) -> "KitchenMeasure":
        return cls((0, 1), (1,))

    @classmethod
    def from_densities(cls, breakpoints: Sequence, densities: Sequence) -> "KitchenMeasure":
        bps = [scalar(t) for t in breakpoints]
        return cls(bps, [scalar(rho) * (bps[i + 1] - bps[i]) for i, rho in enumerate(densities)])

    @classmethod
    def random(cls, rng, pieces: int = 4, grid: int = 24) -> "KitchenMeasure":
        """A random measure with rational breakpoints on a grid."""
        pieces = max(1, min(pieces, grid))
        cuts = sorted(rng.sample(range(1, grid), pieces - 1))
        bps = [Fraction(0)] + [Fraction(c, grid) for c in cuts] + [Fraction(1)]
        weights = [rng.randint(1, 9) for _ in range(pieces)]
        total = sum(weights)
        return cls(bps, [Fraction(w, total) for w in weights])

    def __eq__(self, other) -> bool:
        return (isinstance(other, KitchenMeasure) and self.breakpoints == other.breakpoints
                and self.masses == other.masses)

    def __hash__(self) -> int:
        return hash((self.breakpoints, self.masses))

    def __repr__(self) -> str:
        return f"KitchenMeasure(breakpoints={list(map(str, self.breakpoints))}, " \
               f"masses={list(map(str, self.masses))})"

    def densities(self) -> tuple[Scalar, ...]:
        return self._density

    def cdf(self, x) -> Scalar:
        x = scalar(x)
        if x <= ZERO:
            return ZERO
        if x >= ONE:
            return ONE
        i = bisect.bisect_left(self.breakpoints, x) - 1
        return self._cum[i] + self._density[i] * (x - self.breakpoints[i])

    def inverse_cdf(self, y) -> Scalar:
        """The unique t with cdf(t) = y."""
        y = scalar(y)
        if y <= ZERO:
            return ZERO
        if y >= ONE:
            return ONE
        i = bisect.bisect_left(self._cum, y) - 1
        return self.breakpoints[i] + (y - self._cum[i]) / self._density[i]

    def value(self, serving: Serving) -> Scalar:
        return total(self.cdf(hi) - self.cdf(lo) for lo, hi in serving.intervals)

    def to_json(self) -> dict:
        return {"breakpoints": [str(t) for t in self.breakpoints],
                "masses": [str(m) for m in self.masses]}

    @classmethod
    def from_json(cls, data: dict, radicand: int = 5) -> "KitchenMeasure":
        return cls([Scalar.parse(t, radicand) for t in data["breakpoints"]],
                   [Scalar.parse(m, radicand) for m in data["masses"]])


def measure_value(m: KitchenMeasure, serving: Serving) -> Scalar:
    return m.value(serving)


@dataclass(frozen=True)
class Query:
    """Ask agent ``cutter`` for the shortest prefix of ``serving`` worth ``proportion`` of it."""

    cutter: int
    serving: Serving
    proportion: Scalar

    def __post_init__(self):
        object.__setattr__(self, "proportion", scalar(self.proportion))
        if not ZERO <= self.proportion <= ONE:
            raise PreconditionError(f"proportion {self.proportion} outside [0,1]")
        if self.cutter < 1:
            raise PreconditionError("agent ids start at 1")

    def to_json(self) -> dict:
        return {"cutter": self.cutter, "serving": self.serving.to_json(),
                "proportion": str(self.proportion)}

    @classmethod
    def from_json(cls, data: dict, radicand: int = 5) -> "Query":
        return cls(int(data["cutter"]), Serving.from_json(data["serving"], radicand),
                   Scalar.parse(data["proportion"], radicand))


def cut_serving(m: KitchenMeasure, serving: Serving, proportion) -> tuple[Scalar, Serving]:
    """Smallest t with m(serving ∩ (0,t]) >= proportion * m(serving), and that prefix."""
    target = scalar(proportion) * m.value(serving)
    if not target:
        return ZERO, EMPTY
    acc = ZERO
    for lo, hi in serving.intervals:
        base = m.cdf(lo)
        part = m.cdf(hi) - base
        if acc + part >= target:
            tau = m.inverse_cdf(base + (target - acc))
            return tau, serving.prefix(tau)
        acc = acc + part
    raise AssertionError("target exceeds serving value")  # unreachable for proportion <= 1


def threshold_and_cut(m: KitchenMeasure, q: Query) -> tuple[Scalar, Serving]:
    return cut_serving(m, q.serving, q.proportion)


def respond(q: Query, profile: Sequence[KitchenMeasure]):
    """The two-entry record {S, cut piece} appraised by every agent."""
    from .records import Record

    if not 1 <= q.cutter <= len(profile):
        raise PreconditionError(f"no agent {q.cutter} in a profile of {len(profile)}")
    _, piece = threshold_and_cut(profile[q.cutter - 1], q)
    return Record((
        (q.serving, tuple(m.value(q.serving) for m in profile)),
        (piece, tuple(m.value(piece) for m in profile)),
    ))
