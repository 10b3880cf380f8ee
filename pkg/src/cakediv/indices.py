"""Entitlement profiles, clonage/precision/fineness, bound calculators, level schedules."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .errors import PreconditionError
from .exact import ONE, ZERO, Scalar, scalar

INFINITY = math.inf
Index = Union[int, float]  # a positive int, or INFINITY


@dataclass(frozen=True)
class EntitlementProfile:
    entitlements: tuple[Scalar, ...]

    def __post_init__(self):
        ents = tuple(scalar(e) for e in self.entitlements)
        object.__setattr__(self, "entitlements", ents)
        if not ents:
            raise PreconditionError("empty entitlement profile")
        if any(e < ZERO or e > ONE for e in ents):
            raise PreconditionError("entitlements must lie in [0,1]")
        if sum(ents, ZERO) != ONE:
            raise PreconditionError(f"entitlements sum to {sum(ents, ZERO)}, not 1")

    @classmethod
    def parse(cls, text: str, radicand: int = 5) -> "EntitlementProfile":
        """Comma-separated Scalars, or ``golden`` for the two-agent golden-ratio split."""
        text = text.strip()
        if text == "golden":
            g = Scalar.parse("golden", radicand)
            return cls((g, ONE - g))
        return cls(tuple(Scalar.parse(part, radicand) for part in text.split(",")))

    @property
    def n(self) -> int:
        return len(self.entitlements)

    def __getitem__(self, agent: int) -> Scalar:
        return self.entitlements[agent - 1]

    def __iter__(self):
        return iter(self.entitlements)

    def __len__(self) -> int:
        return len(self.entitlements)

    def is_rational(self) -> bool:
        return all(e.is_rational() for e in self.entitlements)

    def fractions(self) -> tuple[Fraction, ...]:
        return tuple(e.as_fraction() for e in self.entitlements)

    def to_json(self) -> list:
        return [str(e) for e in self.entitlements]


@dataclass(frozen=True)
class IndexReport:
    clonage: Index
    precision: Index
    fineness: int

    def to_json(self) -> dict:
        return {k: _index_json(getattr(self, k)) for k in ("clonage", "precision", "fineness")}


def _index_json(x: Index):
    return "infinity" if x == INFINITY else x


def precision_of(e: Scalar) -> Index:
    return e.as_fraction().denominator if e.is_rational() else INFINITY


def fineness_of(e: Scalar) -> int:
    """Least m with 1/m <= e (1 for a zero entitlement)."""
    if not e:
        return 1
    return math.ceil(ONE / e)


def compute_indices(e: EntitlementProfile) -> IndexReport:
    fineness = max(fineness_of(x) for x in e)
    if not e.is_rational():
        return IndexReport(INFINITY, INFINITY, fineness)
    dens = [f.denominator for f in e.fractions()]
    return IndexReport(math.lcm(*dens), max(dens), fineness)


def _require_positive(*args: int) -> None:
    for a in args:
        if not isinstance(a, int) or a <= 0:
            raise PreconditionError(f"bound arguments must be positive integers, got {a!r}")


def prop1(p: int) -> int:
    """Largest c >= 0 with p >= 2**(2**c - 1)."""
    _require_positive(p)
    c = 0
    while p >= 1 << ((1 << (c + 1)) - 1):
        c += 1
    return c


def theorem1(c: int, n: int) -> int:
    """Largest k >= 0 with (2**(2**k - 1))**(n-1) <= c."""
    _require_positive(c, n)
    if n < 2:
        raise PreconditionError("theorem1 needs n >= 2")
    k = 0
    while (1 << (((1 << (k + 1)) - 1) * (n - 1))) <= c:
        k += 1
    return k


def cf_upper(c: int, n: int) -> int:
    """2(n-1)·ceil(log2 c)."""
    _require_positive(c, n)
    return 2 * (n - 1) * (c - 1).bit_length()


@dataclass(frozen=True)
class LogBound:
    """The quantity factor·log_3(argument), kept exact; ``approx`` is for display."""

    factor: int
    argument: int

    @property
    def approx(self) -> float:
        return self.factor * math.log(self.argument, 3)

    def to_json(self) -> dict:
        return {"factor": self.factor, "log3_of": self.argument, "approx": self.approx}


def cf2_lower(f: int, n: int) -> LogBound:
    _require_positive(f, n)
    return LogBound(n - 1, f)


def bound(kind: str, *args: int):
    table = {"theorem1": theorem1, "prop1": prop1, "cf_upper": cf_upper, "cf2_lower": cf2_lower}
    if kind not in table:
        raise PreconditionError(f"unknown bound {kind!r}; choose from {sorted(table)}")
    return table[kind](*args)


def next_level(level: int) -> int:
    """floor(sqrt(level/2))."""
    return math.isqrt(level // 2)


def adversary_schedule(mode: str, c_star: int) -> tuple[int, ...]:
    if c_star < 0:
        raise PreconditionError("c* must be nonnegative")
    if mode == "paper":
        levels = [2 ** (3 ** c_star)]
        for _ in range(c_star):
            levels.append(next_level(levels[-1]))
        return tuple(levels)
    if mode == "minimal":
        levels = [2]
        for _ in range(c_star):
            levels.append(2 * levels[-1] ** 2)
        return tuple(reversed(levels))
    raise PreconditionError(f"unknown schedule mode {mode!r}")


def e_m_profile(m: int, n: int = 2) -> EntitlementProfile:
    """(1/2 - 1/(2m+1), 1/2 + 1/(2m+1), 0, ...): fineness 3, precision 4m+2."""
    delta = Fraction(1, 2 * m + 1)
    return EntitlementProfile((Fraction(1, 2) - delta, Fraction(1, 2) + delta) + (0,) * (n - 2))


def profile_from(values: Sequence) -> EntitlementProfile:
    return values if isinstance(values, EntitlementProfile) else EntitlementProfile(tuple(values))
