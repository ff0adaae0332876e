"""Value types shared by the solver, rounding and forest modules."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable


@dataclass(frozen=True)
class EdgeCut:
    """A set of edge indices of the first tree, kept in ascending order."""

    edges: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(sorted(set(self.edges))))

    @classmethod
    def of(cls, edges: Iterable[int]) -> "EdgeCut":
        return cls(tuple(edges))

    @property
    def mask(self) -> int:
        m = 0
        for e in self.edges:
            m |= 1 << e
        return m

    def __len__(self):
        return len(self.edges)

    def __iter__(self):
        return iter(self.edges)

    def __contains__(self, e):
        return e in self.edges


@dataclass(frozen=True)
class FractionalSolution:
    """Exact rational value per edge variable.

    ``constraint_duals`` optionally carries the optimal dual values (one
    per model constraint) that certify optimality.
    """

    values: tuple[Fraction, ...]
    constraint_duals: tuple[Fraction, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        vals = tuple(Fraction(v) for v in self.values)
        if any(v < 0 for v in vals):
            raise ValueError("fractional solution has a negative value")
        object.__setattr__(self, "values", vals)

    @property
    def objective(self) -> Fraction:
        return sum(self.values, Fraction(0))

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class IntegralSolution:
    """A 0/1 solution given by its cut.

    ``optimal`` is False only for incumbents reported after a budget stop;
    ``lower_bound`` is the best proven bound on the optimum.
    """

    cut: EdgeCut
    optimal: bool = True
    lower_bound: int | None = None
    nodes: int = 0
    method: str = ""

    @property
    def objective(self) -> int:
        return len(self.cut)


def fraction_text(q: Fraction) -> str:
    """``p/q`` rendering (``p`` for integers)."""
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def fraction_decimal(q: Fraction, digits: int = 12) -> str:
    """Fixed-precision decimal rendering, rounded half to even."""
    q = Fraction(q)
    scaled = round(q * 10**digits)
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    whole, frac = divmod(scaled, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"
