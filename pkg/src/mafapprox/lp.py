"""The edge-cut covering program and its solvers.

One variable per edge of the first tree, one ``>= 1`` row per distinct
incompatible-quartet edge set, objective ``sum(x)``.  The relaxation is
solved exactly; the integer program is solved exactly either by
exhaustive enumeration (small trees) or by LP-based branch and bound.

The relaxation carries the upper bounds ``x <= 1``; with 0/1 rows and a
minimisation objective they never bind at an optimum.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Sequence

from ._simplex import solve_covering
from .errors import BudgetExhausted, InternalInconsistencyError
from .phylo import PhyloTree
from .quartets import QuartetConstraint, incompatible_quartets
from .solution import EdgeCut, FractionalSolution, IntegralSolution

__all__ = [
    "LpModel",
    "build_model",
    "solve_lp",
    "solve_lp_float",
    "solve_ilp_exact",
    "solve_ilp_exhaustive",
    "check_lp_optimality",
    "DEFAULT_BUDGET",
    "EXHAUSTIVE_MAX_VARS",
]

DEFAULT_BUDGET = 10**6
EXHAUSTIVE_MAX_VARS = 20


@dataclass(frozen=True)
class LpModel:
    """``min sum(x)`` subject to ``sum(x[e] for e in row) >= 1`` per row."""

    num_vars: int
    constraints: tuple[tuple[int, ...], ...]
    quartets: tuple[QuartetConstraint, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        rows = tuple(tuple(sorted(set(row))) for row in self.constraints)
        for row in rows:
            if not row:
                raise ValueError("empty constraint")
            if row[0] < 0 or row[-1] >= self.num_vars:
                raise ValueError(f"constraint {row} references a variable out of range")
        if len(set(rows)) != len(rows):
            raise ValueError("duplicate constraints")
        object.__setattr__(self, "constraints", rows)

    @cached_property
    def masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << e for e in row) for row in self.constraints)

    def violated(self, cut: EdgeCut | int) -> list[int]:
        """Indices of the rows a 0/1 vector (given as a cut) leaves uncovered."""
        mask = cut if isinstance(cut, int) else cut.mask
        return [k for k, m in enumerate(self.masks) if not m & mask]

    def is_feasible_cut(self, cut: EdgeCut | int) -> bool:
        mask = cut if isinstance(cut, int) else cut.mask
        return all(m & mask for m in self.masks)

    def row_sums(self, x: FractionalSolution) -> list[Fraction]:
        return [sum((x.values[e] for e in row), Fraction(0)) for row in self.constraints]

    def is_feasible_fractional(self, x: FractionalSolution) -> bool:
        if len(x.values) != self.num_vars:
            return False
        return all(s >= 1 for s in self.row_sums(x))

    def dump(self) -> str:
        """Plain inequality listing: ``e1 e2 ... >= 1`` per row."""
        head = f"# minimize sum of x0..x{self.num_vars - 1}, 0 <= x <= 1\n"
        return head + "".join(" ".join(map(str, row)) + " >= 1\n" for row in self.constraints)


def build_model(trees: Sequence[PhyloTree], drop_dominated: bool = False) -> LpModel:
    quartets = incompatible_quartets(trees, drop_dominated=drop_dominated)
    return LpModel(
        num_vars=trees[0].num_edges,
        constraints=tuple(q.lq_edges for q in quartets),
        quartets=tuple(quartets),
    )


# ---------------------------------------------------------------------- #
# relaxation


def check_lp_optimality(model: LpModel, x: FractionalSolution, y: Sequence[Fraction], z: Sequence[Fraction]) -> None:
    """Verify primal feasibility, dual feasibility and equal objectives.

    Raises :class:`InternalInconsistencyError` if any check fails.
    """
    if len(x.values) != model.num_vars:
        raise InternalInconsistencyError("solution length does not match the model")
    if any(v < 0 or v > 1 for v in x.values):
        raise InternalInconsistencyError("primal value outside [0, 1]")
    if not model.is_feasible_fractional(x):
        raise InternalInconsistencyError("LP solution violates a covering row")
    if any(v < 0 for v in y) or any(v < 0 for v in z):
        raise InternalInconsistencyError("negative dual value")
    load = [Fraction(0)] * model.num_vars
    for yq, row in zip(y, model.constraints):
        if yq:
            for e in row:
                load[e] += yq
    if any(load[e] - z[e] > 1 for e in range(model.num_vars)):
        raise InternalInconsistencyError("dual solution infeasible")
    dual_value = sum(y, Fraction(0)) - sum(z, Fraction(0))
    if dual_value != x.objective:
        raise InternalInconsistencyError(f"duality gap {x.objective - dual_value} is not zero")


def solve_lp(model: LpModel) -> FractionalSolution:
    """Exact optimal vertex of the relaxation, certified by strong duality."""
    used = sorted({e for row in model.constraints for e in row})
    local = {e: k for k, e in enumerate(used)}
    rows = [[local[e] for e in row] for row in model.constraints]
    xs, y, zs, _ = solve_covering(rows, len(used))
    values = [Fraction(0)] * model.num_vars
    z = [Fraction(0)] * model.num_vars
    for e, k in local.items():
        values[e] = xs[k]
        z[e] = zs[k]
    solution = FractionalSolution(tuple(values), constraint_duals=tuple(y))
    check_lp_optimality(model, solution, y, z)
    return solution


def solve_lp_float(model: LpModel) -> tuple[list[float], float]:
    """Floating-point relaxation via HiGHS; for timing comparisons only."""
    import numpy as np
    from scipy.optimize import linprog
    from scipy.sparse import lil_matrix

    if not model.constraints:
        return [0.0] * model.num_vars, 0.0
    a = lil_matrix((len(model.constraints), model.num_vars))
    for k, row in enumerate(model.constraints):
        for e in row:
            a[k, e] = -1.0
    res = linprog(
        np.ones(model.num_vars),
        A_ub=a.tocsr(),
        b_ub=-np.ones(len(model.constraints)),
        bounds=(0, 1),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-9},
    )
    if res.status != 0:
        raise RuntimeError(f"HiGHS failed: {res.message}")
    return [float(v) for v in res.x], float(res.fun)


# ---------------------------------------------------------------------- #
# integer program


def solve_ilp_exhaustive(model: LpModel) -> IntegralSolution:
    """Smallest feasible cut by enumerating subsets in order of size.

    Within one size, subsets are tried in lexicographic order, so the
    result is the lexicographically first optimal cut.
    """
    masks = model.masks
    if not masks:
        return IntegralSolution(EdgeCut(), lower_bound=0, method="exhaustive")
    count = 0
    for size in range(model.num_vars + 1):
        for combo in combinations(range(model.num_vars), size):
            count += 1
            cut = 0
            for e in combo:
                cut |= 1 << e
            if all(m & cut for m in masks):
                return IntegralSolution(EdgeCut(combo), lower_bound=size, nodes=count, method="exhaustive")
    raise InternalInconsistencyError("no feasible cut, but cutting every edge is always feasible")


def _sub_model(model: LpModel, ones: frozenset, zeros: frozenset):
    """Rows left after fixing variables; None if some row can no longer be covered."""
    rows = []
    seen = set()
    for row in model.constraints:
        if ones.intersection(row):
            continue
        rest = tuple(e for e in row if e not in zeros)
        if not rest:
            return None
        if rest not in seen:
            seen.add(rest)
            rows.append(rest)
    return rows


def solve_ilp_exact(model: LpModel, budget: int = DEFAULT_BUDGET, method: str = "auto") -> IntegralSolution:
    """Optimal 0/1 solution.

    ``method`` is ``"exhaustive"``, ``"bnb"`` or ``"auto"`` (exhaustive when
    the model has at most 20 variables).  Branch and bound explores nodes
    best-bound first, bounds each node by the ceiling of its LP value and
    branches on the most fractional variable (lowest index on ties),
    trying ``x = 1`` before ``x = 0``.  Raises :class:`BudgetExhausted`
    after ``budget`` nodes.
    """
    if method == "auto":
        method = "exhaustive" if model.num_vars <= EXHAUSTIVE_MAX_VARS else "bnb"
    if method == "exhaustive":
        return solve_ilp_exhaustive(model)
    if method != "bnb":
        raise ValueError(f"unknown method {method!r}")
    if not model.constraints:
        return IntegralSolution(EdgeCut(), lower_bound=0, method="bnb")

    # every variable used by some row: a trivially feasible incumbent
    incumbent = frozenset(e for row in model.constraints for e in row)
    half = Fraction(1, 2)
    root_bound = None
    nodes = 0
    heap = []
    tick = 0

    def evaluate(ones, zeros):
        rows = _sub_model(model, ones, zeros)
        if rows is None:
            return None
        sub = LpModel(model.num_vars, tuple(rows)) if rows else None
        x = solve_lp(sub) if sub else FractionalSolution((Fraction(0),) * model.num_vars)
        return len(ones) + math.ceil(x.objective), x

    first = evaluate(frozenset(), frozenset())
    root_bound = first[0]
    heapq.heappush(heap, (first[0], tick, frozenset(), frozenset(), first[1]))
    while heap:
        bound, _, ones, zeros, x = heapq.heappop(heap)
        if bound >= len(incumbent):
            continue
        nodes += 1
        if nodes > budget:
            lower = min([bound] + [h[0] for h in heap])
            best = IntegralSolution(
                EdgeCut(incumbent), optimal=False, lower_bound=lower, nodes=nodes - 1, method="bnb"
            )
            raise BudgetExhausted(f"branch and bound stopped after {budget} nodes", best, lower, nodes - 1)
        frac = [(abs(v - half), e) for e, v in enumerate(x.values) if v.denominator != 1]
        if not frac:
            candidate = ones | {e for e, v in enumerate(x.values) if v == 1}
            if len(candidate) < len(incumbent):
                incumbent = frozenset(candidate)
            continue
        _, branch = min(frac)
        for child_ones, child_zeros in ((ones | {branch}, zeros), (ones, zeros | {branch})):
            result = evaluate(child_ones, child_zeros)
            if result is None:
                continue
            cb, cx = result
            if cb < len(incumbent):
                tick += 1
                heapq.heappush(heap, (cb, tick, child_ones, child_zeros, cx))
    if not model.is_feasible_cut(EdgeCut(incumbent)):
        raise InternalInconsistencyError("branch and bound returned an infeasible cut")
    return IntegralSolution(EdgeCut(incumbent), lower_bound=len(incumbent), nodes=nodes, method="bnb")
