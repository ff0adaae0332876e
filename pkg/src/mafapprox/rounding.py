"""Threshold rounding of a fractional edge solution to a feasible cut.

With the first tree rooted at a leaf, ``D(e)`` is the set of edges below
and including ``e`` that are reachable from ``e`` without crossing a cut
edge, and ``w(e)`` is the fractional mass on ``D(e)``.  An edge is cut
when ``w(e) >= 1/4`` while every other edge of ``D(e)`` stays below 1/4;
this repeats until no uncut edge reaches 1/4.

A single post-order pass realises that loop: each edge accumulates its
own value plus what its uncut children pass up, is cut when the total
reaches 1/4, and then passes nothing further up.  Post-order always meets
a minimal violating edge first, and edges in disjoint subtrees do not
influence each other, so the result does not depend on sibling order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import InternalInconsistencyError
from .lp import LpModel
from .phylo import PhyloTree, RootedView, rooted_view
from .solution import EdgeCut, FractionalSolution, fraction_text

__all__ = [
    "QUARTER",
    "EdgeCut",
    "RoundingTrace",
    "RoundingCertificate",
    "round_quarter",
    "rounding_trace",
    "descendant_component",
    "rounding_certificate",
]

QUARTER = Fraction(1, 4)


def _values(t1: PhyloTree, xtilde) -> tuple[Fraction, ...]:
    vals = xtilde.values if isinstance(xtilde, FractionalSolution) else tuple(Fraction(v) for v in xtilde)
    if len(vals) != t1.num_edges:
        raise ValueError(f"solution has {len(vals)} values but the tree has {t1.num_edges} edges")
    if any(v < 0 for v in vals):
        raise ValueError("fractional solution has a negative value")
    return vals


@dataclass(frozen=True)
class RoundingTrace:
    """Cut produced by the pass plus the weight of each edge when it was cut."""

    cut: EdgeCut
    insertion_weight: dict[int, Fraction]
    order: tuple[int, ...]
    root: str


def _postorder(view: RootedView, reverse_children: bool) -> tuple[int, ...]:
    if not reverse_children:
        return view.postorder
    out = []
    stack = [(view.root_edge, False)]
    while stack:
        e, expanded = stack.pop()
        if expanded:
            out.append(e)
            continue
        stack.append((e, True))
        stack.extend((c, False) for c in view.child_edges[e])
    return tuple(out)


def rounding_trace(
    t1: PhyloTree,
    xtilde: FractionalSolution | Sequence,
    root: str | None = None,
    reverse_children: bool = False,
) -> RoundingTrace:
    """Run the rounding pass and record insertion-time weights.

    ``reverse_children`` visits siblings in the opposite order; the cut is
    the same either way.
    """
    vals = _values(t1, xtilde)
    view = rooted_view(t1, root)
    if t1.num_edges == 0:
        return RoundingTrace(EdgeCut(), {}, (), view.root)
    order = _postorder(view, reverse_children)
    passed = [Fraction(0)] * t1.num_edges
    cut = []
    weights = {}
    for e in order:
        w = vals[e] + sum((passed[f] for f in view.child_edges[e]), Fraction(0))
        if w >= QUARTER:
            cut.append(e)
            weights[e] = w
        else:
            passed[e] = w
    return RoundingTrace(EdgeCut(cut), weights, tuple(cut), view.root)


def round_quarter(t1: PhyloTree, xtilde: FractionalSolution | Sequence, root: str | None = None) -> EdgeCut:
    """Round ``xtilde`` to a cut of ``t1`` (root leaf defaults to the smallest label)."""
    return rounding_trace(t1, xtilde, root).cut


def descendant_component(view: RootedView, cut: EdgeCut, e: int) -> list[int]:
    """``D(e)``: ``e`` and the edges below it reachable without crossing ``cut``."""
    members = [e]
    stack = [e]
    while stack:
        f = stack.pop()
        for g in view.child_edges[f]:
            if g not in cut:
                members.append(g)
                stack.append(g)
    return sorted(members)


@dataclass(frozen=True)
class RoundingCertificate:
    cut_edges: tuple[int, ...]
    cut_size: int
    lp_objective: Fraction
    ratio_bound_ok: bool
    per_edge_w: dict[int, Fraction]
    disjoint_ok: bool
    uncut_below_quarter: bool
    path_mass_ok: bool
    feasible: bool | None = None
    root: str = ""
    max_uncut_w: Fraction = field(default=Fraction(0))

    @property
    def ok(self) -> bool:
        return (
            self.ratio_bound_ok
            and self.disjoint_ok
            and self.uncut_below_quarter
            and self.path_mass_ok
            and all(w >= QUARTER for w in self.per_edge_w.values())
            and self.feasible is not False
        )

    def to_dict(self) -> dict:
        return {
            "cut_edges": list(self.cut_edges),
            "cut_size": self.cut_size,
            "lp_objective": fraction_text(self.lp_objective),
            "ratio_bound_ok": self.ratio_bound_ok,
            "per_edge_w": {str(e): fraction_text(w) for e, w in sorted(self.per_edge_w.items())},
            "disjoint_ok": self.disjoint_ok,
            "uncut_below_quarter": self.uncut_below_quarter,
            "path_mass_ok": self.path_mass_ok,
            "feasible": self.feasible,
            "root": self.root,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)


def rounding_certificate(
    t1: PhyloTree,
    xtilde: FractionalSolution | Sequence,
    cut: EdgeCut,
    root: str | None = None,
    model: LpModel | None = None,
    strict: bool = True,
) -> RoundingCertificate:
    """Re-derive the rounding guarantees for ``cut`` from scratch.

    Every ``D(e)`` is recomputed against the final cut (for cut edges this
    equals ``D(e)`` at insertion time), and the following are checked:
    cut edges weigh at least 1/4, uncut edges weigh less, the ``D`` sets
    of cut edges are pairwise disjoint, ``|cut| <= 4 * sum(x)``, any two
    leaves left connected have path mass below 1/2, and (given ``model``)
    the cut covers every row.  With ``strict`` a failed check raises
    :class:`InternalInconsistencyError`.
    """
    vals = _values(t1, xtilde)
    view = rooted_view(t1, root)
    total = sum(vals, Fraction(0))
    cut_set = set(cut.edges)
    if any(not 0 <= e < t1.num_edges for e in cut_set):
        raise ValueError("cut references an edge outside the tree")

    per_edge = {}
    uncut_ok = True
    max_uncut = Fraction(0)
    covered: set[int] = set()
    disjoint = True
    mass_in_d = Fraction(0)
    for e in range(t1.num_edges):
        d = descendant_component(view, cut, e)
        w = sum((vals[f] for f in d), Fraction(0))
        if e in cut_set:
            per_edge[e] = w
            mass_in_d += w
            if covered.intersection(d):
                disjoint = False
            covered.update(d)
        else:
            max_uncut = max(max_uncut, w)
            if w >= QUARTER:
                uncut_ok = False
    ratio_ok = len(cut_set) <= 4 * total and mass_in_d <= total

    # leaves joined in T1 - cut carry less than 1/2 along their path
    cut_mask = cut.mask
    path_ok = True
    paths = t1.leaf_path_masks
    for a in range(t1.n):
        for b in range(a + 1, t1.n):
            mask = paths[a][b]
            if mask & cut_mask:
                continue
            mass = Fraction(0)
            while mask:
                low = mask & -mask
                mass += vals[low.bit_length() - 1]
                mask ^= low
            if mass >= Fraction(1, 2):
                path_ok = False

    feasible = model.is_feasible_cut(cut) if model is not None else None
    cert = RoundingCertificate(
        cut_edges=tuple(sorted(cut_set)),
        cut_size=len(cut_set),
        lp_objective=total,
        ratio_bound_ok=ratio_ok,
        per_edge_w=per_edge,
        disjoint_ok=disjoint,
        uncut_below_quarter=uncut_ok,
        path_mass_ok=path_ok,
        feasible=feasible,
        root=view.root,
        max_uncut_w=max_uncut,
    )
    if strict and not cert.ok:
        raise InternalInconsistencyError(f"rounding certificate failed: {cert.to_dict()}")
    return cert
