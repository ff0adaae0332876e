"""Agreement forests: construction from cuts, verification and exact search.

Verification works directly from the definition and never looks at
quartets: every block must induce the same restricted topology in each
tree (checked against the first tree), and within each tree the minimal
subtrees spanning different blocks must not share an edge.  This keeps it
independent of the covering program it is used to cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .errors import InternalInconsistencyError, PartitionError, SizeGuardError, TreeError
from .lp import EXHAUSTIVE_MAX_VARS, LpModel, build_model
from .phylo import PhyloTree, _steiner_child_vertices, restricted_form
from .solution import EdgeCut

__all__ = [
    "AgreementForest",
    "Verdict",
    "EquivalenceReport",
    "TbrEstimate",
    "partition_from_cut",
    "minimal_cut",
    "verify_af",
    "verify_cut_feasibility_equivalence",
    "brute_force_maf",
    "tbr_estimate",
]


@dataclass(frozen=True)
class AgreementForest:
    """A partition of the taxa; blocks sorted internally and by smallest label."""

    components: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        blocks = tuple(sorted(tuple(sorted(b)) for b in self.components))
        object.__setattr__(self, "components", blocks)

    @classmethod
    def of(cls, blocks: Iterable[Iterable[str]]) -> "AgreementForest":
        return cls(tuple(tuple(b) for b in blocks))

    @property
    def k(self) -> int:
        return len(self.components)

    def to_dict(self, cut: EdgeCut | None = None, exact: bool | None = None) -> dict:
        out = {"components": [list(b) for b in self.components], "k": self.k}
        if cut is not None:
            out["cut_edges"] = list(cut.edges)
        if exact is not None:
            out["exact"] = exact
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "AgreementForest":
        if "forest" in data and "components" not in data:
            data = data["forest"]
        try:
            return cls.of(data["components"])
        except (KeyError, TypeError):
            raise PartitionError("forest JSON needs a 'components' list of label lists") from None


def partition_from_cut(t1: PhyloTree, cut: EdgeCut) -> AgreementForest:
    """Group the taxa by connected component of ``t1`` minus the cut edges."""
    for e in cut.edges:
        if not 0 <= e < t1.num_edges:
            raise TreeError(f"edge index {e} out of range for a tree with {t1.num_edges} edges")
    # union along uncut edges; parent pointers point to lower vertex ids
    rep = list(range(t1.num_vertices))

    def find(v):
        while rep[v] != v:
            rep[v] = rep[rep[v]]
            v = rep[v]
        return v

    cut_set = set(cut.edges)
    for v in range(1, t1.num_vertices):
        if v - 1 not in cut_set:
            a, b = find(v), find(t1.parent[v])
            if a != b:
                rep[max(a, b)] = min(a, b)
    groups: dict[int, list[str]] = {}
    for t, v in enumerate(t1.leaf_vertex):
        groups.setdefault(find(v), []).append(t1.labels[t])
    return AgreementForest.of(groups.values())


def minimal_cut(t1: PhyloTree, forest: AgreementForest) -> EdgeCut:
    """A cut of size ``k - 1`` whose partition is ``forest``.

    Requires the blocks' minimal subtrees in ``t1`` to be edge-disjoint
    (true for every agreement forest).  Edges inside a block's subtree are
    never cut; elsewhere, a vertex joining several block-carrying branches
    keeps the first and cuts the rest.
    """
    block_of = {}
    for h, block in enumerate(forest.components):
        for label in block:
            block_of[t1.taxon(label)] = h
    if len(block_of) != t1.n:
        raise PartitionError("forest does not cover the taxa of the tree")
    in_block = {}
    for h, block in enumerate(forest.components):
        if len(block) > 1:
            for v in _steiner_child_vertices(t1, t1.taxa(block)):
                if v in in_block:
                    raise PartitionError("blocks overlap in the first tree")
                in_block[v] = h
    # vertex_block[v]: block whose subtree contains v, if any
    vertex_block = {}
    for v, h in in_block.items():
        vertex_block[v] = h
        vertex_block[t1.parent[v]] = h
    for t, v in enumerate(t1.leaf_vertex):
        vertex_block[v] = block_of[t]

    carried = [None] * t1.num_vertices
    cut = []
    for v in range(t1.num_vertices - 1, -1, -1):
        own = vertex_block.get(v)
        for c in t1.children[v]:
            if carried[c] is None:
                continue
            if in_block.get(c) is not None:
                continue  # edge inside a block subtree
            if own is None:
                own = carried[c]
                continue
            cut.append(c - 1)
        carried[v] = own
    result = EdgeCut(cut)
    if len(result) != forest.k - 1 or partition_from_cut(t1, result) != forest:
        raise InternalInconsistencyError("could not rebuild a minimal cut for the forest")
    return result


@dataclass(frozen=True)
class Verdict:
    """Outcome of :func:`verify_af`; ``witness`` explains a rejection."""

    accepted: bool
    witness: dict | None = None

    def __bool__(self):
        return self.accepted

    def to_dict(self) -> dict:
        return {"verdict": "ACCEPT" if self.accepted else "REJECT", "witness": self.witness}


def _check_partition(labels: Sequence[str], forest: AgreementForest):
    seen = set()
    for block in forest.components:
        if not block:
            raise PartitionError("empty block")
        for label in block:
            if label in seen:
                raise PartitionError(f"taxon {label!r} appears in two blocks")
            seen.add(label)
    if seen != set(labels):
        missing = sorted(set(labels) - seen)
        extra = sorted(seen - set(labels))
        raise PartitionError(f"blocks do not partition the taxa (missing {missing[:5]}, unknown {extra[:5]})")


def verify_af(trees: Sequence[PhyloTree], forest: AgreementForest) -> Verdict:
    """Check both agreement-forest conditions, returning the first violation.

    Restrictions are compared against the first tree only, which suffices
    because isomorphism is transitive.
    """
    if not trees:
        raise TreeError("no trees given")
    labels = trees[0].labels
    for tree in trees[1:]:
        if tree.labels != labels:
            raise TreeError("trees have different taxon sets")
    _check_partition(labels, forest)
    t1 = trees[0]
    id_blocks = [sorted(t1.taxa(block)) for block in forest.components]

    for h, ids in enumerate(id_blocks):
        if len(ids) < 4:
            continue
        form = restricted_form(t1, ids)
        for i, tree in enumerate(trees[1:], start=1):
            if restricted_form(tree, ids) != form:
                return Verdict(
                    False,
                    {"type": "non_isomorphic", "trees": [0, i], "component": list(forest.components[h])},
                )

    for i, tree in enumerate(trees):
        owner: dict[int, int] = {}
        for h, ids in enumerate(id_blocks):
            if len(ids) < 2:
                continue
            for v in _steiner_child_vertices(tree, ids):
                other = owner.setdefault(v - 1, h)
                if other != h:
                    return Verdict(
                        False,
                        {
                            "type": "overlap",
                            "tree": i,
                            "components": [list(forest.components[other]), list(forest.components[h])],
                            "edge": v - 1,
                        },
                    )
    return Verdict(True)


@dataclass(frozen=True)
class EquivalenceReport:
    ilp_feasible: bool
    forest: AgreementForest
    verdict: Verdict

    @property
    def agree(self) -> bool:
        return self.ilp_feasible == self.verdict.accepted


def verify_cut_feasibility_equivalence(
    trees: Sequence[PhyloTree], cut: EdgeCut, model: LpModel | None = None
) -> EquivalenceReport:
    """Evaluate a cut both as a 0/1 program solution and as a forest.

    A cut is feasible for the covering program exactly when its partition
    is an agreement forest; disagreement raises
    :class:`InternalInconsistencyError`.
    """
    if model is None:
        model = build_model(trees)
    forest = partition_from_cut(trees[0], cut)
    report = EquivalenceReport(model.is_feasible_cut(cut), forest, verify_af(trees, forest))
    if not report.agree:
        raise InternalInconsistencyError(
            f"cut {list(cut.edges)}: program feasible={report.ilp_feasible} "
            f"but forest verdict={report.verdict.to_dict()}"
        )
    return report


def brute_force_maf(trees: Sequence[PhyloTree]) -> tuple[AgreementForest, EdgeCut]:
    """Maximum agreement forest by enumerating cuts of the first tree by size.

    Only for trees with at most 20 edges.  The first cut (smallest size,
    then lexicographic) whose partition verifies is returned; its forest
    has exactly ``len(cut) + 1`` components.
    """
    t1 = trees[0]
    if t1.num_edges > EXHAUSTIVE_MAX_VARS:
        raise SizeGuardError(f"brute force limited to {EXHAUSTIVE_MAX_VARS} edges, tree has {t1.num_edges}")
    for size in range(t1.num_edges + 1):
        for combo in combinations(range(t1.num_edges), size):
            cut = EdgeCut(combo)
            forest = partition_from_cut(t1, cut)
            if forest.k != size + 1:
                continue  # a smaller cut gives the same partition
            if verify_af(trees, forest):
                return forest, cut
    raise InternalInconsistencyError("no agreement forest found; all-singletons always qualifies")


@dataclass(frozen=True)
class TbrEstimate:
    value: int
    label: str


def tbr_estimate(k: int, t: int, exact: bool = True) -> TbrEstimate | None:
    """TBR distance (``k - 1``) for two trees; None for more than two."""
    if k < 1:
        raise ValueError("component count must be positive")
    if t != 2:
        return None
    if exact:
        return TbrEstimate(k - 1, "TBR distance")
    return TbrEstimate(k - 1, "TBR upper bound ×4-approx")
