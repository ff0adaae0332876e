"""Quartet topologies and the incompatible quartets of a tree set.

Quartet topologies are read off leaf-to-leaf distances: in a binary tree
``ab|cd`` holds exactly when ``d(a,b) + d(c,d)`` is the strictly smallest of
the three pairwise sums.  Leaf paths are kept as integer bitmasks over the
edges of the first tree, so ``L(Q)`` for a quartet ``ab|cd`` is just the
union of two masks.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .errors import TreeError
from .phylo import PhyloTree, _bits

__all__ = [
    "QuartetTopology",
    "QuartetConstraint",
    "quartet_topology",
    "incompatible_quartets",
    "format_constraints",
]


@dataclass(frozen=True)
class QuartetTopology:
    """The split ``pairs[0] | pairs[1]`` induced on four taxa.

    Both pairs are sorted and the pair holding the smallest label comes
    first, so equal splits compare equal however they were produced.
    """

    pairs: tuple[tuple[str, str], tuple[str, str]]

    @property
    def taxa(self) -> tuple[str, ...]:
        return tuple(sorted(self.pairs[0] + self.pairs[1]))

    def __str__(self):
        (a, b), (c, d) = self.pairs
        return f"{a}{b}|{c}{d}" if max(map(len, (a, b, c, d))) == 1 else f"{a} {b} | {c} {d}"

    @classmethod
    def from_pairs(cls, ab, cd) -> "QuartetTopology":
        p, q = tuple(sorted(ab)), tuple(sorted(cd))
        return cls((p, q) if p < q else (q, p))


def _split_code(dist, a: int, b: int, c: int, d: int) -> int:
    """0 for ab|cd, 1 for ac|bd, 2 for ad|bc."""
    s0 = dist[a][b] + dist[c][d]
    s1 = dist[a][c] + dist[b][d]
    s2 = dist[a][d] + dist[b][c]
    if s0 < s1 and s0 < s2:
        return 0
    if s1 < s2:
        return 1
    return 2


def _split_pairs(code: int, a, b, c, d):
    if code == 0:
        return (a, b), (c, d)
    if code == 1:
        return (a, c), (b, d)
    return (a, d), (b, c)


def quartet_topology(tree: PhyloTree, quartet: Sequence[str]) -> QuartetTopology:
    """Topology of ``tree`` restricted to the four taxa in ``quartet``."""
    if len(quartet) != 4 or len(set(quartet)) != 4:
        raise TreeError("a quartet needs exactly four distinct taxa")
    a, b, c, d = tree.taxa(quartet)
    code = _split_code(tree.leaf_distances, a, b, c, d)
    ab, cd = _split_pairs(code, *quartet)
    return QuartetTopology.from_pairs(ab, cd)


@dataclass(frozen=True)
class QuartetConstraint:
    """One incompatible quartet and the ILP row it induces.

    ``split`` is the topology in the first tree; ``witness`` is the 0-based
    index of the first other tree disagreeing on it; ``lq_edges`` holds the
    first tree's edges on the two cherry paths, ``mask`` the same as a bitmask.
    """

    split: QuartetTopology
    witness: int
    lq_edges: tuple[int, ...]
    mask: int

    @property
    def quartet(self) -> tuple[str, ...]:
        return self.split.taxa

    def dump(self) -> str:
        edges = ",".join(map(str, self.lq_edges))
        return f"Q=({','.join(self.quartet)}) witness={self.witness} L(Q)=[{edges}]"


def _check_tree_set(trees: Sequence[PhyloTree]):
    if len(trees) < 2:
        raise TreeError("at least two trees are required")
    labels = trees[0].labels
    for i, tree in enumerate(trees[1:], start=1):
        if tree.labels != labels:
            raise TreeError(f"tree {i} has a different taxon set than tree 0")


def incompatible_quartets(trees: Sequence[PhyloTree], drop_dominated: bool = False) -> list[QuartetConstraint]:
    """All quartets on which some tree disagrees with ``trees[0]``.

    Quartets are scanned in lexicographic order of taxon ids; each keeps the
    smallest witness index.  Constraints whose ``lq_edges`` coincide with an
    earlier one are dropped.  With ``drop_dominated``, constraints whose edge
    set contains another constraint's edge set are removed as well (this
    does not change the feasible region).
    """
    _check_tree_set(trees)
    t1 = trees[0]
    n = t1.n
    if n < 4:
        return []
    d1 = t1.leaf_distances
    others = [(i, tree.leaf_distances) for i, tree in enumerate(trees[1:], start=1)]
    paths = t1.leaf_path_masks
    labels = t1.labels
    seen = set()
    out = []
    for a, b, c, d in combinations(range(n), 4):
        code = _split_code(d1, a, b, c, d)
        for i, di in others:
            if _split_code(di, a, b, c, d) != code:
                (p, q), (r, s) = _split_pairs(code, a, b, c, d)
                mask = paths[p][q] | paths[r][s]
                if mask not in seen:
                    seen.add(mask)
                    split = QuartetTopology.from_pairs((labels[p], labels[q]), (labels[r], labels[s]))
                    out.append(QuartetConstraint(split, i, tuple(_bits(mask)), mask))
                break
    if drop_dominated:
        out = _drop_dominated(out)
    return out


def _drop_dominated(constraints):
    by_size = sorted(constraints, key=lambda q: (len(q.lq_edges), q.lq_edges))
    kept_masks = []
    kept = set()
    for con in by_size:
        if any(m & con.mask == m for m in kept_masks):
            continue
        kept_masks.append(con.mask)
        kept.add(con.mask)
    return [con for con in constraints if con.mask in kept]


def format_constraints(constraints: Sequence[QuartetConstraint]) -> str:
    """Debug dump, one constraint per line."""
    return "".join(con.dump() + "\n" for con in constraints)
