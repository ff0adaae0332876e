"""Instance generators: the caterpillar grid family and random tree sets.

The grid pair for side length ``ell`` has taxa ``(i,j)`` with
``1 <= i, j <= ell``.  Both trees are caterpillars; the first lists the
leaves by row (``i`` then ``j``), the second by column (``j`` then ``i``).
Any agreement forest of the pair has at least ``ell**2 - 2*ell + 2``
components, while the quarter-on-every-pendant-edge solution is feasible
for the LP relaxation with value ``ell**2 / 4``.  The analytic bound is
proved for ``ell >= 4``; smaller sizes are generated for oracle tests.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

from .errors import TreeError
from .lp import FractionalSolution
from .phylo import PhyloTree, caterpillar

__all__ = [
    "grid_label",
    "grid_orders",
    "generate_caterpillar_grid",
    "separating_edges",
    "quarter_pendant_solution",
    "lemma5_fractional",
    "af_component_lower_bound",
    "ilp_lower_bound",
    "certified_gap",
    "RandomInstanceSpec",
    "random_tree",
    "random_instance",
]


def grid_label(i: int, j: int) -> str:
    return f"({i},{j})"


def grid_orders(ell: int) -> tuple[list[str], list[str]]:
    """Leaf orders along the spines of the two grid caterpillars."""
    rows = [grid_label(i, j) for i in range(1, ell + 1) for j in range(1, ell + 1)]
    cols = [grid_label(i, j) for j in range(1, ell + 1) for i in range(1, ell + 1)]
    return rows, cols


def generate_caterpillar_grid(ell: int) -> tuple[PhyloTree, PhyloTree]:
    if ell < 2:
        raise ValueError("grid side length must be at least 2")
    rows, cols = grid_orders(ell)
    return caterpillar(rows), caterpillar(cols)


def separating_edges(tree: PhyloTree, role: Literal["T1", "T2"], ell: int) -> list[int]:
    """Edges lying on every path between consecutive row (or column) blocks.

    For ``role="T1"`` block ``i`` is row ``i``; for ``"T2"`` it is column
    ``j``.  Returns one edge per consecutive block pair, in block order.
    """
    if role not in ("T1", "T2"):
        raise ValueError("role must be 'T1' or 'T2'")
    expected = {grid_label(i, j) for i in range(1, ell + 1) for j in range(1, ell + 1)}
    if set(tree.labels) != expected:
        raise TreeError(f"tree is not over the {ell}x{ell} grid taxa")

    def block(k):
        if role == "T1":
            return [tree.taxon(grid_label(k, j)) for j in range(1, ell + 1)]
        return [tree.taxon(grid_label(i, k)) for i in range(1, ell + 1)]

    paths = tree.leaf_path_masks
    result = []
    for k in range(1, ell):
        common = -1
        for a in block(k):
            for b in block(k + 1):
                common &= paths[a][b]
        if common == 0 or common & (common - 1):
            raise TreeError(f"tree does not have the caterpillar-grid shape (block {k})")
        result.append(common.bit_length() - 1)
    return result


def quarter_pendant_solution(t1: PhyloTree) -> FractionalSolution:
    """One quarter on every pendant edge of ``t1``, zero elsewhere."""
    values = [Fraction(0)] * t1.num_edges
    quarter = Fraction(1, 4)
    for label in t1.labels:
        if t1.num_edges:
            values[t1.pendant_edge(label)] = quarter
    return FractionalSolution(tuple(values))


lemma5_fractional = quarter_pendant_solution


def af_component_lower_bound(ell: int) -> int:
    """Lower bound ``n - 2*ell + 2`` on the components of any grid agreement forest."""
    if ell < 2:
        raise ValueError("grid side length must be at least 2")
    return ell * ell - 2 * ell + 2


def ilp_lower_bound(ell: int) -> int:
    """Minimum number of cut edges implied by :func:`af_component_lower_bound`."""
    return af_component_lower_bound(ell) - 1


def certified_gap(ell: int) -> Fraction:
    """Integrality gap lower bound ``4 (ell^2 - 2 ell + 1) / ell^2``."""
    return Fraction(4 * ilp_lower_bound(ell), ell * ell)


@dataclass(frozen=True)
class RandomInstanceSpec:
    """Parameters of a random tree set.

    Trees are drawn independently by uniform sequential leaf insertion,
    which yields the uniform distribution on unrooted binary topologies.
    With ``shared_topology`` every tree uses the first tree's sub-seed, so
    all trees are identical.
    """

    n: int
    t: int
    seed: int = 0
    model: str = "uniform"
    shared_topology: bool = False

    @property
    def labels(self) -> list[str]:
        width = len(str(self.n))
        return [f"t{k:0{width}d}" for k in range(1, self.n + 1)]


def random_tree(labels, rng: random.Random) -> PhyloTree:
    """Uniform random unrooted binary topology over ``labels``."""
    labels = list(labels)
    if len(labels) < 3:
        raise ValueError("need at least three labels")
    order = labels[:]
    rng.shuffle(order)
    # vertex k < len(order) is the leaf order[k]; internal vertices follow
    edges = [(0, len(order)), (1, len(order)), (2, len(order))]
    next_vertex = len(order) + 1
    for leaf in range(3, len(order)):
        k = rng.randrange(len(edges))
        u, v = edges[k]
        mid = next_vertex
        next_vertex += 1
        edges[k] = (u, mid)
        edges.append((mid, v))
        edges.append((mid, leaf))
    adj = [[] for _ in range(next_vertex)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    return PhyloTree.from_graph(adj, dict(enumerate(order)))


def random_instance(spec: RandomInstanceSpec) -> list[PhyloTree]:
    if spec.n < 4 or spec.t < 2:
        raise ValueError("random instances need n >= 4 and t >= 2")
    if spec.model != "uniform":
        raise ValueError(f"unknown random tree model {spec.model!r}")
    trees = []
    for i in range(spec.t):
        sub = 0 if spec.shared_topology else i
        rng = random.Random(f"{spec.seed}:{sub}")
        trees.append(random_tree(spec.labels, rng))
    return trees
