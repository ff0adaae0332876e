"""Slow, independent reference implementations used only by the tests."""

from collections import deque
from fractions import Fraction
from itertools import combinations, product

from mafapprox.phylo import canonical_form, is_isomorphic, restrict, rooted_view

QUARTER = Fraction(1, 4)


def bfs_path_edges(tree, a, b):
    """Edges on the a-b path found by breadth-first search over adjacency."""
    src = tree.leaf_vertex[tree.taxon(a)]
    dst = tree.leaf_vertex[tree.taxon(b)]
    prev = {src: None}
    queue = deque([src])
    while queue:
        v = queue.popleft()
        for u in tree.adjacency[v]:
            if u not in prev:
                prev[u] = v
                queue.append(u)
    edges = set()
    v = dst
    while prev[v] is not None:
        edges.add(tree.edge_between(v, prev[v]))
        v = prev[v]
    return edges


def topology_by_restriction(tree, quartet):
    """Pairing of the four taxa read from the restricted tree's canonical form."""
    form = canonical_form(restrict(tree, quartet))
    # form = (a, ((b, c), d)) style nesting rooted at the smallest label;
    # the cherry containing the root leaf is its sibling at the top
    root, rest = form
    left, right = rest
    if isinstance(left, str):
        partner = left
    else:
        partner = right
    others = sorted(set(quartet) - {root, partner})
    return tuple(sorted([tuple(sorted((root, partner))), tuple(others)]))


def brute_incompatible(trees):
    """Set of (quartet, minimal witness) pairs found via restriction + isomorphism."""
    t1 = trees[0]
    found = {}
    for q in combinations(t1.labels, 4):
        r1 = restrict(t1, q)
        for i, tree in enumerate(trees[1:], start=1):
            if not is_isomorphic(r1, restrict(tree, q)):
                found[q] = i
                break
    return found


def lq_edges(t1, split):
    (a, b), (c, d) = split
    return bfs_path_edges(t1, a, b) | bfs_path_edges(t1, c, d)


def exhaustive_min_cover(model):
    """Minimum number of variables hitting every row, over all 0/1 vectors."""
    best = None
    for bits in product((0, 1), repeat=model.num_vars):
        size = sum(bits)
        if best is not None and size >= best:
            continue
        if all(any(bits[e] for e in row) for row in model.constraints):
            best = size
    return best


def literal_rounding(t1, values, root=None, pick=max):
    """The threshold loop run literally: recompute D and w each step.

    ``pick`` chooses among all edges currently satisfying the cut condition.
    """
    view = rooted_view(t1, root)
    cut = set()

    def below(e):
        members = [e]
        stack = [e]
        while stack:
            f = stack.pop()
            for g in view.child_edges[f]:
                if g not in cut:
                    members.append(g)
                    stack.append(g)
        return members

    while True:
        weight = {}
        for e in range(t1.num_edges):
            if e not in cut:
                weight[e] = sum((values[f] for f in below(e)), Fraction(0))
        candidates = [
            e
            for e, w in weight.items()
            if w >= QUARTER and all(weight[f] < QUARTER for f in below(e) if f != e)
        ]
        if not candidates:
            assert all(w < QUARTER for w in weight.values())
            return cut
        cut.add(pick(candidates))
