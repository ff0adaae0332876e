"""Unrooted binary phylogenetic trees.

A :class:`PhyloTree` is immutable and stored in a canonical form: taxon ids
are assigned in sorted label order, vertex 0 is the leaf carrying the
smallest label, and the remaining vertices are numbered in depth-first
preorder from that leaf, visiting children in order of their smallest
descendant taxon.  Edge ``k`` joins vertex ``k + 1`` to its parent in that
rooting, so edge indices are reproducible for a given topology and label
set and two isomorphic trees have identical internal arrays.

Degenerate trees are allowed: one leaf (no edges), two leaves (one edge)
and three leaves (a star).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import NewickError, TreeError

__all__ = [
    "PhyloTree",
    "RootedView",
    "caterpillar",
    "parse_newick",
    "parse_newick_tree",
    "write_newick",
    "restrict",
    "spanning_path_edges",
    "canonical_form",
    "is_isomorphic",
    "rooted_view",
]


class PhyloTree:
    """Unrooted binary tree whose leaves are bijectively labelled.

    Build instances with :meth:`from_graph`, :func:`parse_newick` or
    :func:`caterpillar`; the constructor itself expects canonical arrays.

    Attributes
    ----------
    labels : tuple[str, ...]
        Taxon labels in sorted order; the position is the taxon id.
    parent : tuple[int, ...]
        Parent of each vertex in the canonical rooting (-1 for vertex 0).
    children : tuple[tuple[int, ...], ...]
        Canonically ordered children of each vertex.
    vertex_taxon : tuple[int, ...]
        Taxon id of each leaf vertex, -1 for internal vertices.
    leaf_vertex : tuple[int, ...]
        Vertex carrying each taxon id.
    """

    def __init__(self, labels, parent, children, vertex_taxon, leaf_vertex):
        self.labels: tuple[str, ...] = tuple(labels)
        self.parent: tuple[int, ...] = tuple(parent)
        self.children: tuple[tuple[int, ...], ...] = tuple(tuple(c) for c in children)
        self.vertex_taxon: tuple[int, ...] = tuple(vertex_taxon)
        self.leaf_vertex: tuple[int, ...] = tuple(leaf_vertex)
        self._index = {label: i for i, label in enumerate(self.labels)}

    # ------------------------------------------------------------------ #
    # construction

    @classmethod
    def from_graph(cls, adjacency: Sequence[Iterable[int]], vertex_labels: dict[int, str]) -> "PhyloTree":
        """Validate an arbitrary tree graph and return its canonical form.

        ``adjacency[v]`` lists the neighbours of vertex ``v``;
        ``vertex_labels`` maps each leaf vertex to its taxon label.
        """
        adj = [list(nb) for nb in adjacency]
        nv = len(adj)
        if nv == 0:
            raise TreeError("tree has no vertices")
        for v, nb in enumerate(adj):
            for u in nb:
                if not 0 <= u < nv or u == v:
                    raise TreeError(f"invalid neighbour {u} of vertex {v}")
                if adj[u].count(v) != nb.count(u):
                    raise TreeError(f"adjacency not symmetric between {u} and {v}")
        seen_labels = {}
        for v, label in vertex_labels.items():
            if not label:
                raise TreeError(f"vertex {v} has an empty label")
            if label in seen_labels:
                raise TreeError(f"duplicate leaf label {label!r}")
            seen_labels[label] = v
        n = len(vertex_labels)
        if n == 0:
            raise TreeError("tree has no labelled leaves")
        num_edges = sum(len(nb) for nb in adj) // 2
        if num_edges != nv - 1:
            raise TreeError("graph is not a tree (edge count)")
        for v, nb in enumerate(adj):
            deg = len(nb)
            if v in vertex_labels:
                if deg > 1 or (deg == 0 and nv > 1):
                    raise TreeError(
                        f"labelled vertex {vertex_labels[v]!r} has degree {deg}; leaves must have degree 1"
                    )
            elif deg != 3:
                raise TreeError(f"internal vertex {v} has degree {deg}; binary trees need degree 3")

        labels = tuple(sorted(vertex_labels.values()))
        tid = {label: i for i, label in enumerate(labels)}
        taxon_of = {v: tid[label] for v, label in vertex_labels.items()}
        root = seen_labels[labels[0]]

        # post-order from the root to get the smallest taxon below each vertex
        par = [-1] * nv
        order = []
        visited = [False] * nv
        stack = [root]
        visited[root] = True
        while stack:
            v = stack.pop()
            order.append(v)
            for u in adj[v]:
                if not visited[u]:
                    visited[u] = True
                    par[u] = v
                    stack.append(u)
        if len(order) != nv:
            raise TreeError("graph is not connected")
        low = [taxon_of.get(v, n) for v in range(nv)]
        for v in reversed(order):
            if par[v] >= 0 and low[v] < low[par[v]]:
                low[par[v]] = low[v]

        kids = [sorted((u for u in adj[v] if u != par[v]), key=low.__getitem__) for v in range(nv)]
        new_id = [0] * nv
        preorder = []
        stack = [root]
        while stack:
            v = stack.pop()
            new_id[v] = len(preorder)
            preorder.append(v)
            stack.extend(reversed(kids[v]))

        parent = [-1] * nv
        children = [()] * nv
        vertex_taxon = [-1] * nv
        leaf_vertex = [0] * n
        for old in preorder:
            v = new_id[old]
            parent[v] = new_id[par[old]] if par[old] >= 0 else -1
            children[v] = tuple(new_id[c] for c in kids[old])
            if old in taxon_of:
                vertex_taxon[v] = taxon_of[old]
                leaf_vertex[taxon_of[old]] = v
        return cls(labels, parent, children, vertex_taxon, leaf_vertex)

    # ------------------------------------------------------------------ #
    # basic accessors

    @property
    def n(self) -> int:
        """Number of taxa."""
        return len(self.labels)

    @property
    def num_vertices(self) -> int:
        return len(self.parent)

    @property
    def num_edges(self) -> int:
        return len(self.parent) - 1

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """``edges[k] = (parent, child)`` in the canonical rooting."""
        return tuple((self.parent[v], v) for v in range(1, self.num_vertices))

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj = [list(c) for c in self.children]
        for v in range(1, self.num_vertices):
            adj[v].insert(0, self.parent[v])
        return tuple(tuple(sorted(nb)) for nb in adj)

    def taxon(self, label: str) -> int:
        """Taxon id of ``label``."""
        try:
            return self._index[label]
        except KeyError:
            raise TreeError(f"unknown taxon {label!r}") from None

    def taxa(self, labels: Iterable[str]) -> list[int]:
        return [self.taxon(label) for label in labels]

    def is_leaf(self, v: int) -> bool:
        return self.vertex_taxon[v] >= 0

    def edge_between(self, u: int, v: int) -> int:
        if self.parent[v] == u:
            return v - 1
        if self.parent[u] == v:
            return u - 1
        raise TreeError(f"vertices {u} and {v} are not adjacent")

    def pendant_edge(self, label: str) -> int:
        """Index of the edge incident to the leaf ``label``."""
        if self.num_edges == 0:
            raise TreeError("a single-leaf tree has no edges")
        v = self.leaf_vertex[self.taxon(label)]
        return 0 if v == 0 else v - 1

    @cached_property
    def _root_masks(self) -> tuple[int, ...]:
        # bit k set iff edge k lies on the path from vertex 0
        masks = [0] * self.num_vertices
        for v in range(1, self.num_vertices):
            masks[v] = masks[self.parent[v]] | (1 << (v - 1))
        return tuple(masks)

    def path_mask(self, a: int, b: int) -> int:
        """Bitmask of the edges on the path between taxon ids ``a`` and ``b``."""
        masks = self._root_masks
        return masks[self.leaf_vertex[a]] ^ masks[self.leaf_vertex[b]]

    @cached_property
    def leaf_path_masks(self) -> tuple[tuple[int, ...], ...]:
        """Pairwise leaf-to-leaf path masks indexed by taxon id."""
        masks = self._root_masks
        leaf = [masks[v] for v in self.leaf_vertex]
        return tuple(tuple(x ^ y for y in leaf) for x in leaf)

    @cached_property
    def leaf_distances(self) -> tuple[tuple[int, ...], ...]:
        """Pairwise leaf-to-leaf edge counts indexed by taxon id."""
        return tuple(tuple(m.bit_count() for m in row) for row in self.leaf_path_masks)

    def __eq__(self, other):
        if not isinstance(other, PhyloTree):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.parent == other.parent
            and self.vertex_taxon == other.vertex_taxon
        )

    def __hash__(self):
        return hash((self.labels, self.parent, self.vertex_taxon))

    def __repr__(self):
        return f"PhyloTree({write_newick(self)!r})"


def caterpillar(order: Sequence[str]) -> PhyloTree:
    """Caterpillar whose leaves hang off the spine in the given order.

    The first two and the last two leaves form the end cherries.
    """
    n = len(order)
    if n == 0:
        raise TreeError("caterpillar needs at least one leaf")
    if n <= 3:
        if n == 1:
            return PhyloTree.from_graph([[]], {0: order[0]})
        if n == 2:
            return PhyloTree.from_graph([[1], [0]], {0: order[0], 1: order[1]})
        return PhyloTree.from_graph([[3], [3], [3], [0, 1, 2]], dict(enumerate(order)))
    spine = n - 2
    adj = [[] for _ in range(n + spine)]

    def link(u, v):
        adj[u].append(v)
        adj[v].append(u)

    for s in range(spine - 1):
        link(n + s, n + s + 1)
    link(0, n)
    link(1, n)
    for k in range(2, n - 2):
        link(k, n + k - 1)
    link(n - 2, n + spine - 1)
    link(n - 1, n + spine - 1)
    return PhyloTree.from_graph(adj, dict(enumerate(order)))


# ---------------------------------------------------------------------- #
# Newick

_PUNCT = "(),:;"
_UNQUOTED_STOP = set("(),:;[]' \t\r\n")


def _tokenize(text: str, line: int | None):
    i = 0
    size = len(text)
    while i < size:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch == "[":
            end = text.find("]", i)
            if end < 0:
                raise NewickError("unterminated comment", i, line)
            i = end + 1
        elif ch in _PUNCT:
            yield ch, None, i
            i += 1
        elif ch == "'":
            start = i
            i += 1
            buf = []
            while True:
                if i >= size:
                    raise NewickError("unterminated quoted label", start, line)
                if text[i] == "'":
                    if i + 1 < size and text[i + 1] == "'":
                        buf.append("'")
                        i += 2
                        continue
                    i += 1
                    break
                buf.append(text[i])
                i += 1
            yield "label", "".join(buf), start
        elif ch == "]":
            raise NewickError("unexpected ']'", i, line)
        else:
            start = i
            while i < size and text[i] not in _UNQUOTED_STOP:
                i += 1
            yield "label", text[start:i], start


def parse_newick_tree(text: str, line: int | None = None) -> PhyloTree:
    """Parse a single Newick expression (terminated by ``;``)."""
    children: list[list[int]] = []
    labels: list[str | None] = []
    positions: list[int] = []

    def new_node(label, pos):
        children.append([])
        labels.append(label)
        positions.append(pos)
        return len(labels) - 1

    stack: list[int] = []
    root = None
    expect_subtree = True
    after_close = False
    expect_length = False
    done = False
    for kind, value, pos in _tokenize(text, line):
        if done:
            raise NewickError("unexpected text after ';'", pos, line)
        if expect_length:
            if kind != "label":
                raise NewickError("expected branch length after ':'", pos, line)
            try:
                float(value)
            except ValueError:
                raise NewickError(f"invalid branch length {value!r}", pos, line) from None
            expect_length = False
            continue
        if expect_subtree:
            if kind == "(":
                node = new_node(None, pos)
                if stack:
                    children[stack[-1]].append(node)
                elif root is None:
                    root = node
                else:
                    raise NewickError("multiple trees on one line", pos, line)
                stack.append(node)
            elif kind == "label":
                node = new_node(value, pos)
                if stack:
                    children[stack[-1]].append(node)
                elif root is None:
                    root = node
                else:
                    raise NewickError("multiple trees on one line", pos, line)
                expect_subtree = False
                after_close = False
            else:
                raise NewickError(f"expected '(' or a label, found {kind!r}", pos, line)
            continue
        if kind == ",":
            if not stack:
                raise NewickError("',' outside parentheses", pos, line)
            expect_subtree = True
        elif kind == ")":
            if not stack:
                raise NewickError("unbalanced ')'", pos, line)
            stack.pop()
            after_close = True
        elif kind == ":":
            expect_length = True
            after_close = False
        elif kind == "label":
            # internal node label, ignored
            if not after_close:
                raise NewickError(f"unexpected label {value!r}", pos, line)
            after_close = False
        elif kind == ";":
            if stack:
                raise NewickError("unbalanced '('", pos, line)
            done = True
        else:
            raise NewickError(f"unexpected {kind!r}", pos, line)
    if expect_length:
        raise NewickError("missing branch length", len(text), line)
    if not done:
        raise NewickError("missing terminating ';'", len(text), line)
    if root is None:
        raise NewickError("empty tree", 0, line)

    vertex_labels: dict[int, str] = {}
    for v, kids in enumerate(children):
        if not kids:
            if not labels[v]:
                raise NewickError("leaf without a label", positions[v], line)
            if labels[v] in vertex_labels.values():
                raise NewickError(f"duplicate leaf label {labels[v]!r}", positions[v], line)
            vertex_labels[v] = labels[v]
        elif v == root:
            if len(kids) not in (2, 3):
                raise NewickError(
                    f"non-binary top-level node with {len(kids)} children", positions[v], line
                )
        elif len(kids) != 2:
            raise NewickError(f"non-binary internal vertex with {len(kids)} children", positions[v], line)

    adj: list[list[int]] = [[] for _ in children]
    for v, kids in enumerate(children):
        for c in kids:
            adj[v].append(c)
            adj[c].append(v)
    if len(children[root]) == 2:
        a, b = children[root]
        adj[a].remove(root)
        adj[b].remove(root)
        adj[a].append(b)
        adj[b].append(a)
        adj[root] = []
        keep = [v for v in range(len(adj)) if v != root]
        remap = {old: new for new, old in enumerate(keep)}
        adj = [[remap[u] for u in adj[old]] for old in keep]
        vertex_labels = {remap[v]: lab for v, lab in vertex_labels.items()}
    try:
        return PhyloTree.from_graph(adj, vertex_labels)
    except NewickError:
        raise
    except TreeError as exc:
        raise NewickError(str(exc), None, line) from None


def parse_newick(text: str) -> list[PhyloTree]:
    """Parse one tree per non-empty line; ``#`` lines are comments.

    All trees must share one taxon set.
    """
    trees = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        trees.append(parse_newick_tree(stripped, line=lineno))
    if not trees:
        raise NewickError("no trees found")
    for i, tree in enumerate(trees[1:], start=2):
        if tree.labels != trees[0].labels:
            missing = sorted(set(trees[0].labels) ^ set(tree.labels))
            raise TreeError(f"tree {i} has a different taxon set (symmetric difference: {missing[:5]})")
    return trees


_NEEDS_QUOTES = re.compile(r"[\s()\[\]':;,]")


def _quote(label: str) -> str:
    if _NEEDS_QUOTES.search(label):
        return "'" + label.replace("'", "''") + "'"
    return label


def write_newick(tree: PhyloTree) -> str:
    """Canonical Newick string.

    The tree is written rooted on the edge between the smallest leaf's
    neighbour and that neighbour's child with the larger smallest label;
    children are always ordered by their smallest descendant label.
    """
    names = [_quote(label) for label in tree.labels]
    if tree.n == 1:
        return names[0] + ";"
    if tree.n == 2:
        return f"({names[0]},{names[1]});"
    text: dict[int, str] = {}
    # vertices are numbered in preorder, so reverse order is a valid post-order
    for v in range(tree.num_vertices - 1, 0, -1):
        if tree.vertex_taxon[v] >= 0:
            text[v] = names[tree.vertex_taxon[v]]
        elif v != 1:
            a, b = tree.children[v]
            text[v] = f"({text[a]},{text[b]})"
    first, second = tree.children[1]
    return f"(({names[0]},{text[first]}),{text[second]});"


# ---------------------------------------------------------------------- #
# restriction, paths, isomorphism


def _subset_ids(tree: PhyloTree, subset: Iterable[str]) -> list[int]:
    ids = sorted(set(tree.taxa(subset)))
    if not ids:
        raise TreeError("taxon subset is empty")
    return ids


def _steiner_child_vertices(tree: PhyloTree, ids: Sequence[int]) -> list[int]:
    """Child endpoints of the edges of the minimal subtree spanning ``ids``."""
    k = len(ids)
    count = [0] * tree.num_vertices
    for t in ids:
        count[tree.leaf_vertex[t]] = 1
    for v in range(tree.num_vertices - 1, 0, -1):
        count[tree.parent[v]] += count[v]
    return [v for v in range(1, tree.num_vertices) if 0 < count[v] < k]


def steiner_edges(tree: PhyloTree, subset: Iterable[str]) -> frozenset[int]:
    """Edges of the minimal subtree connecting the leaves in ``subset``."""
    ids = _subset_ids(tree, subset)
    return frozenset(v - 1 for v in _steiner_child_vertices(tree, ids))


def restrict(tree: PhyloTree, subset: Iterable[str]) -> PhyloTree:
    """The tree spanned by ``subset`` with degree-2 vertices suppressed."""
    ids = _subset_ids(tree, subset)
    if len(ids) == tree.n:
        return tree
    if len(ids) == 1:
        return PhyloTree.from_graph([[]], {0: tree.labels[ids[0]]})
    nbrs: dict[int, set[int]] = {}
    for v in _steiner_child_vertices(tree, ids):
        p = tree.parent[v]
        nbrs.setdefault(v, set()).add(p)
        nbrs.setdefault(p, set()).add(v)
    for v in sorted(nbrs):
        if len(nbrs[v]) == 2 and tree.vertex_taxon[v] < 0:
            a, b = nbrs.pop(v)
            nbrs[a].discard(v)
            nbrs[b].discard(v)
            nbrs[a].add(b)
            nbrs[b].add(a)
    keep = sorted(nbrs)
    remap = {old: new for new, old in enumerate(keep)}
    adj = [[remap[u] for u in nbrs[old]] for old in keep]
    vertex_labels = {remap[v]: tree.labels[tree.vertex_taxon[v]] for v in keep if tree.vertex_taxon[v] >= 0}
    return PhyloTree.from_graph(adj, vertex_labels)


def spanning_path_edges(tree: PhyloTree, a: str, b: str) -> frozenset[int]:
    """Edge indices on the unique path between leaves ``a`` and ``b``."""
    if a == b:
        raise TreeError("path endpoints must be distinct taxa")
    mask = tree.path_mask(tree.taxon(a), tree.taxon(b))
    return frozenset(_bits(mask))


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def restricted_form(tree: PhyloTree, ids: Sequence[int]):
    """Canonical form of ``tree`` restricted to taxon ids ``ids``.

    Computed directly on the tree without building the restriction.  The
    form is a nested tuple of labels: rooted at the smallest selected leaf,
    siblings ordered by smallest label, degree-2 vertices skipped.  Two
    restrictions over the same labels are isomorphic iff the forms are equal.
    """
    ids = sorted(ids)
    if len(ids) == 1:
        return tree.labels[ids[0]]
    selected = set(ids)
    adj = tree.adjacency
    root = tree.leaf_vertex[ids[0]]
    # iterative DFS away from the root leaf
    order = []
    par = {root: -1}
    stack = [root]
    while stack:
        v = stack.pop()
        order.append(v)
        for u in adj[v]:
            if u != par[v]:
                par[u] = v
                stack.append(u)
    result: dict[int, tuple] = {}
    for v in reversed(order[1:]):
        t = tree.vertex_taxon[v]
        if t >= 0:
            if t in selected:
                result[v] = (t, tree.labels[t])
            continue
        parts = [result[u] for u in adj[v] if u != par[v] and u in result]
        if len(parts) == 1:
            result[v] = parts[0]
        elif len(parts) == 2:
            parts.sort()
            result[v] = (parts[0][0], (parts[0][1], parts[1][1]))
    return (tree.labels[ids[0]], result[order[1]][1])


def canonical_form(tree: PhyloTree):
    """Canonical form of the whole tree (see :func:`restricted_form`)."""
    return restricted_form(tree, range(tree.n))


def is_isomorphic(t1: PhyloTree, t2: PhyloTree) -> bool:
    """Leaf-label-preserving isomorphism test."""
    if t1.labels != t2.labels:
        raise TreeError("isomorphism test needs trees over the same taxon set")
    return canonical_form(t1) == canonical_form(t2)


# ---------------------------------------------------------------------- #
# rooted views


@dataclass(frozen=True)
class RootedView:
    """Orientation of a tree's edges away from a chosen root leaf.

    ``upper[e]`` is the endpoint of edge ``e`` nearer the root and
    ``lower[e]`` the other one.  ``postorder`` lists every edge after all
    edges below it; ``child_edges[e]`` are the edges hanging from
    ``lower[e]``.
    """

    tree: PhyloTree
    root: str
    root_vertex: int
    upper: tuple[int, ...]
    lower: tuple[int, ...]
    depth: tuple[int, ...]
    parent_edge: tuple[int, ...]
    child_edges: tuple[tuple[int, ...], ...]
    postorder: tuple[int, ...]

    @property
    def root_edge(self) -> int:
        """The pendant edge of the root leaf."""
        return self.tree.edge_between(self.root_vertex, self.tree.adjacency[self.root_vertex][0])


def rooted_view(tree: PhyloTree, root: str | None = None) -> RootedView:
    """Root ``tree`` at leaf ``root`` (default: the smallest label)."""
    if root is None:
        root = tree.labels[0]
    r = tree.leaf_vertex[tree.taxon(root)]
    if tree.num_edges == 0:
        return RootedView(tree, root, r, (), (), (0,), (), (), ())
    m = tree.num_edges
    upper = [0] * m
    lower = [0] * m
    parent_edge = [-1] * m
    child_edges: list[list[int]] = [[] for _ in range(m)]
    depth = [0] * tree.num_vertices
    adj = tree.adjacency
    into = {r: -1}
    stack = [r]
    while stack:
        v = stack.pop()
        pe = into[v]
        nxt = []
        for u in adj[v]:
            if pe >= 0 and u == upper[pe]:
                continue
            e = tree.edge_between(v, u)
            upper[e], lower[e] = v, u
            depth[u] = depth[v] + 1
            parent_edge[e] = pe
            if pe >= 0:
                child_edges[pe].append(e)
            into[u] = e
            nxt.append(u)
        stack.extend(reversed(nxt))
    postorder = _edge_postorder(child_edges, tree.edge_between(r, adj[r][0]))
    return RootedView(
        tree=tree,
        root=root,
        root_vertex=r,
        upper=tuple(upper),
        lower=tuple(lower),
        depth=tuple(depth),
        parent_edge=tuple(parent_edge),
        child_edges=tuple(tuple(c) for c in child_edges),
        postorder=tuple(postorder),
    )


def _edge_postorder(child_edges, top):
    out = []
    stack = [(top, False)]
    while stack:
        e, expanded = stack.pop()
        if expanded:
            out.append(e)
            continue
        stack.append((e, True))
        for c in reversed(child_edges[e]):
            stack.append((c, False))
    return out
