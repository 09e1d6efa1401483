"""Rooted leaf-labelled trees.

A tree is rooted at the leaf labelled 0.  Non-root leaves carry the labels
1..n and internal vertices are numbered n+1, n+2, ... in post-order.  Every
edge is named by the vertex it points into, so the edge set is indexed by the
non-root vertices.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations


class TreeError(ValueError):
    """Raised for malformed Newick input or trees violating the model assumptions."""


@dataclass(frozen=True)
class QuartetTopology:
    """Topology induced on four leaves: a split ``{a,b}|{c,d}`` or the unresolved star."""

    leaves: frozenset
    split: tuple | None = None

    @property
    def resolved(self) -> bool:
        return self.split is not None

    def __str__(self):
        if self.split is None:
            return "star(" + ",".join(map(str, sorted(self.leaves))) + ")"
        (a, b), (c, d) = self.split
        return f"{a}{b}|{c}{d}"


class RootedTree:
    """Immutable rooted tree with the combinatorial queries used by the models.

    Parameters
    ----------
    parent : dict
        Maps every non-root vertex to its direct ancestor.  Leaves must be
        exactly ``0..n`` (0 being the root) and internal vertices ``n+1..``.
    children_order : dict, optional
        Preferred child order per vertex, used only for Newick output.
    """

    def __init__(self, parent, children_order=None):
        parent = {int(v): int(p) for v, p in parent.items()}
        vertices = set(parent) | set(parent.values()) | {0}
        if 0 in parent:
            raise TreeError("the root leaf 0 cannot have a parent")
        children = {v: [] for v in vertices}
        for v, p in sorted(parent.items()):
            children[p].append(v)
        if children_order:
            for v, order in children_order.items():
                if sorted(order) != sorted(children[v]):
                    raise TreeError(f"children_order for {v} does not match parent map")
                children[v] = list(order)
        leaves = sorted(v for v in vertices if not children[v] or v == 0)
        n = len(leaves) - 1
        if leaves != list(range(n + 1)):
            raise TreeError(f"leaf labels must be exactly 0..{n}, got {leaves}")
        internal = sorted(v for v in vertices if v not in leaves)
        if internal != list(range(n + 1, n + 1 + len(internal))):
            raise TreeError("internal vertices must be numbered n+1, n+2, ...")
        if len(children[0]) != 1:
            raise TreeError("the root leaf 0 must have exactly one child")
        if n < 2:
            raise TreeError("a tree needs at least two non-root leaves")
        for v in internal:
            if len(children[v]) < 2:
                raise TreeError(f"vertex {v} has degree 2")
        # connectivity / acyclicity: every vertex must reach 0
        depth = {0: 0}
        stack = [0]
        while stack:
            v = stack.pop()
            for c in children[v]:
                if c in depth:
                    raise TreeError("parent map contains a cycle")
                depth[c] = depth[v] + 1
                stack.append(c)
        if len(depth) != len(vertices):
            raise TreeError("parent map is not connected to the root")

        self.n = n
        self.parent = parent
        self.children = {v: tuple(c) for v, c in children.items()}
        self.depth = depth
        self.leaves = tuple(leaves)
        self.internal = tuple(internal)

    # -- basic structure -------------------------------------------------

    @property
    def vertices(self):
        return self.leaves + self.internal

    @property
    def nonroot_vertices(self):
        """Non-root vertices in canonical order: leaves 1..n then internal vertices.

        This is also the edge order, since edge ``e(v)`` is named by its head.
        """
        return self.leaves[1:] + self.internal

    @property
    def root_child(self):
        return self.children[0][0]

    def outdeg(self, v) -> int:
        return len(self.children[v])

    def is_leaf(self, v) -> bool:
        return v <= self.n

    def pairs(self):
        """Unordered leaf pairs ``(i, j)``, ``0 <= i < j <= n``, in column order."""
        return list(combinations(range(self.n + 1), 2))

    def ancestors(self, v):
        """``v`` and its ancestors, bottom-up."""
        out = [v]
        while v in self.parent:
            v = self.parent[v]
            out.append(v)
        return out

    @cached_property
    def _descendants(self):
        des = {}
        for v in self._postorder:
            s = {v}
            for c in self.children[v]:
                s |= des[c]
            des[v] = frozenset(s)
        return des

    @cached_property
    def _postorder(self):
        out = []
        stack = [(0, False)]
        while stack:
            v, done = stack.pop()
            if done:
                out.append(v)
                continue
            stack.append((v, True))
            for c in reversed(self.children[v]):
                stack.append((c, False))
        return tuple(out)

    def descendants(self, v):
        """All vertices below ``v``, including ``v`` itself."""
        return self._descendants[v]

    def descendant_leaves(self, v):
        return sorted(u for u in self._descendants[v] if self.is_leaf(u) and u != 0)

    def descendant_internal(self, v):
        """Internal vertices below ``v``, including ``v`` when it is internal."""
        return sorted(u for u in self._descendants[v] if not self.is_leaf(u))

    # -- queries -----------------------------------------------------------

    def _check_leaf(self, i):
        if not (isinstance(i, int) and 0 <= i <= self.n):
            raise TreeError(f"unknown leaf label {i!r}")

    @cached_property
    def _lca_table(self):
        table = {}
        for i in range(self.n + 1):
            anc_i = self.ancestors(i)
            for j in range(i, self.n + 1):
                anc_j = set(self.ancestors(j))
                table[i, j] = next(a for a in anc_i if a in anc_j)
        return table

    def lca(self, i, j):
        """Most recent common ancestor of leaves ``i`` and ``j``."""
        self._check_leaf(i)
        self._check_leaf(j)
        return self._lca_table[min(i, j), max(i, j)]

    def path_edges(self, i, j) -> frozenset:
        """Edges on the path between leaves ``i`` and ``j``, each named by its head vertex."""
        self._check_leaf(i)
        self._check_leaf(j)
        if i == j:
            raise TreeError("path_edges needs two distinct leaves")
        top = self.lca(i, j)
        out = set()
        for v in (i, j):
            while v != top:
                out.add(v)
                v = self.parent[v]
        return frozenset(out)

    def distance(self, i, j) -> int:
        return len(self.path_edges(i, j))

    def quartet_topology(self, q) -> QuartetTopology:
        """Resolve four leaves with the four-point condition on edge-count distances."""
        q = tuple(q)
        if len(q) != 4 or len(set(q)) != 4:
            raise TreeError(f"quartet needs 4 distinct leaves, got {q}")
        a, b, c, d = sorted(q)
        options = [((a, b), (c, d)), ((a, c), (b, d)), ((a, d), (b, c))]
        sums = [self.distance(*x) + self.distance(*y) for x, y in options]
        best = min(sums)
        if sums.count(best) > 1:
            return QuartetTopology(frozenset(q))
        return QuartetTopology(frozenset(q), options[sums.index(best)])

    # -- serialisation -----------------------------------------------------

    def newick(self) -> str:
        def rec(v):
            if self.is_leaf(v):
                return str(v)
            return "(" + ",".join(rec(c) for c in self.children[v]) + ")"

        return rec(self.root_child) + ";"

    def to_dict(self) -> dict:
        return {
            "newick": self.newick(),
            "n": self.n,
            "leaves": list(self.leaves),
            "internal": list(self.internal),
            "parent": {str(v): p for v, p in sorted(self.parent.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data) -> "RootedTree":
        return cls({int(v): int(p) for v, p in data["parent"].items()})

    def __eq__(self, other):
        return isinstance(other, RootedTree) and self.parent == other.parent

    def __hash__(self):
        return hash(tuple(sorted(self.parent.items())))

    def __repr__(self):
        return f"RootedTree({self.newick()!r})"

    def __str__(self):
        return self.newick()


# -- construction ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\()|(\))|(,)|(;)|(\d+)|(\S))")


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # trailing whitespace
            break
        pos = m.end()
        if m.group(6):
            ch = m.group(6)
            if ch == ":":
                raise TreeError("branch lengths are not supported")
            raise TreeError(f"unexpected character {ch!r} at offset {m.start(6)}")
        out.append(next(g for g in m.groups()[:5] if g))
    return out


def from_nested(nested) -> RootedTree:
    """Build a tree from nested tuples of leaf labels, e.g. ``(1, 2, (3, 4, 5))``.

    The outermost tuple is the unique child of the root leaf 0.  Internal
    vertices are numbered in post-order starting at n+1.
    """
    if not isinstance(nested, (tuple, list)):
        raise TreeError("the top-level node must be internal")
    leaves = []

    def collect(node):
        if isinstance(node, (tuple, list)):
            for c in node:
                collect(c)
        else:
            leaves.append(node)

    collect(nested)
    n = len(leaves)
    if sorted(leaves) != list(range(1, n + 1)):
        dup = sorted({x for x in leaves if leaves.count(x) > 1})
        if dup:
            raise TreeError(f"duplicate leaf labels {dup}")
        raise TreeError(f"leaf labels must be exactly 1..{n}, got {sorted(leaves)}")

    parent = {}
    order = {}
    counter = [n + 1]

    def build(node):
        if not isinstance(node, (tuple, list)):
            return node
        if len(node) < 2:
            raise TreeError("a node with a single child creates a degree-2 vertex")
        kids = [build(c) for c in node]
        v = counter[0]
        counter[0] += 1
        for k in kids:
            parent[k] = v
        order[v] = kids
        return v

    top = build(nested)
    parent[top] = 0
    return RootedTree(parent, order)


def parse_newick(text: str) -> RootedTree:
    """Parse a Newick string over labels 1..n; leaf 0 is attached above the top node."""
    tokens = _tokenize(text.strip())
    if not tokens or tokens[-1] != ";":
        raise TreeError("Newick text must end with ';'")
    tokens = tokens[:-1]
    if ";" in tokens:
        raise TreeError("unexpected ';' before the end of input")
    pos = 0

    def node():
        nonlocal pos
        if pos >= len(tokens):
            raise TreeError("unexpected end of Newick text")
        tok = tokens[pos]
        if tok == "(":
            pos += 1
            kids = [node()]
            while pos < len(tokens) and tokens[pos] == ",":
                pos += 1
                kids.append(node())
            if pos >= len(tokens) or tokens[pos] != ")":
                raise TreeError("unbalanced parentheses")
            pos += 1
            return tuple(kids)
        if tok.isdigit():
            pos += 1
            return int(tok)
        raise TreeError(f"unexpected token {tok!r}")

    nested = node()
    if pos != len(tokens):
        raise TreeError(f"trailing tokens after the tree: {''.join(tokens[pos:])!r}")
    return from_nested(nested)


def star_tree(m: int) -> RootedTree:
    """Star tree S_m: one internal vertex with leaves 1..m below the root leaf 0."""
    if m < 2:
        raise TreeError("a star tree needs m >= 2")
    return from_nested(tuple(range(1, m + 1)))


def _to_nested(t: RootedTree, v=None):
    v = t.root_child if v is None else v
    if t.is_leaf(v):
        return v
    return tuple(_to_nested(t, c) for c in t.children[v])


@dataclass(frozen=True)
class Gluing:
    """Result of grafting S_m onto leaf ``ell`` of ``t_prime``.

    ``leaf_map`` sends the non-``ell`` leaves of ``t_prime`` to leaves of the
    glued tree, ``star_leaf_map`` sends leaves 1..m of S_m to leaves of the
    glued tree, ``internal_map`` sends internal vertices of ``t_prime`` to the
    glued tree and ``center`` is the vertex that ``ell`` became.
    """

    t_prime: RootedTree
    ell: int
    m: int
    tree: RootedTree
    leaf_map: dict
    star_leaf_map: dict
    internal_map: dict
    center: int

    @property
    def star(self) -> RootedTree:
        return star_tree(self.m)

    @property
    def h(self):
        """Direct ancestor of ``ell`` in ``t_prime``."""
        return self.t_prime.parent[self.ell]


def glue(t_prime: RootedTree, ell: int, m: int) -> Gluing:
    """Identify leaf edge ``ell`` of ``t_prime`` with the root edge of S_m.

    Leaves of ``t_prime`` other than ``ell`` keep their relative order and
    receive labels 0, 1, ...; the m new leaves follow.
    """
    if ell == 0:
        raise TreeError("cannot glue at the root leaf 0")
    if not (isinstance(ell, int) and 1 <= ell <= t_prime.n):
        raise TreeError(f"{ell!r} is not a leaf of the tree")
    if m < 2:
        raise TreeError("a star tree needs m >= 2")
    kept = [i for i in range(t_prime.n + 1) if i != ell]
    leaf_map = {old: new for new, old in enumerate(kept)}
    first_new = len(kept)
    star_leaf_map = {k: first_new + k - 1 for k in range(1, m + 1)}

    def rec(v):
        if v == ell:
            return tuple(star_leaf_map[k] for k in range(1, m + 1))
        if t_prime.is_leaf(v):
            return leaf_map[v]
        return tuple(rec(c) for c in t_prime.children[v])

    nested = rec(t_prime.root_child)
    tree = from_nested(nested)

    # recover vertex correspondence by matching descendant leaf sets
    by_leafset = {frozenset(tree.descendant_leaves(v)): v for v in tree.internal}
    internal_map = {}
    for v in t_prime.internal:
        below = []
        for x in t_prime.descendant_leaves(v):
            below.extend(star_leaf_map.values() if x == ell else [leaf_map[x]])
        internal_map[v] = by_leafset[frozenset(below)]
    center = by_leafset[frozenset(star_leaf_map.values())]
    return Gluing(t_prime, ell, m, tree, leaf_map, star_leaf_map, internal_map, center)


def glue_trees(t_prime: RootedTree, ell: int, m: int) -> RootedTree:
    return glue(t_prime, ell, m).tree


# -- enumeration ----------------------------------------------------------------


def _shapes(k, _cache={}):
    """Unlabelled rooted shapes with ``k`` leaves and no unary vertices.

    A shape is ``()`` for a leaf, else a sorted tuple of at least two child shapes.
    """
    if k in _cache:
        return _cache[k]
    if k == 1:
        res = [()]
    else:
        res = []
        for parts in _partitions(k):
            if len(parts) < 2:
                continue
            res.extend(_multisets(parts))
        res = sorted(set(res), key=_shape_key)
    _cache[k] = res
    return res


def _shape_key(s):
    return (_size(s), len(s), tuple(_shape_key(c) for c in s))


def _size(s):
    return 1 if s == () else sum(_size(c) for c in s)


def _partitions(k, largest=None):
    largest = k if largest is None else largest
    if k == 0:
        yield ()
        return
    for first in range(min(k, largest), 0, -1):
        for rest in _partitions(k - first, first):
            yield (first,) + rest


def _multisets(parts):
    """All sorted tuples of shapes with the given (non-increasing) part sizes."""
    if not parts:
        return [()]
    out = set()
    for head in _shapes(parts[0]):
        for tail in _multisets(parts[1:]):
            out.add(tuple(sorted((head,) + tail, key=_shape_key)))
    return list(out)


def _label_shape(shape):
    counter = iter(range(1, 10**6))

    def rec(s):
        if s == ():
            return next(counter)
        return tuple(rec(c) for c in s)

    return rec(shape)


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def _labelled(labels):
    if len(labels) == 1:
        return [labels[0]]
    out = []
    for blocks in _set_partitions(list(labels)):
        if len(blocks) < 2:
            continue
        blocks = sorted(sorted(b) for b in blocks)
        subtrees = [_labelled(b) for b in blocks]

        def product(i):
            if i == len(subtrees):
                yield ()
                return
            for s in subtrees[i]:
                for rest in product(i + 1):
                    yield (s,) + rest

        out.extend(product(0))
    return out


def enumerate_topologies(max_leaves: int, min_leaves: int = 3, labeled: bool = False):
    """All rooted trees without degree-2 vertices on ``min_leaves..max_leaves`` leaves.

    Leaf counts include the root leaf 0.  By default one representative per
    unlabelled shape is returned (leaves numbered left to right); with
    ``labeled=True`` every leaf-labelled tree is returned.
    """
    out = []
    for total in range(max(min_leaves, 3), max_leaves + 1):
        n = total - 1
        if labeled:
            out.extend(from_nested(x) for x in _labelled(list(range(1, n + 1))))
        else:
            out.extend(from_nested(_label_shape(s)) for s in _shapes(n))
    return out


def load_tree(arg: str) -> RootedTree:
    """Accept an inline Newick string (ending in ';') or a path to a file holding one."""
    text = arg.strip()
    if text.endswith(";"):
        return parse_newick(text)
    with open(arg, encoding="utf-8") as fh:
        return parse_newick(fh.read())
