"""Rooted trees with operation vertices and leaves, up to isomorphism.

A :class:`Tree` is either a leaf (no children, optional integer label) or an
internal vertex decorated by ``m_k`` where ``k`` is its number of children.
Shapes are stored in a canonical form: children sorted by their text form,
so equal shapes compare equal.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from functools import lru_cache


@dataclass(frozen=True)
class Tree:
    children: tuple = ()
    label: int | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def arity(self) -> int:
        return len(self.children)

    @property
    def n_leaves(self) -> int:
        return 1 if self.is_leaf else sum(c.n_leaves for c in self.children)

    @property
    def n_vertices(self) -> int:
        """Number of internal vertices."""
        return 0 if self.is_leaf else 1 + sum(c.n_vertices for c in self.children)

    @property
    def n_edges(self) -> int:
        """Internal edges: external leaf and root edges are not counted."""
        return max(self.n_vertices - 1, 0)

    def arities(self):
        if self.is_leaf:
            return []
        out = [self.arity]
        for c in self.children:
            out.extend(c.arities())
        return out

    def leaf_labels(self):
        if self.is_leaf:
            return [self.label]
        return [x for c in self.children for x in c.leaf_labels()]

    def text(self) -> str:
        if self.is_leaf:
            return "L" if self.label is None else f"L{self.label}"
        return "(m%d %s)" % (self.arity, " ".join(c.text() for c in self.children))

    __str__ = text

    def canonical(self) -> "Tree":
        if self.is_leaf:
            return self
        kids = sorted((c.canonical() for c in self.children), key=_key)
        return Tree(tuple(kids), None)

    def shape(self) -> "Tree":
        """Forget leaf labels."""
        if self.is_leaf:
            return LEAF
        return Tree(tuple(c.shape() for c in self.children)).canonical()

    def relabel(self, labels) -> "Tree":
        """Assign ``labels`` to the leaves in depth-first order."""
        it = iter(labels)

        def go(t):
            if t.is_leaf:
                return Tree((), next(it))
            return Tree(tuple(go(c) for c in t.children))

        return go(self)


LEAF = Tree()


def _key(t: Tree):
    return (t.n_leaves, t.n_vertices, t.text())


def leaf(label=None) -> Tree:
    return Tree((), label)


def node(*children) -> Tree:
    if not children:
        raise ValueError("an internal vertex needs at least one input")
    return Tree(tuple(children))


_TOKEN = re.compile(r"\(|\)|m\d+|L\d*")


def parse_tree(text: str) -> Tree:
    """Inverse of :meth:`Tree.text`, e.g. ``"(m2 (m1 L1) L2)"``."""
    tokens = _TOKEN.findall(text)
    if "".join(tokens) != re.sub(r"\s+", "", text):
        raise ValueError(f"unrecognised characters in tree {text!r}")
    pos = 0

    def go():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok.startswith("L"):
            return Tree((), int(tok[1:]) if len(tok) > 1 else None)
        if tok != "(":
            raise ValueError(f"unexpected token {tok!r}")
        head = tokens[pos]
        pos += 1
        if not head.startswith("m"):
            raise ValueError(f"expected an operation, got {head!r}")
        kids = []
        while tokens[pos] != ")":
            kids.append(go())
        pos += 1
        if len(kids) != int(head[1:]):
            raise ValueError(f"{head} has {len(kids)} inputs")
        return Tree(tuple(kids))

    try:
        tree = go()
    except IndexError:
        raise ValueError(f"unbalanced tree {text!r}") from None
    if pos != len(tokens):
        raise ValueError(f"trailing tokens in {text!r}")
    return tree


@lru_cache(maxsize=None)
def _shapes(n: int, vmax: int, arities: frozenset) -> tuple:
    """Canonical shapes with ``n`` leaves and at most ``vmax`` internal vertices (bare leaf included)."""
    out = [LEAF] if n == 1 else []
    if vmax <= 0:
        return tuple(out)
    for k in sorted(arities):
        if k > n:
            continue
        pool = []
        for m in range(1, n - k + 2):
            pool.extend(_shapes(m, vmax - 1, arities))
        pool.sort(key=_key)
        for combo in itertools.combinations_with_replacement(pool, k):
            if sum(c.n_leaves for c in combo) != n:
                continue
            if sum(c.n_vertices for c in combo) > vmax - 1:
                continue
            out.append(Tree(combo))
    return tuple(sorted(set(out), key=_key))


def enumerate_trees(n_leaves: int, allowed_arities, max_vertices: int | None = None):
    """All isomorphism classes of rooted trees with at least one internal vertex.

    Without a vertex bound, arity-1 vertices would allow infinitely many
    chains; in that case a bound is required.
    """
    if n_leaves < 1:
        raise ValueError("n_leaves must be positive")
    arities = frozenset(int(a) for a in allowed_arities)
    if any(a < 1 for a in arities):
        raise ValueError("arities must be positive")
    if max_vertices is None:
        if 1 in arities:
            raise ValueError("arity 1 needs a max_vertices bound")
        max_vertices = n_leaves - 1 if n_leaves > 1 else 0
    return [t for t in _shapes(n_leaves, max_vertices, arities) if not t.is_leaf]


def automorphism_order(tree: Tree) -> int:
    """Order of the symmetry group of the unlabeled tree fixing the root."""
    if tree.is_leaf:
        return 1
    shape = tree.shape()
    out = 1
    for c in shape.children:
        out *= automorphism_order(c)
    counts: dict = {}
    for c in shape.children:
        counts[c] = counts.get(c, 0) + 1
    for m in counts.values():
        out *= math.factorial(m)
    return out


def labelings(shape: Tree):
    """Distinct leaf-labeled trees with the given shape, labels ``1..n``."""
    n = shape.n_leaves
    seen = set()
    out = []
    for perm in itertools.permutations(range(1, n + 1)):
        t = shape.relabel(perm).canonical()
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


def enumerate_labeled_trees(n_leaves: int, allowed_arities, max_vertices: int | None = None):
    return [t for s in enumerate_trees(n_leaves, allowed_arities, max_vertices) for t in labelings(s)]
