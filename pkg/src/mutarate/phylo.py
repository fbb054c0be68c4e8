"""Neighbor-joining trees, Newick serialization and leaf rerooting.

The NJ loop joins the pair minimizing the Q-criterion, computes limb lengths
with the standard formulas (negative limbs clamped to zero, raw value kept on
the node) and reduces the matrix until two clusters remain; those are joined
through an artificial root splitting the remaining distance evenly, which
keeps every leaf-to-leaf path length intact while giving Newick a place to
start.  Rerooting moves the root to the attachment node of a named leaf and
suppresses any degree-2 node left behind, so path lengths never change.
"""

from __future__ import annotations

import numpy as np

from .distance import DistanceMatrix
from .errors import DataError


class TreeNode:
    """Node with a branch length to its parent (0.0 at the root)."""

    __slots__ = ("label", "length", "children", "raw_length")

    def __init__(self, label: str | None = None, length: float = 0.0):
        self.label = label
        self.length = length
        self.children: list[TreeNode] = []
        self.raw_length: float | None = None  # pre-clamp value, when clamped

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def copy(self) -> "TreeNode":
        dup = TreeNode(self.label, self.length)
        dup.raw_length = self.raw_length
        dup.children = [c.copy() for c in self.children]
        return dup

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


class PhyloTree:
    def __init__(self, root: TreeNode):
        self.root = root
        labels = self.leaf_labels()
        dupes = {x for x in labels if labels.count(x) > 1}
        if dupes:
            raise DataError(f"duplicate leaf labels: {sorted(dupes)}")

    def leaves(self) -> list[TreeNode]:
        return [n for n in self.root.walk() if n.is_leaf]

    def leaf_labels(self) -> list[str]:
        return [n.label for n in self.leaves()]

    def clamp_events(self) -> list[tuple[str, float]]:
        """(leaf label or 'internal', raw negative limb) per clamped edge."""
        return [
            (n.label or "internal", n.raw_length)
            for n in self.root.walk()
            if n.raw_length is not None
        ]

    def path_length_matrix(self) -> tuple[list[str], np.ndarray]:
        """Leaf-to-leaf distances by summing branch lengths; leaf order is
        serialization (depth-first) order."""
        labels = self.leaf_labels()
        index = {lab: k for k, lab in enumerate(labels)}
        m = np.zeros((len(labels), len(labels)))

        def collect(node) -> list[tuple[int, float]]:
            if node.is_leaf:
                return [(index[node.label], 0.0)]
            below: list[tuple[int, float]] = []
            for child in node.children:
                sub = [(i, d + child.length) for i, d in collect(child)]
                for i, di in sub:
                    for j, dj in below:
                        m[i, j] = m[j, i] = di + dj
                below.extend(sub)
            return below

        collect(self.root)
        return labels, m

    def splits(self) -> frozenset[frozenset[str]]:
        """Nontrivial leaf bipartitions (one side each), for comparing
        unrooted topologies independent of root placement."""
        all_labels = frozenset(self.leaf_labels())
        out = set()

        def below(node) -> frozenset[str]:
            if node.is_leaf:
                return frozenset([node.label])
            got = frozenset().union(*(below(c) for c in node.children))
            if 2 <= len(got) <= len(all_labels) - 2:
                out.add(got)
            return got

        below(self.root)
        return frozenset(frozenset(min(s, all_labels - s, key=sorted)) for s in out)


def _clamped(node: TreeNode, limb: float) -> TreeNode:
    if limb < 0:
        node.raw_length = limb
        node.length = 0.0
    else:
        node.length = limb
    return node


def neighbor_joining(d: DistanceMatrix) -> PhyloTree:
    """Build an NJ tree; ties in the Q-criterion go to the lowest (row,
    column) pair of the current matrix."""
    n = len(d.labels)
    if n < 2:
        raise DataError("neighbor joining needs at least 2 labels")
    nodes = [TreeNode(label=lab) for lab in d.labels]
    dist = d.values.astype(float).copy()
    while len(nodes) > 2:
        m = len(nodes)
        r = dist.sum(axis=1)
        best = None
        for i in range(m):
            for j in range(i + 1, m):
                q = (m - 2) * dist[i, j] - r[i] - r[j]
                if best is None or q < best[0]:
                    best = (q, i, j)
        _, i, j = best
        limb_i = 0.5 * dist[i, j] + (r[i] - r[j]) / (2 * (m - 2))
        limb_j = dist[i, j] - limb_i
        joined = TreeNode()
        joined.children = [_clamped(nodes[i], limb_i), _clamped(nodes[j], limb_j)]
        new_row = 0.5 * (dist[i] + dist[j] - dist[i, j])
        dist[i], dist[:, i] = new_row, new_row
        dist[i, i] = 0.0
        dist = np.delete(np.delete(dist, j, axis=0), j, axis=1)
        nodes[i] = joined
        del nodes[j]
    root = TreeNode()
    half = dist[0, 1] / 2.0
    root.children = [_clamped(nodes[0], half), _clamped(nodes[1], half)]
    return PhyloTree(root)


# ---------------------------------------------------------------------------
# Newick


def to_newick(t: PhyloTree) -> str:
    def render(node: TreeNode, top: bool) -> str:
        if node.is_leaf:
            body = node.label or ""
        else:
            body = "(" + ",".join(render(c, False) for c in node.children) + ")"
            if node.label:
                body += node.label
        return body if top else f"{body}:{node.length:.12g}"

    return render(t.root, True) + ";"


_LABEL_STOP = set("(),:;")


def parse_newick(text: str) -> PhyloTree:
    s = "".join(text.split())
    pos = 0

    def error(msg):
        return DataError(f"newick parse error at position {pos}: {msg}")

    def peek():
        return s[pos] if pos < len(s) else ""

    def read_label():
        nonlocal pos
        start = pos
        while pos < len(s) and s[pos] not in _LABEL_STOP:
            pos += 1
        return s[start:pos]

    def parse_clade() -> TreeNode:
        nonlocal pos
        node = TreeNode()
        if peek() == "(":
            pos += 1
            node.children.append(parse_clade())
            while peek() == ",":
                pos += 1
                node.children.append(parse_clade())
            if peek() != ")":
                raise error("expected ')'")
            pos += 1
        label = read_label()
        node.label = label or None
        if peek() == ":":
            pos += 1
            number = read_label()
            try:
                node.length = float(number)
            except ValueError:
                raise error(f"bad branch length {number!r}") from None
        return node

    root = parse_clade()
    if peek() != ";":
        raise error("expected ';'")
    pos += 1
    if pos != len(s):
        raise error("trailing characters after ';'")
    return PhyloTree(root)


# ---------------------------------------------------------------------------
# rerooting


def reroot(t: PhyloTree, leaf_label: str) -> PhyloTree:
    """Root the tree at the attachment node of the named leaf.

    The old root, if left with a single child, is spliced out (its two
    incident edges merge), so the leaf-to-leaf path lengths are unchanged.
    """
    root = t.root.copy()
    parents: dict[int, TreeNode] = {}
    target_parent = None
    for node in root.walk():
        for child in node.children:
            parents[id(child)] = node
        if node.is_leaf and node.label == leaf_label:
            target_parent = parents.get(id(node))
    if target_parent is None:
        for node in root.walk():
            if node.is_leaf and node.label == leaf_label:
                # the leaf hangs directly off the root: already there
                return PhyloTree(root)
        raise DataError(f"leaf {leaf_label!r} not in tree")

    # reverse parent-child links along the path from the attachment node up;
    # the edge between path[k] and path[k+1] keeps its original length,
    # which lives on path[k] before the flip and on path[k+1] after
    path = [target_parent]
    while id(path[-1]) in parents:
        path.append(parents[id(path[-1])])
    lengths = [node.length for node in path]
    for k in range(len(path) - 1):
        child, parent = path[k], path[k + 1]
        parent.children.remove(child)
        child.children.append(parent)
        parent.length = lengths[k]
    new_root = path[0]
    new_root.length = 0.0

    if len(path) >= 2:
        old_root = path[-1]
        if len(old_root.children) == 1 and old_root.label is None:
            carrier = path[-2]
            lone = old_root.children[0]
            carrier.children.remove(old_root)
            lone.length += old_root.length
            carrier.children.append(lone)
    return PhyloTree(new_root)
