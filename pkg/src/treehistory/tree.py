"""Static tree representation, validation, rooting, and edge-list I/O.

External node labels are arbitrary strings; everything downstream works on
dense integer indices 0..n-1 so the hot loops can use flat arrays.  Trees are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass


class TreeHistoryError(Exception):
    """Base class for data errors raised by this package."""


class MalformedLineError(TreeHistoryError):
    def __init__(self, lineno, line):
        super().__init__(
            f"line {lineno}: expected two whitespace-separated labels, got {line!r}"
        )
        self.lineno = lineno


class SelfLoopError(TreeHistoryError):
    def __init__(self, label):
        super().__init__(f"self-loop at node {label!r}")
        self.label = label


class DuplicateEdgeError(TreeHistoryError):
    def __init__(self, a, b):
        super().__init__(f"duplicate edge {a!r} -- {b!r}")
        self.edge = (a, b)


class NotATreeError(TreeHistoryError):
    pass


class InconsistentHistoryError(TreeHistoryError):
    """An ordering of the nodes that no growth process could have produced."""

    def __init__(self, position, message):
        super().__init__(f"position {position}: {message}")
        self.position = position


class Tree:
    """Undirected tree with nodes indexed 0..n-1 and a bidirectional label map.

    `labels=None` means nodes are labelled by their own index rendered as a
    string; this avoids materialising a million strings for large synthetic
    trees.
    """

    __slots__ = ("n", "adjacency", "edge_order", "_labels", "_label_index")

    def __init__(self, adjacency, labels=None, edge_order=None):
        self.n = len(adjacency)
        self.adjacency = adjacency
        if edge_order is None:
            edge_order = [(u, v) for u in range(self.n) for v in adjacency[u] if u < v]
        self.edge_order = edge_order
        self._labels = labels
        self._label_index = None
        if labels is not None:
            if len(labels) != self.n:
                raise ValueError("one label per node required")
            self._label_index = {lab: i for i, lab in enumerate(labels)}

    def degree(self, v):
        return len(self.adjacency[v])

    def label(self, v):
        return self._labels[v] if self._labels is not None else str(v)

    def index(self, label):
        if self._label_index is not None:
            return self._label_index[label]
        v = int(label)
        if not 0 <= v < self.n:
            raise KeyError(label)
        return v

    def has_label(self, label):
        try:
            self.index(label)
        except (KeyError, ValueError):
            return False
        return True

    def edges(self):
        """Edges as (u, v) index pairs in construction order."""
        return list(self.edge_order)

    def __repr__(self):
        return f"Tree(n={self.n})"


def build_tree(label_pairs):
    """Validated Tree from (label, label) pairs, indices in first-appearance order.

    Raises SelfLoopError, DuplicateEdgeError, or NotATreeError as appropriate.
    An empty pair list is rejected (the smallest representable tree here has
    one edge; single-node trees only arise internally).
    """
    index = {}
    adjacency = []
    labels = []
    edge_order = []
    seen = set()

    def idx(label):
        i = index.get(label)
        if i is None:
            i = len(labels)
            index[label] = i
            labels.append(label)
            adjacency.append([])
        return i

    for a, b in label_pairs:
        if a == b:
            raise SelfLoopError(a)
        u, v = idx(a), idx(b)
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise DuplicateEdgeError(a, b)
        seen.add(key)
        adjacency[u].append(v)
        adjacency[v].append(u)
        edge_order.append((u, v))

    n = len(labels)
    if n == 0:
        raise NotATreeError("no edges found")
    if len(edge_order) != n - 1:
        raise NotATreeError(
            f"{len(edge_order)} edges for {n} nodes; a tree needs n-1 (cycle present)"
        )
    # connectivity: n-1 edges + connected <=> tree
    reached = 1
    visited = bytearray(n)
    visited[0] = 1
    stack = [0]
    while stack:
        u = stack.pop()
        for w in adjacency[u]:
            if not visited[w]:
                visited[w] = 1
                reached += 1
                stack.append(w)
    if reached != n:
        raise NotATreeError(f"disconnected: reached {reached} of {n} nodes")
    return Tree(adjacency, labels, edge_order)


def parse_edge_list(text):
    """Parse whitespace-separated edge-list text into a validated Tree.

    Accepts a string or an iterable of lines.  Blank lines and lines starting
    with '#' are ignored.
    """
    if isinstance(text, str):
        lines = text.splitlines()
    else:
        lines = text
    pairs = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise MalformedLineError(lineno, raw.rstrip("\n"))
        pairs.append((parts[0], parts[1]))
    return build_tree(pairs)


def serialize_edge_list(tree):
    """Edge-list text whose reparse reproduces the same labels in the same order."""
    out = []
    for u, v in tree.edge_order:
        out.append(f"{tree.label(u)} {tree.label(v)}")
    return "\n".join(out) + "\n"


@dataclass
class RootedView:
    """Orientation of a tree away from a chosen root.

    subtree[v] is the number of nodes in v's branch when the edge to its
    parent is cut, v included; subtree[root] = n.  The size of the reverse
    orientation of the edge (parent(v), v) is n - subtree[v].  `order` lists
    nodes root-outward, so reversed(order) is a valid leaves-first schedule.
    """

    root: int
    parent: list
    order: list
    subtree: list

    def branch_size(self, u, v):
        """Number of nodes on v's side when edge (u, v) is cut, v included."""
        if self.parent[v] == u:
            return self.subtree[v]
        if self.parent[u] == v:
            return len(self.parent) - self.subtree[u]
        raise ValueError(f"({u}, {v}) is not an edge")


def root_at(tree, root):
    """Compute parent pointers and all branch sizes in one pass.

    Uses an explicit stack: million-node paths must not hit the interpreter
    recursion limit.
    """
    n = tree.n
    if not 0 <= root < n:
        raise IndexError(f"root {root} out of range")
    parent = [-1] * n
    order = [root]
    adjacency = tree.adjacency
    stack = [root]
    while stack:
        u = stack.pop()
        pu = parent[u]
        for w in adjacency[u]:
            if w != pu:
                parent[w] = u
                order.append(w)
                stack.append(w)
    subtree = [1] * n
    for v in reversed(order):
        p = parent[v]
        if p >= 0:
            subtree[p] += subtree[v]
    return RootedView(root, parent, order, subtree)


@dataclass
class History:
    """A feasible arrival order: order[t] is the node that arrived at time t.

    arrival is the inverse permutation; parent_of[v] is the unique earlier
    neighbour of v (-1 for the seed).
    """

    order: list
    arrival: list
    parent_of: list

    @property
    def seed(self):
        return self.order[0]

    def __len__(self):
        return len(self.order)


def is_consistent(tree, order):
    """Validate an arrival order against the tree; return the History.

    Every node after the first must have exactly one neighbour that arrived
    earlier (that neighbour is its parent).  Raises InconsistentHistoryError
    naming the first violating position.
    """
    n = tree.n
    order = list(order)
    if len(order) != n:
        raise InconsistentHistoryError(len(order), f"length {len(order)} != n = {n}")
    arrival = [-1] * n
    for t, v in enumerate(order):
        if not 0 <= v < n:
            raise InconsistentHistoryError(t, f"node {v} out of range")
        if arrival[v] >= 0:
            raise InconsistentHistoryError(t, f"node {v} repeated; not a permutation")
        arrival[v] = t
    parent_of = [-1] * n
    for t in range(1, n):
        v = order[t]
        earlier = [w for w in tree.adjacency[v] if arrival[w] < t]
        if len(earlier) != 1:
            raise InconsistentHistoryError(
                t, f"node {v} has {len(earlier)} earlier neighbours (needs exactly 1)"
            )
        parent_of[v] = earlier[0]
    return History(order, arrival, parent_of)


def permute_nodes(tree, perm):
    """Copy of the tree with node u renamed to perm[u] (labels follow nodes)."""
    n = tree.n
    adjacency = [None] * n
    for u in range(n):
        adjacency[perm[u]] = [perm[w] for w in tree.adjacency[u]]
    labels = None
    if tree._labels is not None:
        labels = [None] * n
        for u in range(n):
            labels[perm[u]] = tree._labels[u]
    edge_order = [(perm[u], perm[v]) for u, v in tree.edge_order]
    return Tree(adjacency, labels, edge_order)


class DirectedEdgeIndex:
    """Flat enumeration of the 2(n-1) directed edges, aligned with adjacency order.

    Edge id e runs over (u -> v) pairs in adjacency order: ids offsets[u] to
    offsets[u+1]-1 leave node u.  branch[e] is the node count of v's side when
    the edge is cut (v included), and rev[e] is the id of (v -> u); the two
    branch sizes of a reversed pair always sum to n.
    """

    __slots__ = ("offsets", "targets", "sources", "rev", "branch")

    def __init__(self, tree, view=None):
        n = tree.n
        if view is None:
            view = root_at(tree, 0)
        adjacency = tree.adjacency
        offsets = [0] * (n + 1)
        for u in range(n):
            offsets[u + 1] = offsets[u] + len(adjacency[u])
        targets = []
        sources = []
        pos = [dict() for _ in range(n)]
        for u in range(n):
            for k, v in enumerate(adjacency[u]):
                pos[u][v] = k
                targets.append(v)
                sources.append(u)
        rev = [0] * offsets[n]
        branch = [0] * offsets[n]
        parent, subtree = view.parent, view.subtree
        for e in range(offsets[n]):
            u, v = sources[e], targets[e]
            rev[e] = offsets[v] + pos[v][u]
            branch[e] = subtree[v] if parent[v] == u else n - subtree[u]
        self.offsets = offsets
        self.targets = targets
        self.sources = sources
        self.rev = rev
        self.branch = branch

    def edge_id(self, u, v):
        base = self.offsets[u]
        for k in range(base, self.offsets[u + 1]):
            if self.targets[k] == v:
                return k
        raise ValueError(f"({u}, {v}) is not an edge")

    def out_ids(self, u):
        return range(self.offsets[u], self.offsets[u + 1])
