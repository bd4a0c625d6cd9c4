"""Block decomposition and brick-vertex trees.

A block of a connected graph is a maximal nonseparable subgraph; blocks
that consist of a single non-loop edge are bridges, all others bricks
(a loop forms a one-vertex brick).  The brick-vertex tree has a node per
original vertex and per brick, keeps the bridges as edges, and joins each
brick to the vertices it contains; it encodes the separation relation of
the graph exactly.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .dualgraph import Disconnected, GenericGraph, GraphError, UnknownVertex


class EmptyFamily(GraphError):
    pass


class LeafNotInF(GraphError):
    pass


class LabelSetMismatch(GraphError):
    pass


@dataclass(frozen=True)
class Tree:
    """Simple tree on string-named nodes (no parallel edges, no loops)."""

    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]

    @staticmethod
    def make(nodes: Iterable[str], edges: Iterable[Sequence[str]]) -> "Tree":
        ns = tuple(sorted(set(nodes)))
        es = tuple(sorted((u, v) if u <= v else (v, u) for u, v in edges))
        t = Tree(ns, es)
        if len(set(es)) != len(es):
            raise GraphError("parallel edges in a tree")
        if len(es) != len(ns) - 1 or not t.is_connected():
            raise GraphError("not a tree")
        return t

    def adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {v: [] for v in self.nodes}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for v in adj:
            adj[v].sort()
        return adj

    def is_connected(self) -> bool:
        if not self.nodes:
            return False
        adj = self.adjacency()
        seen = {self.nodes[0]}
        queue = deque(seen)
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return len(seen) == len(self.nodes)

    def valency(self, v: str) -> int:
        return len(self.adjacency()[v])

    def path(self, a: str, b: str) -> list[str]:
        """Unique a-b path, endpoints included."""
        if a not in self.nodes or b not in self.nodes:
            raise UnknownVertex(f"{a} or {b}")
        adj = self.adjacency()
        parent: dict[str, Optional[str]] = {a: None}
        queue = deque([a])
        while queue:
            x = queue.popleft()
            if x == b:
                break
            for y in adj[x]:
                if y not in parent:
                    parent[y] = x
                    queue.append(y)
        path = [b]
        while path[-1] != a:
            path.append(parent[path[-1]])
        path.reverse()
        return path


@dataclass(frozen=True)
class Block:
    """One block of the decomposition; `kind` is "brick" or "bridge"."""

    block_id: str
    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    kind: str


@dataclass(frozen=True)
class BlockDecomposition:
    graph: GenericGraph
    cut_vertices: frozenset[str]
    blocks: tuple[Block, ...]

    @property
    def bricks(self) -> tuple[Block, ...]:
        return tuple(b for b in self.blocks if b.kind == "brick")

    @property
    def bridges(self) -> tuple[Block, ...]:
        return tuple(b for b in self.blocks if b.kind == "bridge")

    def to_json(self) -> dict:
        return {
            "cut_vertices": sorted(self.cut_vertices),
            "bricks": [{"id": b.block_id, "vertices": sorted(b.vertices)} for b in self.bricks],
            "bridges": [list(b.edges[0]) for b in self.bridges],
        }


def block_decomposition(g: GenericGraph) -> BlockDecomposition:
    """Depth-first lowpoint decomposition into blocks (linear time).

    Parallel edges are distinct edges: a doubled pair is a circuit, hence a
    brick.  A loop forms a single-vertex brick on its own.
    """
    if not g.is_connected():
        raise Disconnected("block decomposition needs a connected graph")
    # adjacency with edge indices so parallel copies stay distinguishable
    incidence: dict[str, list[tuple[str, int]]] = {v: [] for v in g.vertex_ids}
    loops: list[tuple[str, int]] = []
    for i, (u, v) in enumerate(g.edges):
        if u == v:
            loops.append((u, i))
            continue
        incidence[u].append((v, i))
        incidence[v].append((u, i))
    for v in incidence:
        incidence[v].sort()

    disc: dict[str, int] = {}
    low: dict[str, int] = {}
    stack: list[int] = []  # edge indices
    block_edge_sets: list[list[int]] = []
    counter = 0

    root = g.vertex_ids[0]
    disc[root] = low[root] = counter
    counter += 1
    # iterative DFS frames: [vertex, incoming edge index, incidence position]
    work: list[list] = [[root, -1, 0]]
    while work:
        frame = work[-1]
        x, in_edge, pos = frame
        if pos < len(incidence[x]):
            frame[2] += 1
            y, ei = incidence[x][pos]
            if ei == in_edge:
                continue
            if y not in disc:
                disc[y] = low[y] = counter
                counter += 1
                stack.append(ei)
                work.append([y, ei, 0])
            elif disc[y] < disc[x]:
                stack.append(ei)
                low[x] = min(low[x], disc[y])
        else:
            work.pop()
            if not work:
                continue
            px = work[-1][0]
            low[px] = min(low[px], low[x])
            if low[x] >= disc[px]:
                # pop the block hanging below the tree edge px -> x
                comp = []
                while stack:
                    ei = stack.pop()
                    comp.append(ei)
                    if ei == in_edge:
                        break
                block_edge_sets.append(comp)

    blocks: list[Block] = []
    taken_ids = set(g.vertex_ids)
    serial = 0

    def next_block_id() -> str:
        nonlocal serial
        serial += 1
        candidate = f"B#{serial}"
        while candidate in taken_ids:
            candidate += "'"
        taken_ids.add(candidate)
        return candidate

    for comp in block_edge_sets:
        es = tuple(sorted(g.edges[i] for i in comp))
        vs = tuple(sorted({x for e in es for x in e}))
        kind = "bridge" if len(es) == 1 else "brick"
        blocks.append(Block(next_block_id(), vs, es, kind))
    for v, i in sorted(loops):
        blocks.append(Block(next_block_id(), (v,), (g.edges[i],), "brick"))

    # cut vertices are exactly the vertices lying in at least two blocks
    multi: dict[str, int] = {}
    for b in blocks:
        for v in b.vertices:
            multi[v] = multi.get(v, 0) + 1
    cut = {v for v, n in multi.items() if n >= 2}

    return BlockDecomposition(g, frozenset(cut), tuple(blocks))


@dataclass(frozen=True)
class BrickVertexTree:
    graph: GenericGraph
    tree: Tree
    brick_nodes: frozenset[str]
    brick_members: dict[str, tuple[str, ...]] = field(hash=False, default_factory=dict)

    def to_dot(self, highlight: Iterable[str] = ()) -> str:
        marked = set(highlight)
        lines = ["graph bvt {"]
        for v in self.tree.nodes:
            shape = 'shape=box,style=filled,fillcolor=gray85' if v in self.brick_nodes else "shape=circle"
            extra = ",color=green3,penwidth=2" if v in marked else ""
            lines.append(f'  "{v}" [{shape}{extra}];')
        for u, v in self.tree.edges:
            lines.append(f'  "{u}" -- "{v}";')
        lines.append("}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "nodes": [
                {"id": v, "kind": "brick" if v in self.brick_nodes else "vertex"}
                for v in self.tree.nodes
            ],
            "edges": [{"a": u, "b": v} for u, v in self.tree.edges],
        }


def brick_vertex_tree(g: GenericGraph) -> BrickVertexTree:
    dec = block_decomposition(g)
    nodes = list(g.vertex_ids)
    edges: list[tuple[str, str]] = []
    brick_nodes = set()
    members: dict[str, tuple[str, ...]] = {}
    for b in dec.blocks:
        if b.kind == "bridge":
            edges.append(b.edges[0])
        else:
            nodes.append(b.block_id)
            brick_nodes.add(b.block_id)
            members[b.block_id] = b.vertices
            for v in b.vertices:
                edges.append((b.block_id, v))
    tree = Tree.make(nodes, edges)
    return BrickVertexTree(g, tree, frozenset(brick_nodes), members)


def tree_separates(t: Tree, c: str, a: str, b: str) -> bool:
    """True iff c is one of a, b or lies on the unique a-b path."""
    for x in (c, a, b):
        if x not in t.nodes:
            raise UnknownVertex(x)
    if c == a or c == b:
        return True
    return c in t.path(a, b)


def convex_hull(t: Tree, family: Iterable[str]) -> Tree:
    """Minimal subtree of t containing the family: the union of the paths
    joining its members pairwise."""
    fam = sorted(set(family))
    if not fam:
        raise EmptyFamily("convex hull of the empty family")
    for f in fam:
        if f not in t.nodes:
            raise UnknownVertex(f)
    keep_nodes: set[str] = {fam[0]}
    keep_edges: set[tuple[str, str]] = set()
    for f in fam[1:]:
        path = t.path(fam[0], f)
        keep_nodes.update(path)
        for a, b in zip(path, path[1:]):
            keep_edges.add((a, b) if a <= b else (b, a))
    # paths through the anchor cover all pairwise paths in a tree
    return Tree(tuple(sorted(keep_nodes)), tuple(sorted(keep_edges)))


@dataclass(frozen=True)
class HullValencyReport:
    ok: bool
    offenders: tuple[tuple[str, int], ...]
    bvt: BrickVertexTree
    hull: Tree

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "offenders": [{"brick": b, "hull_valency": k} for b, k in self.offenders],
        }


def hull_valency_report(g: GenericGraph, family: Iterable[str]) -> HullValencyReport:
    """Hypothesis of the main theorems: every brick node of the brick-vertex
    tree has valency at most 3 inside the convex hull of the family."""
    fam = set(family)
    unknown = fam - set(g.vertex_ids)
    if unknown:
        raise UnknownVertex(", ".join(sorted(unknown)))
    bvt = brick_vertex_tree(g)
    hull = convex_hull(bvt.tree, fam)
    adj = hull.adjacency()
    offenders = tuple(
        (b, len(adj[b]))
        for b in sorted(bvt.brick_nodes & set(hull.nodes))
        if len(adj[b]) > 3
    )
    return HullValencyReport(not offenders, offenders, bvt, hull)


@dataclass(frozen=True)
class FTree:
    """Finite tree with an injective family of labels such that every node
    of valency <= 2 carries a label."""

    tree: Tree
    labels: dict[str, str] = field(hash=False, default_factory=dict)  # label -> node

    def label_set(self) -> frozenset[str]:
        return frozenset(self.labels)

    def node_label(self, node: str) -> Optional[str]:
        for lab, n in self.labels.items():
            if n == node:
                return lab
        return None


def as_F_tree(subtree: Tree, family: Iterable[str]) -> FTree:
    """Suppress every valency-2 node outside the family, merging its two
    edges; hull leaves must belong to the family."""
    fam = set(family)
    if not fam:
        raise EmptyFamily("an F-tree needs at least one label")
    for f in fam:
        if f not in subtree.nodes:
            raise UnknownVertex(f)
    adj = {v: list(ns) for v, ns in subtree.adjacency().items()}
    for v, ns in adj.items():
        if len(ns) <= 1 and v not in fam:
            raise LeafNotInF(f"leaf {v} does not carry a family label")
    keep = {v for v in adj if v in fam or len(adj[v]) >= 3}
    new_edges: set[tuple[str, str]] = set()
    for v in sorted(keep):
        for start in adj[v]:
            prev, cur = v, start
            while cur not in keep:
                nxt = [x for x in adj[cur] if x != prev]
                prev, cur = cur, nxt[0]
            if cur != v:
                new_edges.add((v, cur) if v <= cur else (cur, v))
    tree = Tree(tuple(sorted(keep)), tuple(sorted(new_edges)))
    return FTree(tree, {f: f for f in sorted(fam)})


def _canonical_encoding(t: FTree, node: str, parent: Optional[str], adj: dict[str, list[str]],
                        node_to_label: dict[str, str]) -> str:
    children = sorted(
        _canonical_encoding(t, c, node, adj, node_to_label)
        for c in adj[node]
        if c != parent
    )
    lab = node_to_label.get(node, "")
    return "(" + lab + "|" + ",".join(children) + ")"


def f_tree_isomorphic(t1: FTree, t2: FTree) -> bool:
    """Decide isomorphism of F-trees (an isomorphism must fix every label;
    at most one exists) by canonical encodings rooted at the node carrying
    the lexicographically least label."""
    if t1.label_set() != t2.label_set():
        raise LabelSetMismatch(f"{sorted(t1.label_set())} vs {sorted(t2.label_set())}")
    if not t1.labels:
        raise EmptyFamily("F-trees need at least one label")
    root_label = min(t1.labels)
    encs = []
    for t in (t1, t2):
        node_to_label = {n: lab for lab, n in t.labels.items()}
        encs.append(
            _canonical_encoding(t, t.labels[root_label], None, t.tree.adjacency(), node_to_label)
        )
    return encs[0] == encs[1]
