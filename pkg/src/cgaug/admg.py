"""Acyclic directed mixed graphs: validation, districts, and Markov pillows.

An ADMG has directed edges (``a -> b``) and bidirected edges (``a <-> b``,
unordered).  The directed part must be acyclic.  Bidirected edges stand for
latent confounding between their endpoints; the Markov pillow of a vertex
generalizes its parent set to such graphs and is the conditioning set used
by the augmentation engine.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class GraphError(Exception):
    """Base class for structural graph problems."""


class SelfLoop(GraphError):
    pass


class UnknownVertex(GraphError):
    pass


class CyclicGraph(GraphError):
    pass


class GraphParseError(GraphError):
    """Malformed graph text; carries the 1-based line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class Admg:
    """Vertex-labeled mixed graph.

    ``vertices`` is the declaration order, which doubles as the tie-breaking
    rule when several topological orders are valid.  ``directed`` holds
    ordered pairs, ``bidirected`` unordered pairs.  A pair may appear in both
    sets.
    """

    vertices: tuple[str, ...]
    directed: frozenset[tuple[str, str]] = frozenset()
    bidirected: frozenset[frozenset[str]] = frozenset()

    @staticmethod
    def create(
        vertices: Sequence[str],
        directed: Iterable[tuple[str, str]] = (),
        bidirected: Iterable[tuple[str, str]] = (),
    ) -> "Admg":
        """Build an Admg, normalizing bidirected pairs to unordered form."""
        return Admg(
            vertices=tuple(vertices),
            directed=frozenset((a, b) for a, b in directed),
            bidirected=frozenset(frozenset(p) for p in bidirected),
        )

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class TopoIndexing:
    """A topological order of the vertices.

    ``order[pos]`` is the vertex at 0-based position ``pos``; for every
    directed edge a -> b, ``position[a] < position[b]``.
    """

    order: tuple[str, ...]
    position: dict[str, int] = field(compare=False)

    @staticmethod
    def from_order(order: Sequence[str]) -> "TopoIndexing":
        order = tuple(order)
        return TopoIndexing(order=order, position={v: i for i, v in enumerate(order)})


@dataclass(frozen=True)
class MarkovPillowTable:
    """Per-position Markov pillows: ``pillows[j]`` is a frozenset of positions < j."""

    pillows: tuple[frozenset[int], ...]


def validate(graph: Admg) -> TopoIndexing:
    """Check structure and return a deterministic topological indexing.

    Vertices are emitted in declaration order, each preceded by its
    not-yet-emitted ancestors (recursively, parents visited in declaration
    order).  This keeps the output stable across runs and makes the
    resulting order a pure function of the declaration.

    Raises SelfLoop, UnknownVertex, or CyclicGraph.
    """
    declared = set(graph.vertices)
    if len(declared) != len(graph.vertices):
        dup = [v for i, v in enumerate(graph.vertices) if v in graph.vertices[:i]]
        raise UnknownVertex(f"duplicate vertex declaration: {dup[0]!r}")
    for a, b in graph.directed:
        if a == b:
            raise SelfLoop(f"directed self-loop on {a!r}")
        for v in (a, b):
            if v not in declared:
                raise UnknownVertex(f"edge endpoint {v!r} is not a declared vertex")
    for pair in graph.bidirected:
        if len(pair) != 2:
            raise SelfLoop(f"bidirected self-loop on {next(iter(pair))!r}")
        for v in pair:
            if v not in declared:
                raise UnknownVertex(f"edge endpoint {v!r} is not a declared vertex")

    decl_index = {v: i for i, v in enumerate(graph.vertices)}
    parents: dict[str, list[str]] = {v: [] for v in graph.vertices}
    for a, b in graph.directed:
        parents[b].append(a)
    for v in parents:
        parents[v].sort(key=decl_index.__getitem__)

    WHITE, GRAY, BLACK = 0, 1, 2
    color = {v: WHITE for v in graph.vertices}
    order: list[str] = []

    def visit(root: str) -> None:
        # Iterative DFS over parent links; a GRAY vertex seen again closes a cycle.
        stack: list[tuple[str, int]] = [(root, 0)]
        color[root] = GRAY
        while stack:
            v, k = stack[-1]
            ps = parents[v]
            if k < len(ps):
                stack[-1] = (v, k + 1)
                p = ps[k]
                if color[p] == GRAY:
                    raise CyclicGraph(f"directed cycle through {p!r}")
                if color[p] == WHITE:
                    color[p] = GRAY
                    stack.append((p, 0))
            else:
                stack.pop()
                color[v] = BLACK
                order.append(v)

    for v in graph.vertices:
        if color[v] == WHITE:
            visit(v)
    return TopoIndexing.from_order(order)


def _positional(graph: Admg, indexing: TopoIndexing):
    """Adjacency keyed by topological position: (parents, bidirected neighbors)."""
    pos = indexing.position
    d = graph.n_vertices
    parents: list[set[int]] = [set() for _ in range(d)]
    sib: list[set[int]] = [set() for _ in range(d)]
    for a, b in graph.directed:
        parents[pos[b]].add(pos[a])
    for pair in graph.bidirected:
        a, b = tuple(pair)
        sib[pos[a]].add(pos[b])
        sib[pos[b]].add(pos[a])
    return parents, sib


def district(graph: Admg, indexing: TopoIndexing, v: int) -> frozenset[int]:
    """Vertices reachable from position ``v`` via bidirected paths among positions <= v.

    Always contains ``v`` itself.
    """
    _, sib = _positional(graph, indexing)
    seen = {v}
    queue = deque([v])
    while queue:
        u = queue.popleft()
        for w in sib[u]:
            if w <= v and w not in seen:
                seen.add(w)
                queue.append(w)
    return frozenset(seen)


def markov_pillow(graph: Admg, indexing: TopoIndexing) -> MarkovPillowTable:
    """Markov pillow of every position.

    For position j, take its district within the subgraph on positions <= j,
    add the parents of that district, and remove j itself.  With no
    bidirected edges this reduces to the parent set.  Every pillow member is
    strictly below j.
    """
    parents, sib = _positional(graph, indexing)
    d = graph.n_vertices
    pillows = []
    for j in range(d):
        dis = {j}
        queue = deque([j])
        while queue:
            u = queue.popleft()
            for w in sib[u]:
                if w <= j and w not in dis:
                    dis.add(w)
                    queue.append(w)
        pa = set()
        for u in dis:
            pa |= parents[u]
        pillows.append(frozenset((dis | pa) - {j}))
    return MarkovPillowTable(pillows=tuple(pillows))


def is_uninformative(graph: Admg) -> bool:
    """True iff the graph is complete with every edge bidirected.

    Such a graph constrains nothing: its factorization is the plain chain
    rule, and augmenting with it reproduces the empirical distribution.
    A single-vertex graph is vacuously uninformative.
    """
    d = graph.n_vertices
    if graph.directed:
        return False
    return len(graph.bidirected) == d * (d - 1) // 2


def parse_graph_lines(
    lines: Iterable[tuple[int, str]],
) -> tuple[Admg, tuple[str, ...]]:
    """Parse (lineno, text) pairs of the graph format.

    Format: a ``vertices: a, b, c`` header, then one edge per line
    (``a -> b`` or ``a <-> b``).  An optional ``discrete: a, b`` line flags
    discrete variables.  ``#`` starts a comment; blank lines are ignored.
    Returns the graph and the tuple of discrete vertex names.
    """
    vertices: tuple[str, ...] | None = None
    discrete: tuple[str, ...] = ()
    directed: list[tuple[str, str]] = []
    bidirected: list[tuple[str, str]] = []
    for lineno, raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("vertices:"):
            if vertices is not None:
                raise GraphParseError(lineno, "duplicate vertices: header")
            names = [t.strip() for t in line[len("vertices:"):].split(",")]
            names = [t for t in names if t]
            if not names:
                raise GraphParseError(lineno, "empty vertex list")
            vertices = tuple(names)
            continue
        if line.startswith("discrete:"):
            names = [t.strip() for t in line[len("discrete:"):].split(",")]
            discrete = tuple(t for t in names if t)
            continue
        if vertices is None:
            raise GraphParseError(lineno, "expected a 'vertices:' header before edges")
        if "<->" in line:
            lhs, _, rhs = line.partition("<->")
            target = bidirected
        elif "->" in line:
            lhs, _, rhs = line.partition("->")
            target = directed
        else:
            raise GraphParseError(lineno, f"unrecognized line: {line!r}")
        a, b = lhs.strip(), rhs.strip()
        if not a or not b:
            raise GraphParseError(lineno, "edge endpoint is empty")
        if a not in vertices or b not in vertices:
            missing = a if a not in vertices else b
            raise GraphParseError(lineno, f"edge endpoint {missing!r} is not a declared vertex")
        target.append((a, b))
    if vertices is None:
        raise GraphParseError(1, "missing 'vertices:' header")
    for name in discrete:
        if name not in vertices:
            raise GraphParseError(1, f"discrete name {name!r} is not a declared vertex")
    return Admg.create(vertices, directed, bidirected), discrete


def parse_graph_text(text: str) -> tuple[Admg, tuple[str, ...]]:
    """Parse the full text of a graph file."""
    return parse_graph_lines(enumerate(text.splitlines(), start=1))


def load_graph(path: str) -> tuple[Admg, tuple[str, ...]]:
    """Read and parse a graph file (UTF-8)."""
    with open(path, encoding="utf-8") as f:
        return parse_graph_text(f.read())
