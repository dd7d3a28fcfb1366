"""Graph construction, validation and uniform edge sampling.

Labeling conventions (fixed so that initialization specs are unambiguous):

* ``star:n``      center is node 0, leaves 1..n-1.
* ``dumbbell:n``  cliques on {0..n-1} and {n..2n-1}, bridge (n-1, 2n-1).
* ``btree:n``     root is node 0; the left subtree occupies 1..(n-1)/2 and the
                  right subtree (n+1)/2..n-1, each labeled recursively the same
                  way (pre-order), so the left subtree comes before the right.
* ``bipartite:a,b`` parts {0..a-1} and {a..a+b-1}.

Family graphs list their edges lexicographically by ``(min, max)``; graphs read
from an edge list keep file order.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from pathlib import Path

import numpy as np

from .rng import RngStream

FAMILIES = ("complete", "path", "cycle", "star", "dumbbell", "btree", "bipartite", "regular", "file")

REGULAR_RETRY_BUDGET = 1000


class GraphError(ValueError):
    """Invalid graph specification or graph data."""


@dataclass(frozen=True)
class GraphSpec:
    family: str
    params: tuple = ()

    def __str__(self) -> str:
        if not self.params:
            return self.family
        return f"{self.family}:" + ",".join(str(p) for p in self.params)


def parse_graph_spec(text: str) -> GraphSpec:
    """Parse ``family:params`` into a :class:`GraphSpec`.

    >>> parse_graph_spec("bipartite:3,4")
    GraphSpec(family='bipartite', params=(3, 4))
    """
    family, sep, rest = text.strip().partition(":")
    family = family.strip().lower()
    if family not in FAMILIES:
        raise GraphError(f"unknown graph family {family!r}")
    if not sep or not rest:
        raise GraphError(f"missing parameters in graph spec {text!r}")
    if family == "file":
        return GraphSpec("file", (rest,))
    try:
        params = tuple(int(p) for p in rest.split(","))
    except ValueError:
        raise GraphError(f"non-integer parameter in graph spec {text!r}") from None
    arity = {"bipartite": (2,), "regular": (2, 3)}.get(family, (1,))
    if len(params) not in arity:
        raise GraphError(f"{family} takes {' or '.join(map(str, arity))} parameter(s), got {len(params)}")
    return GraphSpec(family, params)


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected connected graph on nodes ``0..n-1``.

    The edge array is read-only; graphs are never mutated after construction
    and may be shared freely between trials.
    """

    n: int
    edges: np.ndarray
    name: str = field(default="")

    def __post_init__(self):
        e = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)
        _validate(self.n, e)

    def __repr__(self) -> str:
        label = self.name or "graph"
        return f"Graph({label}, n={self.n}, m={self.m})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    __hash__ = None  # type: ignore[assignment]

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def family(self) -> str:
        return self.name.partition(":")[0]

    @cached_property
    def ei(self) -> np.ndarray:
        a = np.ascontiguousarray(self.edges[:, 0])
        a.setflags(write=False)
        return a

    @cached_property
    def ej(self) -> np.ndarray:
        a = np.ascontiguousarray(self.edges[:, 1])
        a.setflags(write=False)
        return a

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.bincount(self.edges.ravel(), minlength=self.n).astype(np.int64)
        d.setflags(write=False)
        return d

    @property
    def mean_degree(self) -> float:
        return 2.0 * self.m / self.n

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges.tolist():
            nbrs[i].append(j)
            nbrs[j].append(i)
        return tuple(tuple(x) for x in nbrs)

    @cached_property
    def edge_ids(self) -> np.ndarray:
        """Symmetric ``n x n`` lookup: edge index or -1."""
        t = np.full((self.n, self.n), -1, dtype=np.int64)
        k = np.arange(self.m)
        t[self.ei, self.ej] = k
        t[self.ej, self.ei] = k
        t.setflags(write=False)
        return t

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.edge_ids[i, j] >= 0)

    def render(self) -> str:
        """Edge-list text accepted by :func:`load_edge_list`."""
        return "".join(f"{i} {j}\n" for i, j in self.edges.tolist())


def _validate(n: int, edges: np.ndarray) -> None:
    if n < 2:
        raise GraphError("a graph needs at least 2 nodes")
    if len(edges) == 0:
        raise GraphError("graph has no edges")
    if edges.min() < 0 or edges.max() >= n:
        raise GraphError("edge endpoint out of range")
    if np.any(edges[:, 0] == edges[:, 1]):
        raise GraphError("self-loop")
    key = np.sort(edges, axis=1)
    if len(np.unique(key, axis=0)) != len(key):
        raise GraphError("duplicate edge")
    if not _connected(n, edges):
        raise GraphError("graph is disconnected")


def _connected(n: int, edges: np.ndarray) -> bool:
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for i, j in edges.tolist():
        nbrs[i].append(j)
        nbrs[j].append(i)
    seen = [False] * n
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        u = queue.popleft()
        for w in nbrs[u]:
            if not seen[w]:
                seen[w] = True
                count += 1
                queue.append(w)
    return count == n


def _canonical(pairs) -> np.ndarray:
    e = np.array(sorted((min(i, j), max(i, j)) for i, j in pairs), dtype=np.int64)
    return e.reshape(-1, 2)


def _btree_edges(n: int) -> list[tuple[int, int]]:
    out = []

    def build(root: int, size: int) -> None:
        if size == 1:
            return
        half = (size - 1) // 2
        left, right = root + 1, root + 1 + half
        out.append((root, left))
        out.append((root, right))
        build(left, half)
        build(right, half)

    build(0, n)
    return out


def random_regular_edges(n: int, d: int, seed: int) -> np.ndarray:
    """Pairing-model d-regular graph, rejecting loops, multi-edges and
    disconnected outcomes, with a budget of ``REGULAR_RETRY_BUDGET`` attempts."""
    if (n * d) % 2:
        raise GraphError("regular graph needs n*d even")
    if not 1 <= d < n:
        raise GraphError("regular graph needs 1 <= d < n")
    gen = RngStream(seed, 0).generator()
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    for _ in range(REGULAR_RETRY_BUDGET):
        gen.shuffle(stubs)
        pairs = np.sort(stubs.reshape(-1, 2), axis=1)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        if len(np.unique(pairs, axis=0)) != len(pairs):
            continue
        e = _canonical(pairs.tolist())
        if _connected(n, e):
            return e
    raise GraphError(f"random {d}-regular generation on {n} nodes failed after {REGULAR_RETRY_BUDGET} attempts")


def make_graph(spec: GraphSpec | str) -> Graph:
    """Build a graph from a :class:`GraphSpec` or its string form."""
    if isinstance(spec, str):
        spec = parse_graph_spec(spec)
    fam, p = spec.family, spec.params
    if fam == "file":
        path = Path(p[0])
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise GraphError(f"cannot read edge list {path}: {exc}") from exc
        g = load_edge_list(text)
        return Graph(g.n, g.edges, name=str(spec))

    if fam == "bipartite":
        a, b = p
        if a < 1 or b < 1:
            raise GraphError("bipartite parts must be non-empty")
        return Graph(a + b, _canonical((i, a + j) for i in range(a) for j in range(b)), name=str(spec))

    if fam == "regular":
        n, d = p[0], p[1]
        seed = p[2] if len(p) > 2 else 0
        if n < 2:
            raise GraphError("n must be >= 2")
        return Graph(n, random_regular_edges(n, d, seed), name=f"regular:{n},{d},{seed}")

    (n,) = p
    if n < 2:
        raise GraphError("n must be >= 2")
    if fam == "complete":
        pairs = combinations(range(n), 2)
        size = n
    elif fam == "path":
        pairs = ((i, i + 1) for i in range(n - 1))
        size = n
    elif fam == "cycle":
        if n < 3:
            raise GraphError("cycle needs n >= 3")
        pairs = [(i, (i + 1) % n) for i in range(n)]
        size = n
    elif fam == "star":
        pairs = ((0, i) for i in range(1, n))
        size = n
    elif fam == "dumbbell":
        pairs = list(combinations(range(n), 2))
        pairs += [(n + i, n + j) for i, j in combinations(range(n), 2)]
        pairs.append((n - 1, 2 * n - 1))
        size = 2 * n
    elif fam == "btree":
        k = int(round(math.log2(n + 1)))
        if n < 3 or 2 ** k - 1 != n:
            raise GraphError("btree size must be 2**k - 1 with k >= 2")
        pairs = _btree_edges(n)
        size = n
    else:  # pragma: no cover - parse_graph_spec filters families
        raise GraphError(f"unknown family {fam}")
    return Graph(size, _canonical(pairs), name=str(spec))


def load_edge_list(text: str) -> Graph:
    """Parse ``"i j"`` lines (0-based, ``#`` comments, blank lines ignored)."""
    pairs = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise GraphError(f"line {lineno}: expected two integers, got {raw!r}")
        try:
            i, j = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GraphError(f"line {lineno}: non-integer token in {raw!r}") from None
        if i < 0 or j < 0:
            raise GraphError(f"line {lineno}: negative node index")
        if i == j:
            raise GraphError(f"line {lineno}: self-loop ({i}, {j})")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise GraphError(f"line {lineno}: duplicate edge ({i}, {j})")
        seen.add(key)
        pairs.append((i, j))
    if not pairs:
        raise GraphError("edge list is empty")
    n = max(max(e) for e in pairs) + 1
    return Graph(n, np.array(pairs, dtype=np.int64), name="file")


def sample_edge(g: Graph, r: RngStream) -> tuple[int, int]:
    """One edge drawn uniformly from ``g.edges``."""
    k = r.integers(g.m)
    return int(g.ei[k]), int(g.ej[k])


def node_levels(g: Graph, root: int = 0) -> np.ndarray:
    """BFS depth of every node from ``root``."""
    depth = np.full(g.n, -1, dtype=np.int64)
    depth[root] = 0
    queue = deque([root])
    adj = g.adjacency
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if depth[w] < 0:
                depth[w] = depth[u] + 1
                queue.append(w)
    return depth
