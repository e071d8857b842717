"""Rooted balls, directed balls and edge-balls.

Rooted trees are encoded by the classic AHU scheme flattened to a sequence of
integers: a vertex with children ``c1 <= c2 <= ... <= ck`` (compared by their
own codes) is written as ``(k, *c1, *c2, ..., *ck)``.  The encoding is
self-delimiting, so a subtree code is a contiguous slice and every vertex
contributes exactly one integer.

Rooted graphs with cycles (only ever met when taking a census of a finite
graph) are canonicalized by pruning pendant trees into vertex decorations and
running individualization/refinement on the remaining core.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import combinations_with_replacement
from math import comb, factorial
from typing import Iterable, Sequence

from .exceptions import (
    BadRadius,
    BallTooLarge,
    DegreeExceeded,
    ExplosionGuard,
    ParseError,
    RadiusExceeded,
)

Code = tuple[int, ...]

LEAF: Code = (0,)

#: default cap on the number of balls produced by :func:`enumerate_tree_balls`
ENUMERATION_CAP = 2_000_000


# --------------------------------------------------------------------------
# flat tree codes
# --------------------------------------------------------------------------


def join(children: Iterable[Code]) -> Code:
    """Code of a vertex whose child subtrees have the given codes."""
    kids = sorted(children)
    out = [len(kids)]
    for c in kids:
        out.extend(c)
    return tuple(out)


def _parse(code: Code, i: int) -> int:
    """Index one past the end of the subtree starting at ``i``."""
    k = code[i]
    i += 1
    for _ in range(k):
        i = _parse(code, i)
    return i


@lru_cache(maxsize=None)
def children(code: Code) -> tuple[Code, ...]:
    out = []
    i = 1
    for _ in range(code[0]):
        j = _parse(code, i)
        out.append(code[i:j])
        i = j
    return tuple(out)


def is_valid_code(code: Sequence[int]) -> bool:
    try:
        return len(code) > 0 and _parse(tuple(code), 0) == len(code)
    except (IndexError, TypeError):
        return False


@lru_cache(maxsize=None)
def truncate_code(code: Code, depth: int) -> Code:
    if depth < 0:
        raise BadRadius(f"cannot truncate to depth {depth}")
    if depth == 0:
        return LEAF
    return join(truncate_code(c, depth - 1) for c in children(code))


@lru_cache(maxsize=None)
def height(code: Code) -> int:
    kids = children(code)
    return 1 + max(height(c) for c in kids) if kids else 0


@lru_cache(maxsize=None)
def automorphism_count(code: Code) -> int:
    """Order of the rooted automorphism group of the tree."""
    total = 1
    for c, m in Counter(children(code)).items():
        total *= factorial(m) * automorphism_count(c) ** m
    return total


@lru_cache(maxsize=None)
def max_child_count(code: Code) -> int:
    """Largest number of children of any non-root vertex."""
    best = 0
    for c in children(code):
        best = max(best, c[0], max_child_count(c))
    return best


# --------------------------------------------------------------------------
# working graphs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RootedGraph:
    """Mutable-free working form of a rooted graph (adjacency lists)."""

    adj: tuple[tuple[int, ...], ...]
    root: int = 0

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], root: int = 0) -> "RootedGraph":
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(tuple(tuple(sorted(s)) for s in nbrs), root)

    @property
    def n(self) -> int:
        return len(self.adj)

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, nb in enumerate(self.adj) for v in nb if u < v]

    def distances(self) -> list[int]:
        dist = [-1] * self.n
        dist[self.root] = 0
        queue = deque([self.root])
        while queue:
            u = queue.popleft()
            for v in self.adj[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist


# --------------------------------------------------------------------------
# BallCode
# --------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class BallCode:
    """Canonical code of a rooted ``(radius, d)``-ball.

    Equal codes mean rooted-isomorphic balls.  ``d`` and ``radius`` are part
    of the code, so balls from different parameters never compare equal.
    """

    d: int
    radius: int
    is_tree: bool
    code: Code

    @property
    def token(self) -> str:
        return ".".join(map(str, (self.d, self.radius, int(self.is_tree)) + self.code))

    @classmethod
    def from_token(cls, token: str) -> "BallCode":
        try:
            parts = [int(p) for p in token.strip().split(".")]
        except ValueError as exc:
            raise ParseError(f"bad ball token {token!r}") from exc
        if len(parts) < 4 or parts[2] not in (0, 1) or min(parts) < 0:
            raise ParseError(f"bad ball token {token!r}")
        d, radius, tree, *code = parts
        ball = cls(d, radius, bool(tree), tuple(code))
        if ball.is_tree:
            if not is_valid_code(ball.code):
                raise ParseError(f"bad tree code in token {token!r}")
            try:
                _check_tree(ball.code, d, radius)
            except (DegreeExceeded, RadiusExceeded) as exc:
                raise ParseError(f"token {token!r}: {exc}") from exc
        return ball

    def __str__(self) -> str:
        return self.token

    @property
    def num_vertices(self) -> int:
        return len(self.code) if self.is_tree else self.code[0]

    @property
    def root_degree(self) -> int:
        if self.is_tree:
            return self.code[0]
        g = to_rooted_graph(self)
        return len(g.adj[g.root])

    @property
    def depth(self) -> int:
        """Largest distance from the root actually realised in the ball."""
        if self.is_tree:
            return height(self.code)
        return max(to_rooted_graph(self).distances())


def _check_tree(code: Code, d: int, radius: int) -> None:
    if code[0] > d or max_child_count(code) > d - 1:
        raise DegreeExceeded(f"tree {code} has a vertex of degree > {d}")
    if height(code) > radius:
        raise RadiusExceeded(f"tree {code} reaches beyond radius {radius}")


def tree_ball(code: Sequence[int], d: int, radius: int) -> BallCode:
    code = tuple(code)
    if not is_valid_code(code):
        raise ParseError(f"not a tree code: {code}")
    _check_tree(code, d, radius)
    return BallCode(d, radius, True, code)


def point_ball(d: int, radius: int = 0) -> BallCode:
    return BallCode(d, radius, True, LEAF)


def canonicalize(g: RootedGraph, d: int, radius: int, *, max_core: int | None = None) -> BallCode:
    """Canonical :class:`BallCode` of ``g``.

    Raises DegreeExceeded / RadiusExceeded when ``g`` is not a
    ``(radius, d)``-ball, and BallTooLarge when the cyclic core exceeds
    ``max_core`` vertices.
    """
    for u, nb in enumerate(g.adj):
        if len(nb) > d:
            raise DegreeExceeded(f"vertex {u} has degree {len(nb)} > {d}")
    dist = g.distances()
    if min(dist) < 0 or max(dist) > radius:
        raise RadiusExceeded(f"some vertex lies beyond radius {radius} (or is unreachable)")
    tree, code = _canonical_code(g.adj, g.root, max_core)
    return BallCode(d, radius, tree, code)


def _canonical_code(adj: Sequence[Sequence[int]], root: int, max_core: int | None) -> tuple[bool, Code]:
    n = len(adj)
    deg = [len(a) for a in adj]
    removed = [False] * n
    hanging: list[list[Code]] = [[] for _ in range(n)]
    stack = [v for v in range(n) if deg[v] == 1 and v != root]
    while stack:
        v = stack.pop()
        removed[v] = True
        code = join(hanging[v])
        for u in adj[v]:
            if not removed[u]:
                hanging[u].append(code)
                deg[u] -= 1
                if deg[u] == 1 and u != root:
                    stack.append(u)
    core = [v for v in range(n) if not removed[v]]
    if len(core) == 1:
        return True, join(hanging[root])
    if max_core is not None and len(core) > max_core:
        raise BallTooLarge(f"ball core has {len(core)} vertices (cap {max_core})")
    index = {v: i for i, v in enumerate(core)}
    nbrs = [[index[u] for u in adj[v] if not removed[u]] for v in core]
    decos = [join(hanging[v]) for v in core]
    keys = [(0 if v == root else 1, decos[i]) for i, v in enumerate(core)]
    ranks = {k: i for i, k in enumerate(sorted(set(keys)))}
    colors = [ranks[k] for k in keys]
    cert = _search(colors, nbrs, decos)
    return False, (n,) + cert


def _refine(colors: list[int], nbrs: list[list[int]]) -> list[int]:
    ncolors = len(set(colors))
    while True:
        sigs = [(colors[v], tuple(sorted(colors[u] for u in nbrs[v]))) for v in range(len(colors))]
        ranks = {s: i for i, s in enumerate(sorted(set(sigs)))}
        colors = [ranks[s] for s in sigs]
        if len(ranks) == ncolors:
            return colors
        ncolors = len(ranks)


def _search(colors: list[int], nbrs: list[list[int]], decos: list[Code]) -> Code:
    colors = _refine(colors, nbrs)
    k = len(colors)
    sizes = Counter(colors)
    if len(sizes) == k:
        order = sorted(range(k), key=colors.__getitem__)
        pos = {v: i for i, v in enumerate(order)}
        edges = sorted((min(pos[u], pos[v]), max(pos[u], pos[v])) for u in range(k) for v in nbrs[u] if u < v)
        out = [k]
        for v in order:
            out.extend(decos[v])
        out.append(len(edges))
        for e in edges:
            out.extend(e)
        return tuple(out)
    target = min(c for c, s in sizes.items() if s > 1)
    best: Code | None = None
    for v in range(k):
        if colors[v] != target:
            continue
        branch = [2 * c + 1 for c in colors]
        branch[v] = 2 * colors[v]
        cert = _search(branch, nbrs, decos)
        if best is None or cert < best:
            best = cert
    assert best is not None
    return best


def to_rooted_graph(ball: BallCode) -> RootedGraph:
    """Explicit representative of ``ball`` (root is vertex 0)."""
    edges: list[tuple[int, int]] = []
    count = 0

    def grow(code: Code, parent: int | None) -> None:
        nonlocal count
        me = count
        count += 1
        if parent is not None:
            edges.append((parent, me))
        for c in children(code):
            grow(c, me)

    if ball.is_tree:
        grow(ball.code, None)
        return RootedGraph.from_edges(count, edges)
    code = ball.code
    k = code[1]
    i = 2
    decos = []
    for _ in range(k):
        j = _parse(code, i)
        decos.append(code[i:j])
        i = j
    m = code[i]
    core_edges = [(code[i + 1 + 2 * e], code[i + 2 + 2 * e]) for e in range(m)]
    count = k
    edges.extend(core_edges)
    for v, deco in enumerate(decos):
        for c in children(deco):
            grow(c, v)
    return RootedGraph.from_edges(count, edges)


# --------------------------------------------------------------------------
# enumeration and truncation
# --------------------------------------------------------------------------


def _subtree_count(d: int, budget: int) -> int:
    s = 1
    for _ in range(budget):
        s = sum(comb(s + k - 1, k) for k in range(d))
    return s


@lru_cache(maxsize=None)
def _subtree_codes(d: int, budget: int) -> tuple[Code, ...]:
    """Non-root subtrees of depth <= budget (at most d-1 children each)."""
    if budget == 0:
        return (LEAF,)
    prev = _subtree_codes(d, budget - 1)
    out = {join(combo) for k in range(d) for combo in combinations_with_replacement(prev, k)}
    return tuple(sorted(out))


def count_tree_balls(d: int, r: int) -> int:
    if r == 0:
        return 1
    s = _subtree_count(d, r - 1)
    return sum(comb(s + k - 1, k) for k in range(d + 1))


def enumerate_tree_balls(d: int, r: int, *, cap: int = ENUMERATION_CAP) -> list[BallCode]:
    """All rooted trees of depth <= r and max degree <= d, in canonical order."""
    if d < 1 or r < 0:
        raise ValueError("need d >= 1 and r >= 0")
    total = count_tree_balls(d, r)
    if total > cap:
        raise ExplosionGuard(f"{total} balls at d={d}, r={r} exceeds cap {cap}")
    if r == 0:
        return [point_ball(d, 0)]
    subs = _subtree_codes(d, r - 1)
    codes = {join(combo) for k in range(d + 1) for combo in combinations_with_replacement(subs, k)}
    return [BallCode(d, r, True, c) for c in sorted(codes)]


def truncate(ball: BallCode, radius: int) -> BallCode:
    """Canonical code of the radius-``radius`` sub-ball around the root."""
    if radius < 0 or radius > ball.radius:
        raise BadRadius(f"cannot truncate a radius-{ball.radius} ball to {radius}")
    if ball.is_tree:
        return BallCode(ball.d, radius, True, truncate_code(ball.code, radius))
    g = to_rooted_graph(ball)
    dist = g.distances()
    keep = [v for v in range(g.n) if dist[v] <= radius]
    index = {v: i for i, v in enumerate(keep)}
    sub = RootedGraph.from_edges(
        len(keep), [(index[u], index[v]) for u, v in g.edges() if u in index and v in index], index[g.root]
    )
    return canonicalize(sub, ball.d, radius)


# --------------------------------------------------------------------------
# directed balls and edge-balls
# --------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class VecBall:
    """A tree ball with a distinguished edge leaving the root.

    ``edge`` is the index (in canonical child order) of the first child of the
    distinguished orbit; ``multiplicity`` is the size of that orbit under
    rooted automorphisms.
    """

    ball: BallCode
    edge: int
    multiplicity: int = field(compare=False)

    @property
    def d(self) -> int:
        return self.ball.d

    @property
    def radius(self) -> int:
        return self.ball.radius

    @cached_property
    def head(self) -> Code:
        return children(self.ball.code)[self.edge]

    @cached_property
    def root_side(self) -> Code:
        kids = list(children(self.ball.code))
        del kids[self.edge]
        return join(kids)

    @property
    def num_vertices(self) -> int:
        return self.ball.num_vertices

    @property
    def token(self) -> str:
        return f"{self.ball.token}@{self.edge}"

    def __str__(self) -> str:
        return self.token


def vecball(d: int, radius: int, root_side: Code, head: Code) -> VecBall:
    """Assemble the directed ball with the given root side and head subtree."""
    code = join(children(root_side) + (head,))
    kids = children(code)
    return VecBall(BallCode(d, radius, True, code), kids.index(head), kids.count(head))


def orientations(ball: BallCode) -> list[VecBall]:
    """One directed ball per automorphism orbit of root edges.

    A root of degree 0 has no orientations (empty list).
    """
    if not ball.is_tree:
        raise ValueError("orientations are only defined for tree balls")
    if ball.radius < 1:
        return []
    kids = children(ball.code)
    seen: dict[Code, int] = {}
    for i, c in enumerate(kids):
        seen.setdefault(c, i)
    counts = Counter(kids)
    return [VecBall(ball, i, counts[c]) for c, i in seen.items()]


def directed_automorphism_count(vb: VecBall) -> int:
    """Automorphisms of the ball fixing the root and the distinguished edge."""
    return automorphism_count(vb.root_side) * automorphism_count(vb.head)


@dataclass(frozen=True, order=True)
class EdgeBall:
    """Radius-``radius`` edge-ball around an oriented edge ``(x, x')`` of a tree.

    ``root_side`` is the tree hanging at ``x`` away from ``x'`` (depth <=
    radius); ``head_side`` is the tree hanging at ``x'`` away from ``x``.
    """

    d: int
    radius: int
    root_side: Code
    head_side: Code

    @property
    def token(self) -> str:
        a = ".".join(map(str, self.root_side))
        b = ".".join(map(str, self.head_side))
        return f"{self.d}.{self.radius}:{a}>{b}"

    def __str__(self) -> str:
        return self.token

    @property
    def num_vertices(self) -> int:
        return len(self.root_side) + len(self.head_side)


def edge_ball_within(vb: VecBall) -> EdgeBall:
    """Radius ``r`` edge-ball of the distinguished edge of a radius ``r+1`` ball."""
    r = vb.radius - 1
    if r < 0:
        raise BadRadius("directed balls have radius >= 1")
    return EdgeBall(vb.d, r, truncate_code(vb.root_side, r), vb.head)


def involute(eb: EdgeBall) -> EdgeBall:
    return EdgeBall(eb.d, eb.radius, eb.head_side, eb.root_side)


def s_view(eb: EdgeBall) -> VecBall:
    """The radius-r directed ball seen from the root of the edge-ball."""
    if eb.radius < 1:
        raise BadRadius("views of radius-0 edge-balls are not directed balls")
    return vecball(eb.d, eb.radius, eb.root_side, truncate_code(eb.head_side, eb.radius - 1))


def t_view(eb: EdgeBall) -> VecBall:
    """The radius-r directed ball seen from the head, pointing back."""
    return s_view(involute(eb))


def truncate_vec(vb: VecBall, radius: int) -> VecBall:
    if radius < 1 or radius > vb.radius:
        raise BadRadius(f"cannot truncate a radius-{vb.radius} directed ball to {radius}")
    return vecball(vb.d, radius, truncate_code(vb.root_side, radius), truncate_code(vb.head, radius - 1))


def extract_ball(adj: Sequence[Sequence[int]], v: int, radius: int) -> RootedGraph:
    """Induced subgraph on the vertices within ``radius`` of ``v`` (root 0)."""
    index = {v: 0}
    order = [v]
    frontier = [v]
    for _ in range(radius):
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if w not in index:
                    index[w] = len(order)
                    order.append(w)
                    nxt.append(w)
        frontier = nxt
    return RootedGraph(tuple(tuple(index[w] for w in adj[u] if w in index) for u in order), 0)
