"""Independent reference implementations used only by the tests.

Nothing here imports the package's canonical forms; every oracle works on
plain adjacency lists by brute force.
"""

from __future__ import annotations

from collections import Counter, deque
from fractions import Fraction
from itertools import product
from math import lcm

import numpy as np


def bfs_dist(adj, root):
    dist = {root: 0}
    q = deque([root])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


def rooted_isomorphic(adj1, r1, adj2, r2) -> bool:
    """Backtracking search for a root-preserving graph isomorphism."""
    n = len(adj1)
    if n != len(adj2):
        return False
    e1 = sum(map(len, adj1))
    if e1 != sum(map(len, adj2)):
        return False
    d1, d2 = bfs_dist(adj1, r1), bfs_dist(adj2, r2)
    inv1 = [(d1.get(v, -1), len(adj1[v])) for v in range(n)]
    inv2 = [(d2.get(v, -1), len(adj2[v])) for v in range(n)]
    if sorted(inv1) != sorted(inv2):
        return False
    order = sorted(range(n), key=lambda v: (d1.get(v, n), v))
    sets2 = [set(a) for a in adj2]
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def extend(i: int) -> bool:
        if i == n:
            return True
        v = order[i]
        cands = [r2] if v == r1 else [w for w in range(n) if w not in used and inv2[w] == inv1[v]]
        for w in cands:
            if w in used:
                continue
            if all((mapping[u] in sets2[w]) == (u in adj1[v]) for u in mapping):
                mapping[v] = w
                used.add(w)
                if extend(i + 1):
                    return True
                del mapping[v]
                used.discard(w)
        return False

    return extend(0)


def rooted_automorphisms(adj, root) -> list[dict[int, int]]:
    """All root-preserving automorphisms of a small graph."""
    n = len(adj)
    dist = bfs_dist(adj, root)
    inv = [(dist.get(v, -1), len(adj[v])) for v in range(n)]
    order = sorted(range(n), key=lambda v: (dist.get(v, n), v))
    sets = [set(a) for a in adj]
    out: list[dict[int, int]] = []
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def extend(i: int) -> None:
        if i == n:
            out.append(dict(mapping))
            return
        v = order[i]
        for w in range(n):
            if w in used or inv[w] != inv[v]:
                continue
            if all((mapping[u] in sets[w]) == (u in sets[v]) for u in mapping):
                mapping[v] = w
                used.add(w)
                extend(i + 1)
                del mapping[v]
                used.discard(w)

    extend(0)
    return out


def root_edge_orbits(adj, root) -> list[int]:
    """Sizes of the orbits of root edges under rooted automorphisms."""
    autos = rooted_automorphisms(adj, root)
    seen: set[int] = set()
    sizes = []
    for v in adj[root]:
        if v in seen:
            continue
        orbit = {a[v] for a in autos}
        seen |= orbit
        sizes.append(len(orbit))
    return sorted(sizes)


def relabel(adj, root, rng: np.random.Generator):
    n = len(adj)
    perm = rng.permutation(n).tolist()
    new = [[] for _ in range(n)]
    for v in range(n):
        new[perm[v]] = [perm[u] for u in adj[v]]
    return new, perm[root]


def nx_to_adj(g):
    nodes = sorted(g.nodes())
    index = {v: i for i, v in enumerate(nodes)}
    return [sorted(index[u] for u in g.neighbors(v)) for v in nodes]


def sample_ugw_depth2(law: dict[int, Fraction], samples: int, seed: int) -> Counter:
    """Monte-Carlo radius-2 balls of a unimodular GW tree.

    Key: sorted tuple of the children counts of the root's neighbours.
    """
    rng = np.random.default_rng(seed)
    degs = np.array(sorted(law))
    probs = np.array([float(law[k]) for k in degs])
    mean = float(sum(k * p for k, p in law.items()))
    biased = np.array([k * float(law[k]) / mean for k in degs])
    root = rng.choice(degs, size=samples, p=probs)
    dmax = int(degs.max())
    kids = rng.choice(degs, size=(samples, dmax), p=biased) - 1
    kids = np.where(np.arange(dmax)[None, :] < root[:, None], kids, -1)
    kids.sort(axis=1)
    rows, counts = np.unique(kids, axis=0, return_counts=True)
    out: Counter = Counter()
    for row, c in zip(rows.tolist(), counts.tolist()):
        out[tuple(x for x in row if x >= 0)] += c
    return out


def perfect_matchings(elems: list[int]) -> list[frozenset]:
    """All perfect matchings of an even-size list (as sets of pairs)."""
    if not elems:
        return [frozenset()]
    first, rest = elems[0], elems[1:]
    out = []
    for i, other in enumerate(rest):
        for m in perfect_matchings(rest[:i] + rest[i + 1:]):
            out.append(m | {frozenset((first, other))})
    return out


def minimal_even_N(cell_ratios, edge_weights, loop_weights, extra=(), limit: int = 10**4) -> int | None:
    """Brute-force scan for the least even N making every cell size integral
    and every loop sub-cell size even."""
    for N in range(2, limit + 1, 2):
        if all((N * x).denominator == 1 for x in list(cell_ratios) + list(edge_weights) + list(extra)) and all(
            (N * x).denominator == 1 and (N * x).numerator % 2 == 0 for x in loop_weights
        ):
            return N
    return None


def brute_girth(adj) -> float:
    """Shortest cycle by BFS from every vertex without pruning."""
    best = float("inf")
    for s in range(len(adj)):
        dist = {s: 0}
        parent = {s: -1}
        q = deque([s])
        while q:
            v = q.popleft()
            for u in adj[v]:
                if u not in dist:
                    dist[u] = dist[v] + 1
                    parent[u] = v
                    q.append(u)
                elif parent[v] != u:
                    best = min(best, dist[u] + dist[v] + 1)
    return best


def lcm_denominators(values) -> int:
    return lcm(*(Fraction(v).denominator for v in values)) if values else 1


def all_labelings(n_vertices: int, n: int):
    return product(range(n), repeat=n_vertices)
