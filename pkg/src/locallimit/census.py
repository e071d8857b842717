"""Empirical ball statistics of finite graphs.

``ball_census`` counts, for every vertex, the isomorphism class of the
induced subgraph on the vertices within distance ``r``; frequencies are exact
rationals so distances to rational tables are exact as well.
"""

from __future__ import annotations

import os
from collections import Counter, deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

from .balls import BallCode, canonicalize, extract_ball, truncate
from .exceptions import ParameterMismatch
from .measures import MarginalTable

#: largest cyclic core canonicalized by default
DEFAULT_MAX_CORE = 32
WORKERS_ENV = "LOCALLIMIT_WORKERS"

Adjacency = Sequence[Sequence[int]]


def as_adjacency(graph: Any) -> list[list[int]]:
    """Adjacency lists from a SyntheticGraph, a networkx graph or lists."""
    if hasattr(graph, "adjacency") and hasattr(graph, "edges") and hasattr(graph, "n"):
        return graph.adjacency()
    if hasattr(graph, "nodes") and hasattr(graph, "neighbors"):
        nodes = sorted(graph.nodes())
        index = {v: i for i, v in enumerate(nodes)}
        return [sorted(index[u] for u in graph.neighbors(v) if u != v) for v in nodes]
    return [list(nb) for nb in graph]


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


@dataclass
class CensusReport:
    radius: int
    d: int
    counts: dict[BallCode, int]
    total: int
    tree_ball_fraction: Fraction
    girth: float | int | None = None
    tv_distance: Fraction | None = None
    max_deviation: Fraction | None = None

    def frequencies(self) -> dict[BallCode, Fraction]:
        return {b: Fraction(c, self.total) for b, c in self.counts.items()}

    def project(self, radius: int) -> "CensusReport":
        """Census at a smaller radius, obtained by truncating every ball."""
        counts: Counter[BallCode] = Counter()
        for b, c in self.counts.items():
            counts[truncate(b, radius)] += c
        trees = sum(c for b, c in counts.items() if b.is_tree)
        return CensusReport(radius, self.d, dict(sorted(counts.items())), self.total,
                            Fraction(trees, self.total) if self.total else Fraction(1), self.girth)

    def to_text(self) -> str:
        lines = [
            f"radius\t{self.radius}",
            f"d\t{self.d}",
            f"vertices\t{self.total}",
            f"classes\t{len(self.counts)}",
            f"tree_ball_fraction\t{self.tree_ball_fraction}",
            f"girth\t{_girth_text(self.girth)}",
        ]
        if self.tv_distance is not None:
            lines += [f"tv_distance\t{self.tv_distance}", f"tv_distance_float\t{float(self.tv_distance):.6g}",
                      f"max_deviation\t{self.max_deviation}"]
        lines += [f"ball\t{b.token}\t{c}" for b, c in sorted(self.counts.items())]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "radius": self.radius,
            "d": self.d,
            "vertices": self.total,
            "tree_ball_fraction": str(self.tree_ball_fraction),
            "girth": _girth_text(self.girth),
            "counts": {b.token: c for b, c in sorted(self.counts.items())},
        }
        if self.tv_distance is not None:
            out["tv_distance"] = str(self.tv_distance)
            out["tv_distance_float"] = float(self.tv_distance)
            out["max_deviation"] = str(self.max_deviation)
        return out


def _girth_text(g) -> str:
    return "none" if g is None else ("inf" if g == float("inf") else str(g))


# per-process state for the parallel census
_ADJ: list[list[int]] | None = None


def _init_worker(adj: list[list[int]]) -> None:
    global _ADJ
    _ADJ = adj


def _count_range(args: tuple[int, int, int, int, int | None]) -> list[tuple[BallCode, int]]:
    lo, hi, d, r, max_core = args
    assert _ADJ is not None
    return sorted(_count(_ADJ, range(lo, hi), d, r, max_core).items())


def _count(adj: Adjacency, vertices, d: int, r: int, max_core: int | None) -> Counter:
    counts: Counter[BallCode] = Counter()
    for v in vertices:
        counts[canonicalize(extract_ball(adj, v, r), d, r, max_core=max_core)] += 1
    return counts


def ball_census(
    graph: Any,
    r: int,
    d: int | None = None,
    *,
    table: MarginalTable | None = None,
    workers: int | None = 1,
    max_core: int | None = DEFAULT_MAX_CORE,
    with_girth: bool = True,
    chunk: int = 4096,
) -> CensusReport:
    """Exact radius-``r`` ball census of ``graph``.

    ``d`` defaults to the table's degree bound, then to the ``d`` recorded in
    the graph's provenance, then to the maximum degree.  ``workers=None``
    means :func:`default_workers`.
    """
    adj = as_adjacency(graph)
    maxdeg = max((len(a) for a in adj), default=0)
    if d is None:
        if table is not None:
            d = table.d
        elif getattr(graph, "provenance", {}).get("d"):
            d = int(graph.provenance["d"])
        else:
            d = max(maxdeg, 1)
    if table is not None and table.d != d:
        raise ParameterMismatch(f"census d = {d} but table d = {table.d}")
    if r < 0:
        raise ValueError("r must be nonnegative")
    n = len(adj)
    workers = default_workers() if workers is None else max(1, workers)

    counts: Counter[BallCode] = Counter()
    if workers == 1 or n <= chunk:
        counts = _count(adj, range(n), d, r, max_core)
    else:
        tasks = [(lo, min(n, lo + chunk), d, r, max_core) for lo in range(0, n, chunk)]
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(adj,)) as pool:
            for part in pool.map(_count_range, tasks):
                for b, c in part:
                    counts[b] += c

    trees = sum(c for b, c in counts.items() if b.is_tree)
    report = CensusReport(
        radius=r,
        d=d,
        counts=dict(sorted(counts.items())),
        total=n,
        tree_ball_fraction=Fraction(trees, n) if n else Fraction(1),
        girth=girth(adj) if with_girth else None,
    )
    if table is not None:
        report.tv_distance, report.max_deviation = distances(report, table, r)
    return report


def distances(report: CensusReport, table: MarginalTable, r: int | None = None) -> tuple[Fraction, Fraction]:
    """Exact (total variation, largest per-ball deviation) against ``table``."""
    r = report.radius if r is None else r
    if r != report.radius:
        if r > report.radius:
            raise ParameterMismatch(f"census radius {report.radius} cannot be compared at radius {r}")
        report = report.project(r)
    if table.d != report.d:
        raise ParameterMismatch(f"census d = {report.d} but table d = {table.d}")
    if r > table.depth:
        raise ParameterMismatch(f"table depth {table.depth} below radius {r}")
    if report.total == 0:
        raise ParameterMismatch("empty graph has no ball distribution")
    level = table.levels[r]
    freq = report.frequencies()
    diffs = [abs(freq.get(b, Fraction(0)) - level.get(b, Fraction(0))) for b in set(freq) | set(level)]
    return sum(diffs, Fraction(0)) / 2, max(diffs, default=Fraction(0))


def tv_distance(report: CensusReport, table: MarginalTable, r: int | None = None) -> Fraction:
    return distances(report, table, r)[0]


def tv_between(a: CensusReport, b: CensusReport) -> Fraction:
    """Total variation between two censuses of the same radius."""
    if a.radius != b.radius or a.d != b.d:
        raise ParameterMismatch("censuses differ in radius or d")
    fa, fb = a.frequencies(), b.frequencies()
    return sum((abs(fa.get(k, Fraction(0)) - fb.get(k, Fraction(0))) for k in set(fa) | set(fb)), Fraction(0)) / 2


def girth(graph: Any) -> float | int:
    """Length of a shortest cycle; ``math.inf`` for forests."""
    adj = as_adjacency(graph)
    n = len(adj)
    deg = [len(a) for a in adj]
    alive = [True] * n
    stack = [v for v in range(n) if deg[v] <= 1]
    for v in stack:
        alive[v] = False
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if alive[u]:
                deg[u] -= 1
                if deg[u] <= 1:
                    alive[u] = False
                    stack.append(u)
    core = [v for v in range(n) if alive[v]]
    if not core:
        return float("inf")

    best = float("inf")
    seen = [False] * n
    heavy: list[int] = []
    for s in core:
        if seen[s]:
            continue
        comp, q = [], [s]
        seen[s] = True
        while q:
            v = q.pop()
            comp.append(v)
            for u in adj[v]:
                if alive[u] and not seen[u]:
                    seen[u] = True
                    q.append(u)
        if all(deg[v] == 2 for v in comp):
            best = min(best, len(comp))
        else:
            heavy.extend(comp)

    dist = [-1] * n
    parent = [-1] * n
    for s in heavy:
        # a cycle through s found at depth k has length <= 2k+1
        touched = [s]
        dist[s] = 0
        q = deque([s])
        while q:
            v = q.popleft()
            if 2 * dist[v] + 1 >= best:
                break
            for u in adj[v]:
                if not alive[u] or u == parent[v]:
                    continue
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    parent[u] = v
                    touched.append(u)
                    q.append(u)
                else:
                    best = min(best, dist[u] + dist[v] + 1)
        for v in touched:
            dist[v] = -1
            parent[v] = -1
        if best == 3:
            break
    return best


def certified_radius(report: CensusReport, table: MarginalTable, epsilon: Fraction | str) -> int:
    """Largest ``j <= report.radius`` with TV at every radius ``<= j`` within ``epsilon`` (-1 if none)."""
    eps = Fraction(epsilon)
    best = -1
    for j in range(min(report.radius, table.depth) + 1):
        if tv_distance(report, table, j) > eps:
            break
        best = j
    return best
