"""Finite graphs whose ball statistics follow a marginal table.

Pipeline: build the H-graph, rationalize its weights, pick the scale ``N``,
then

1. give each H-vertex ``A`` a cell of ``N * w(A)`` elements, split into
   sub-cells by target ``B`` of sizes ``N * w(A, B)``;
2. match sub-cell ``(A, B)`` with ``(B, A)`` by a seeded random bijection
   (a fixed-point-free involution when ``A == B``);
3. group the elements of the cells of every orientation of a ball ``M``
   into super-cells holding ``l_A`` elements of each ``Q(A)``; super-cells
   are the vertices, matched elements become edges.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from os import PathLike
from typing import Hashable, Iterable

import numpy as np

from .exceptions import (
    DegreeExceeded,
    MaxNExceeded,
    OddLoopCell,
    ParameterMismatch,
    ParseError,
    PartitionInfeasible,
)
from .labeling import LabelBudget, choose_n
from .measures import MarginalTable
from .rationalizer import HGraph, WeightSystem, build_H, build_labeled_H, choose_N, rationalize

DEFAULT_SEED = 20240229
DEFAULT_MAX_N = 10**6
MODES = ("quotient", "faithful")


# --------------------------------------------------------------------------
# graphs and the edge-list format
# --------------------------------------------------------------------------


@dataclass
class SyntheticGraph:
    """Simple graph on ``0..n-1`` with sorted edges ``u < v`` and provenance."""

    n: int
    edges: np.ndarray  # shape (m, 2), int64, lexicographically sorted
    provenance: dict[str, str] = field(default_factory=dict)
    intended: np.ndarray | None = None  # index into ``ball_types`` per vertex
    ball_types: list[Hashable] = field(default_factory=list)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], **kw) -> "SyntheticGraph":
        arr = np.array(sorted({(min(u, v), max(u, v)) for u, v in edges}), dtype=np.int64).reshape(-1, 2)
        if len(arr) and (arr[:, 0] == arr[:, 1]).any():
            raise ValueError("self-loops are not allowed")
        if len(arr) and (arr.min() < 0 or arr.max() >= n):
            raise ValueError("edge endpoint outside 0..n-1")
        return cls(n, arr, **kw)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n)

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges.tolist():
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def to_text(self) -> str:
        head = [f"# {k} {v}" for k, v in self.provenance.items()]
        head.append(f"# vertices {self.n}")
        body = [f"{u} {v}" for u, v in self.edges.tolist()]
        return "\n".join(head + body) + "\n"


def parse_edge_list(text: str) -> SyntheticGraph:
    prov: dict[str, str] = {}
    pairs: list[tuple[int, int]] = []
    n = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(" ")
            if key == "vertices":
                try:
                    n = int(value)
                except ValueError:
                    raise ParseError(f"line {lineno}: bad vertex count {value!r}") from None
            elif key:
                prov[key] = value.strip()
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected 'u v', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer vertex in {raw!r}") from None
        if u < 0 or v < 0 or u == v:
            raise ParseError(f"line {lineno}: invalid edge {raw!r}")
        pairs.append((u, v))
    top = max((max(p) for p in pairs), default=-1) + 1
    if n is None:
        n = top
    elif n < top:
        raise ParseError(f"vertex count {n} smaller than largest id {top - 1}")
    return SyntheticGraph.from_edges(n, pairs, provenance=prov)


def read_edge_list(path: str | PathLike) -> SyntheticGraph:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_edge_list(fh.read())
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not a text edge list") from exc
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def write_edge_list(graph: SyntheticGraph, path: str | PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(graph.to_text())


# --------------------------------------------------------------------------
# step 1: cells
# --------------------------------------------------------------------------


@dataclass
class CellStructure:
    """Contiguous element ranges: cell ``A`` and its sub-cells ``(A, B)``."""

    H: HGraph
    ws: WeightSystem
    N: int
    cell_start: list[int]
    cell_size: list[int]
    sub: dict[tuple[int, int], tuple[int, int]]  # (A, B) -> (start, size)
    isolated: dict[Hashable, int]

    @property
    def num_elements(self) -> int:
        return sum(self.cell_size)


def _integral(x: Fraction, what: str) -> int:
    if x.denominator != 1:
        raise PartitionInfeasible(f"{what} = {x} is not an integer")
    return x.numerator


def step1_cells(H: HGraph, ws: WeightSystem, N: int) -> CellStructure:
    starts, sizes = [], []
    sub: dict[tuple[int, int], tuple[int, int]] = {}
    out_edges: dict[int, list[int]] = {}
    for (a, b) in ws.w_edge:
        out_edges.setdefault(a, []).append(b)
    pos = 0
    for a in range(H.num_vertices):
        size = _integral(N * ws.w[a], f"cell size of vertex {a}")
        starts.append(pos)
        sizes.append(size)
        cursor = pos
        for b in sorted(out_edges.get(a, ())):
            k = _integral(N * ws.w_edge[a, b], f"sub-cell size ({a}, {b})")
            sub[a, b] = (cursor, k)
            cursor += k
        assert cursor == pos + size, "sub-cells must partition their cell"
        pos += size
    isolated = {b: _integral(N * m, f"isolated count of {b}") for b, m in ws.w_isolated.items()}
    return CellStructure(H, ws, N, starts, sizes, sub, isolated)


def super_cells(cells: CellStructure) -> tuple[np.ndarray, list[Hashable], list[int]]:
    """Owner (G-vertex id) of every element, plus per-vertex ball types.

    Returns ``(owner, types, vertex_type)`` where ``types`` lists the distinct
    balls in H order and ``vertex_type[v]`` indexes it.
    """
    H, ws, N = cells.H, cells.ws, cells.N
    owner = np.full(cells.num_elements, -1, dtype=np.int64)
    types: list[Hashable] = []
    vertex_type: list[int] = []
    next_id = 0
    for ball, members in H.ball_groups().items():
        counts = {_integral(N * ws.w[a] / H.multiplicity[a], "super-cell count") for a in members}
        if len(counts) != 1:
            raise PartitionInfeasible(f"orientations of {ball} disagree on super-cell count {sorted(counts)}")
        s = counts.pop()
        if s == 0:
            continue
        t = len(types)
        types.append(ball)
        ids = np.arange(next_id, next_id + s, dtype=np.int64)
        for a in members:
            l = H.multiplicity[a]
            start = cells.cell_start[a]
            owner[start : start + s * l] = np.repeat(ids, l)
        vertex_type.extend([t] * s)
        next_id += s
    if (owner < 0).any():
        raise PartitionInfeasible("some elements were not assigned to a super-cell")
    return owner, types, vertex_type


# --------------------------------------------------------------------------
# step 2: matchings
# --------------------------------------------------------------------------


@dataclass
class MatchedStructure:
    cells: CellStructure
    owner: np.ndarray
    blocks: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]]  # a <= b -> (left, right)
    seed: int
    switches: int = 0
    unresolved: int = 0


def _edge_key(u: int, v: int, n: int) -> int:
    return min(u, v) * n + max(u, v)


def step2_match(
    cells: CellStructure,
    seed: int,
    *,
    owner: np.ndarray | None = None,
    avoid_collapse: bool = True,
    max_attempts: int = 200,
) -> MatchedStructure:
    """Seeded random bijections between paired sub-cells.

    With ``avoid_collapse`` a matched pair that would yield a self-loop or a
    repeated edge in G is switched with a random pair of the same block;
    pairs that cannot be fixed in ``max_attempts`` tries are left and counted.
    """
    rng = np.random.default_rng(seed)
    if owner is None:
        owner = super_cells(cells)[0]
    blocks: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
    for (a, b), (start, k) in sorted(cells.sub.items()):
        if a > b:
            continue
        elems = np.arange(start, start + k, dtype=np.int64)
        if a == b:
            if k % 2:
                raise OddLoopCell(f"loop sub-cell of vertex {a} has odd size {k}")
            perm = rng.permutation(elems)
            blocks[a, b] = (perm[0::2].copy(), perm[1::2].copy())
        else:
            o_start, o_k = cells.sub[b, a]
            assert o_k == k, "paired sub-cells must have equal size"
            other = np.arange(o_start, o_start + k, dtype=np.int64)
            blocks[a, b] = (elems, rng.permutation(other))
    matched = MatchedStructure(cells, owner, blocks, seed)
    if avoid_collapse:
        _repair(matched, rng, max_attempts)
    return matched


def _repair(ms: MatchedStructure, rng: np.random.Generator, max_attempts: int) -> None:
    owner = ms.owner
    n = int(owner.max()) + 1 if len(owner) else 0
    mult: Counter[int] = Counter()
    for left, right in ms.blocks.values():
        ou, ov = owner[left], owner[right]
        lo, hi = np.minimum(ou, ov), np.maximum(ou, ov)
        mult.update((lo * n + hi).tolist())

    def bad(u: int, v: int) -> bool:
        return u == v or mult[_edge_key(u, v, n)] > 1

    for key in sorted(ms.blocks):
        left, right = ms.blocks[key]
        loop = key[0] == key[1]
        size = len(left)
        for i in range(size):
            u, v = int(owner[left[i]]), int(owner[right[i]])
            if not bad(u, v):
                continue
            fixed = False
            for _ in range(max_attempts):
                j = int(rng.integers(size))
                if j == i:
                    continue
                x, y = int(owner[left[j]]), int(owner[right[j]])
                # swap partners: (u, v), (x, y) -> (u, y), (x, v)
                if loop and rng.integers(2):
                    left[j], right[j] = right[j], left[j]
                    x, y = y, x
                new1, new2 = (u, y), (x, v)
                if new1[0] == new1[1] or new2[0] == new2[1]:
                    continue
                k_old1, k_old2 = _edge_key(u, v, n), _edge_key(x, y, n)
                k1, k2 = _edge_key(*new1, n), _edge_key(*new2, n)
                mult[k_old1] -= 1
                mult[k_old2] -= 1
                if k1 == k2 or mult[k1] > 0 or mult[k2] > 0:
                    mult[k_old1] += 1
                    mult[k_old2] += 1
                    continue
                mult[k1] += 1
                mult[k2] += 1
                right[i], right[j] = right[j], right[i]
                ms.switches += 1
                fixed = True
                break
            if not fixed:
                ms.unresolved += 1


# --------------------------------------------------------------------------
# step 3: quotient
# --------------------------------------------------------------------------


@dataclass
class QuotientStats:
    self_loops: int
    collapsed: int


def step3_quotient(ms: MatchedStructure, types: list[Hashable], vertex_type: list[int]) -> tuple[SyntheticGraph, QuotientStats]:
    owner = ms.owner
    cells = ms.cells
    n_core = len(vertex_type)
    parts = []
    for left, right in ms.blocks.values():
        parts.append(np.stack([owner[left], owner[right]], axis=1))
    raw = np.concatenate(parts) if parts else np.zeros((0, 2), dtype=np.int64)
    raw.sort(axis=1)
    loops = raw[:, 0] == raw[:, 1]
    kept = raw[~loops]
    uniq = np.unique(kept, axis=0) if len(kept) else kept.reshape(0, 2)
    stats = QuotientStats(int(loops.sum()), int(len(kept) - len(uniq)))

    iso_types = []
    for ball, count in cells.isolated.items():
        if count:
            if ball not in types:
                types.append(ball)
            iso_types.extend([types.index(ball)] * count)
    intended = np.array(vertex_type + iso_types, dtype=np.int64)
    g = SyntheticGraph(n_core + len(iso_types), uniq.astype(np.int64), intended=intended, ball_types=types)
    return g, stats


# --------------------------------------------------------------------------
# end to end
# --------------------------------------------------------------------------


@dataclass
class SynthesisPlan:
    """Everything that does not depend on the seed."""

    table: MarginalTable
    r: int
    epsilon: Fraction
    mode: str
    budget: LabelBudget
    H: HGraph
    ws: WeightSystem
    delta_bound: Fraction
    N_exact: int
    N_base: int
    scale: int
    scale_capped: bool
    max_N: int

    @property
    def N(self) -> int:
        return self.N_base * self.scale

    def predicted_vertices(self) -> int:
        return sum(
            _integral(self.N * self.ws.w[g[0]] / self.H.multiplicity[g[0]], "super-cell count")
            for g in self.H.ball_groups().values()
        ) + sum(int(self.N * m) for m in self.ws.w_isolated.values())


@dataclass
class SynthesisReport:
    d: int
    r: int
    epsilon: Fraction
    mode: str
    seed: int
    table_digest: str
    label_budget: int
    label_slack: Fraction
    h_vertices: int
    h_edges: int
    ball_classes: int
    delta: Fraction
    delta_bound: Fraction
    max_denominator: int
    N_exact: int
    N_base: int
    scale: int
    scale_capped: bool
    N: int
    elements: int
    vertices: int
    edges: int
    switches: int
    unresolved: int
    self_loops: int
    collapsed: int
    degree_deficit: int

    def to_text(self) -> str:
        return "".join(f"{k}\t{v}\n" for k, v in self.__dict__.items())

    def to_dict(self) -> dict:
        return {k: (str(v) if isinstance(v, Fraction) else v) for k, v in self.__dict__.items()}


def _power_of_two_at_least(x: Fraction) -> int:
    return 1 << max(0, math.ceil(math.log2(x)) if x > 1 else 0)


def plan_synthesis(
    table: MarginalTable,
    r: int,
    epsilon: Fraction | float | str,
    mode: str = "quotient",
    *,
    n_labels: int | None = None,
    min_vertices: int | None = None,
    max_N: int = DEFAULT_MAX_N,
    max_denominator: int | None = None,
) -> SynthesisPlan:
    eps = Fraction(epsilon).limit_denominator(10**9) if isinstance(epsilon, float) else Fraction(epsilon)
    if not 0 < eps < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if r < 0:
        raise ValueError("r must be nonnegative")
    if table.depth < r + 2:
        raise ParameterMismatch(f"synthesis at radius {r} needs table depth >= {r + 2}, got {table.depth}")
    budget = choose_n(table, r + 1, eps / 10)
    if mode == "faithful":
        n = n_labels or budget.n
        H = build_labeled_H(table, r, n)
    else:
        H = build_H(table, r)
    # ball classes seen by a radius-r census
    classes = max(1, len(table.support(r)))
    delta_bound = eps / (10 * table.d * classes)

    exact = rationalize(H, max_denominator)
    N_exact = choose_N(exact)
    ws = exact
    if N_exact > max_N and max_denominator is None:
        D = _power_of_two_at_least(1 / delta_bound)
        ws = rationalize(H, D, rounding="grid", delta_bound=delta_bound)
    N_base = choose_N(ws)
    if N_base > max_N:
        raise MaxNExceeded(f"scale N = {N_base} exceeds max_N = {max_N}", required=N_base)

    scale, capped = 1, False
    if mode == "quotient":
        target = min_vertices if min_vertices is not None else (n_labels or budget.n)
        per_unit = sum(ws.w[g[0]] / H.multiplicity[g[0]] for g in H.ball_groups().values()) + sum(ws.w_isolated.values())
        unit_vertices = N_base * per_unit
        if unit_vertices > 0 and unit_vertices < target:
            scale = math.ceil(target / unit_vertices)
            if N_base * scale > max_N:
                scale, capped = max(1, max_N // N_base), True
    return SynthesisPlan(table, r, eps, mode, budget, H, ws, delta_bound, N_exact, N_base, scale, capped, max_N)


def realize(plan: SynthesisPlan, seed: int = DEFAULT_SEED, *, avoid_collapse: bool = True) -> tuple[SyntheticGraph, SynthesisReport]:
    H, ws, N = plan.H, plan.ws, plan.N
    cells = step1_cells(H, ws, N)
    owner, types, vertex_type = super_cells(cells)
    ms = step2_match(cells, seed, owner=owner, avoid_collapse=avoid_collapse)
    graph, stats = step3_quotient(ms, types, vertex_type)

    degrees = graph.degrees()
    if len(degrees) and degrees.max() > plan.table.d:
        raise DegreeExceeded(f"synthesized degree {degrees.max()} exceeds d = {plan.table.d}")
    intended_deg = np.array([_root_degree(b) for b in graph.ball_types], dtype=np.int64)
    deficit = int((intended_deg[graph.intended] - degrees).sum()) if graph.n else 0

    graph.provenance = {
        "d": str(plan.table.d),
        "r": str(plan.r),
        "epsilon": str(plan.epsilon),
        "mode": plan.mode if plan.mode == "quotient" else f"faithful n={H.labels}",
        "N": str(N),
        "delta": str(ws.delta),
        "seed": str(seed),
        "table": plan.table.digest,
    }
    report = SynthesisReport(
        d=plan.table.d,
        r=plan.r,
        epsilon=plan.epsilon,
        mode=plan.mode,
        seed=seed,
        table_digest=plan.table.digest,
        label_budget=H.labels or plan.budget.n,
        label_slack=plan.budget.slack,
        h_vertices=H.num_vertices,
        h_edges=len(H.edges),
        ball_classes=len(types),
        delta=ws.delta,
        delta_bound=plan.delta_bound,
        max_denominator=ws.max_denominator,
        N_exact=plan.N_exact,
        N_base=plan.N_base,
        scale=plan.scale,
        scale_capped=plan.scale_capped,
        N=N,
        elements=cells.num_elements,
        vertices=graph.n,
        edges=graph.num_edges,
        switches=ms.switches,
        unresolved=ms.unresolved,
        self_loops=stats.self_loops,
        collapsed=stats.collapsed,
        degree_deficit=deficit,
    )
    return graph, report


def _root_degree(ball: Hashable) -> int:
    if hasattr(ball, "root_degree"):
        return ball.root_degree
    return len(ball[1])  # labeled tree (label, children)


def synthesize(
    table: MarginalTable,
    r: int,
    epsilon: Fraction | float | str,
    mode: str = "quotient",
    seed: int = DEFAULT_SEED,
    **kw,
) -> tuple[SyntheticGraph, SynthesisReport]:
    """Plan and realize in one call; keyword arguments go to :func:`plan_synthesis`."""
    avoid = kw.pop("avoid_collapse", True)
    return realize(plan_synthesis(table, r, epsilon, mode, **kw), seed, avoid_collapse=avoid)


def synthesize_sequence(
    table: MarginalTable,
    K: int,
    seed: int = DEFAULT_SEED,
    **kw,
) -> Iterable[tuple[int, Fraction, SyntheticGraph, SynthesisReport]]:
    """Graphs ``G_k`` for ``k = 1..K`` at radius ``k`` and tolerance ``2**-k``."""
    if K < 1:
        raise ValueError("K must be at least 1")
    if table.depth < K + 2:
        raise ParameterMismatch(f"a sequence of length {K} needs table depth >= {K + 2}, got {table.depth}")
    for k in range(1, K + 1):
        eps = Fraction(1, 2**k)
        graph, report = synthesize(table, k, eps, seed=seed, **kw)
        yield k, eps, graph, report
