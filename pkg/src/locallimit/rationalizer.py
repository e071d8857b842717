"""The H-graph of radius ``r+1`` directed balls and its rational weight system.

Vertices of H are directed balls ``A`` of radius ``r+1`` with positive mass;
there is an edge ``A -> B`` whenever some radius ``r+1`` edge-ball has source
view ``A`` and target view ``B``, weighted by that edge-ball's mass.  The
weights satisfy

* symmetry: ``w(A, B) == w(B, A)``;
* balance: ``w(A) == sum_B w(A, B) == sum_B w(B, A)``;
* orientation consistency: ``w(A) / l_A`` is the same for every orientation
  ``A`` of one underlying ball.

Edge weights are the unknowns, one per unordered pair, so symmetry and
balance hold by construction; orientation consistency is a homogeneous
linear system solved exactly over the rationals.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Callable, Hashable

from .balls import edge_ball_within, involute, s_view, t_view
from .exceptions import InfeasibleRounding, ValidationRequired
from .labeling import FAITHFUL_CAP, lball, ledge_within, lift_edges, lift_vec, lmultiplicity, ls_view, lt_view
from .measures import MarginalTable
from .validator import check, edge_marginals, induce_vec

DEFAULT_DENOMINATOR_CAP = 10**6


@dataclass
class HGraph:
    """Directed multigraph of radius ``r+1`` directed balls.

    ``keys[i]`` is the directed ball of vertex ``i``, ``balls[i]`` its
    underlying undirected ball, ``links[i]`` the radius ``r`` edge-ball around
    its distinguished edge.  ``edges`` maps ``(i, j)`` to the exact weight of
    the directed edge ``i -> j`` (loops allowed).  ``isolated`` carries the
    mass of balls whose root has degree 0; they never enter H proper.
    """

    d: int
    r: int
    keys: list[Hashable]
    balls: list[Hashable]
    multiplicity: list[int]
    links: list[Hashable]
    weight: list[Fraction]
    edges: dict[tuple[int, int], Fraction]
    isolated: dict[Hashable, Fraction] = field(default_factory=dict)
    labels: int | None = None

    @property
    def num_vertices(self) -> int:
        return len(self.keys)

    def pairs(self) -> list[tuple[int, int]]:
        return sorted({(min(i, j), max(i, j)) for i, j in self.edges})

    def ball_groups(self) -> dict[Hashable, list[int]]:
        groups: dict[Hashable, list[int]] = defaultdict(list)
        for i, b in enumerate(self.balls):
            groups[b].append(i)
        return dict(groups)


def _assemble(
    d: int,
    r: int,
    vertex_mass: dict,
    edge_mass: dict,
    *,
    ball_of: Callable,
    multiplicity_of: Callable,
    link_of: Callable,
    source: Callable,
    target: Callable,
    isolated: dict,
    labels: int | None = None,
) -> HGraph:
    keys = sorted(k for k, m in vertex_mass.items() if m > 0)
    index = {k: i for i, k in enumerate(keys)}
    edges: dict[tuple[int, int], Fraction] = defaultdict(Fraction)
    for phi, m in edge_mass.items():
        if m > 0:
            edges[index[source(phi)], index[target(phi)]] += m
    return HGraph(
        d=d,
        r=r,
        keys=keys,
        balls=[ball_of(k) for k in keys],
        multiplicity=[multiplicity_of(k) for k in keys],
        links=[link_of(k) for k in keys],
        weight=[vertex_mass[k] for k in keys],
        edges=dict(edges),
        isolated={b: m for b, m in isolated.items() if m > 0},
        labels=labels,
    )


def build_H(table: MarginalTable, r: int, *, tolerance: Fraction | int = 0) -> HGraph:
    """H-graph with exact weights from a validated table of depth >= r+2."""
    report = check(table, r + 1, tolerance)
    if not report.passed:
        raise ValidationRequired(
            f"table fails validation at radius {r + 1}: {report.violations[0]}"
        )
    vec = induce_vec(table, r + 1)
    H = _assemble(
        table.d,
        r,
        vec,
        edge_marginals(table, r + 1),
        ball_of=lambda vb: vb.ball,
        multiplicity_of=lambda vb: vb.multiplicity,
        link_of=edge_ball_within,
        source=s_view,
        target=t_view,
        isolated={b: p for b, p in table.levels[r + 1].items() if b.root_degree == 0},
    )
    for (i, j) in H.edges:
        assert H.links[i] == involute(H.links[j]), "H edge joins directed balls with mismatched links"
    if Fraction(tolerance) == 0:
        problems = equation_problems(H, H.weight, H.edges)
        assert not problems, f"exact H weights violate {problems[0]}"
    return H


def build_labeled_H(table: MarginalTable, r: int, n: int, *, cap: int = FAITHFUL_CAP) -> HGraph:
    """H-graph whose vertices are labeling classes with labels ``0..n-1``."""
    report = check(table, r + 1)
    if not report.passed:
        raise ValidationRequired(
            f"table fails validation at radius {r + 1}: {report.violations[0]}"
        )
    vec = lift_vec(induce_vec(table, r + 1), n, cap=cap)
    edges = lift_edges(edge_marginals(table, r + 1), n, cap=cap)
    iso = {}
    for b, p in table.levels[r + 1].items():
        if b.root_degree == 0 and p:
            for label in range(n):
                iso[(label, ())] = iso.get((label, ()), Fraction(0)) + p / n
    H = _assemble(
        table.d,
        r,
        vec,
        edges,
        ball_of=lball,
        multiplicity_of=lmultiplicity,
        link_of=lambda v: ledge_within(v, r),
        source=lambda phi: ls_view(phi, r + 1),
        target=lambda phi: lt_view(phi, r + 1),
        isolated=iso,
        labels=n,
    )
    problems = equation_problems(H, H.weight, H.edges)
    assert not problems, f"labeled H weights violate {problems[0]}"
    return H


def equation_problems(
    H: HGraph,
    w: list[Fraction],
    w_edge: dict[tuple[int, int], Fraction],
) -> list[str]:
    """Human-readable list of violated weight equations (empty when all hold)."""
    out: list[str] = []
    outflow: dict[int, Fraction] = defaultdict(Fraction)
    inflow: dict[int, Fraction] = defaultdict(Fraction)
    for (i, j), m in w_edge.items():
        if m < 0:
            out.append(f"negative edge weight on {(i, j)}")
        if w_edge.get((j, i), Fraction(0)) != m:
            out.append(f"d1: w{(i, j)}={m} != w{(j, i)}={w_edge.get((j, i), Fraction(0))}")
        outflow[i] += m
        inflow[j] += m
    for i, wi in enumerate(w):
        if outflow[i] != wi:
            out.append(f"d2: vertex {i} weight {wi} != outflow {outflow[i]}")
        if inflow[i] != wi:
            out.append(f"d3: vertex {i} weight {wi} != inflow {inflow[i]}")
    for members in H.ball_groups().values():
        ratios = {w[i] / H.multiplicity[i] for i in members}
        if len(ratios) > 1:
            out.append(f"orientation consistency fails on vertices {members}: {sorted(ratios)}")
    return out


@dataclass
class WeightSystem:
    """Rational weights on H plus the perturbation ``delta`` from the exact ones."""

    H: HGraph
    w: list[Fraction]
    w_edge: dict[tuple[int, int], Fraction]
    w_isolated: dict[Hashable, Fraction]
    delta: Fraction
    max_denominator: int

    def problems(self) -> list[str]:
        out = equation_problems(self.H, self.w, self.w_edge)
        for (i, j), m in self.w_edge.items():
            if (i, j) not in self.H.edges:
                out.append(f"support: weight on non-edge {(i, j)}")
        return out

    def check(self) -> "WeightSystem":
        problems = self.problems()
        if problems:
            raise AssertionError(f"weight system invalid: {problems[0]}")
        return self


def rref(rows: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals; returns (rows, pivot columns)."""
    m = [list(r) for r in rows]
    pivots: list[int] = []
    pr = 0
    for c in range(ncols):
        pivot = next((i for i in range(pr, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[pr], m[pivot] = m[pivot], m[pr]
        lead = m[pr][c]
        m[pr] = [x / lead for x in m[pr]]
        for i in range(len(m)):
            if i != pr and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[pr])]
        pivots.append(c)
        pr += 1
        if pr == len(m):
            break
    return m[:pr], pivots


def _round_nearest(x: Fraction, D: int) -> Fraction:
    return x.limit_denominator(D)


def _round_grid(x: Fraction, D: int) -> Fraction:
    return Fraction(round(x * D), D)


ROUNDING = {"nearest": _round_nearest, "grid": _round_grid}


def rationalize(
    H: HGraph,
    max_denominator: int | None = None,
    *,
    rounding: str = "nearest",
    max_doublings: int = 40,
    delta_bound: Fraction | None = None,
) -> WeightSystem:
    """Weight system on ``H`` with denominators controlled by ``max_denominator``.

    When the exact weights already satisfy every equation they are returned
    unchanged (``delta == 0``) unless their common denominator exceeds an
    explicit ``max_denominator``.  Without an explicit bound, rounding starts
    at the common denominator capped at ``DEFAULT_DENOMINATOR_CAP``.  Otherwise the free coordinates of the solution space are
    rounded (``nearest``: best approximation with denominator <= D;
    ``grid``: nearest multiple of 1/D), the pivot coordinates are solved for
    exactly, and D is doubled until the result is nonnegative (and within
    ``delta_bound`` if given).
    """
    pairs = H.pairs()
    x0 = [
        H.edges[i, i] if i == j else (H.edges.get((i, j), Fraction(0)) + H.edges.get((j, i), Fraction(0))) / 2
        for i, j in pairs
    ]
    iso0 = dict(H.isolated)
    values = x0 + list(iso0.values()) + list(H.weight)
    exact_lcm = lcm(*(v.denominator for v in values)) if values else 1
    exact_ok = not equation_problems(H, H.weight, H.edges)
    if exact_ok and (max_denominator is None or max(v.denominator for v in values) <= max_denominator):
        return WeightSystem(H, list(H.weight), dict(H.edges), iso0, Fraction(0), exact_lcm).check()
    if max_denominator is None:
        max_denominator = min(exact_lcm, DEFAULT_DENOMINATOR_CAP)

    incident: list[list[int]] = [[] for _ in range(H.num_vertices)]
    for p, (i, j) in enumerate(pairs):
        incident[i].append(p)
        if j != i:
            incident[j].append(p)
    rows: list[list[Fraction]] = []
    for members in H.ball_groups().values():
        first = members[0]
        for other in members[1:]:
            row = [Fraction(0)] * len(pairs)
            for p in incident[first]:
                row[p] += Fraction(1, H.multiplicity[first])
            for p in incident[other]:
                row[p] -= Fraction(1, H.multiplicity[other])
            rows.append(row)
    reduced, pivots = rref(rows, len(pairs)) if rows else ([], [])
    free = [c for c in range(len(pairs)) if c not in set(pivots)]
    rnd = ROUNDING[rounding]

    def weights_at(D: int):
        x = [Fraction(0)] * len(pairs)
        for c in free:
            x[c] = rnd(x0[c], D)
        for row, pc in zip(reduced, pivots):
            x[pc] = -sum((row[c] * x[c] for c in free if row[c] != 0), Fraction(0))
        return x

    D = max_denominator
    best_feasible: int | None = None
    for _ in range(max_doublings + 1):
        x = weights_at(D)
        if min(x, default=Fraction(0)) >= 0:
            best_feasible = best_feasible or D
            w_edge: dict[tuple[int, int], Fraction] = {}
            for (i, j), v in zip(pairs, x):
                if v > 0:
                    w_edge[i, j] = v
                    w_edge[j, i] = v
            w = [sum((x[p] for p in incident[i]), Fraction(0)) for i in range(H.num_vertices)]
            iso = {b: rnd(m, D) for b, m in iso0.items()}
            delta = max(
                [abs(a - b) for a, b in zip(x, x0)]
                + [abs(a - b) for a, b in zip(w, H.weight)]
                + [abs(iso[b] - iso0[b]) for b in iso0],
                default=Fraction(0),
            )
            if delta_bound is None or delta <= delta_bound:
                return WeightSystem(H, w, w_edge, iso, delta, D).check()
        D *= 2
    raise InfeasibleRounding(
        f"no admissible rounding up to denominator {D // 2}"
        + (f"; smallest nonnegative one found at {best_feasible}" if best_feasible else ""),
        best_denominator=best_feasible,
    )


def choose_N(ws: WeightSystem) -> int:
    """Smallest even N making every cell and sub-cell size an integer.

    Loop sub-cells are matched with themselves, so their size must be even as
    well: ``N * w(A, A) / 2`` is required to be integral.
    """
    H = ws.H
    dens = [1]
    for i, wi in enumerate(ws.w):
        if wi:
            dens.append((wi / H.multiplicity[i]).denominator)
    for (i, j), m in ws.w_edge.items():
        dens.append((m / 2 if i == j else m).denominator)
    dens.extend(m.denominator for m in ws.w_isolated.values())
    L = lcm(*dens)
    return L if L % 2 == 0 else 2 * L
