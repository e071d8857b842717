"""Vertex labels from ``{0, ..., n-1}`` on directed balls and edge-balls.

A labeled rooted tree is the nested tuple ``(label, (child, child, ...))``
with children sorted, which is canonical under label-preserving rooted
automorphisms.  A labeled directed ball is the pair ``(root_side, head)``
and a labeled edge-ball the pair ``(root_side, head_side)``; both sides are
labeled trees, exactly mirroring the unlabeled :class:`~locallimit.balls.VecBall`
and :class:`~locallimit.balls.EdgeBall`.

Two modes use this module.  The faithful mode enumerates every labeling class
together with the number of concrete labelings in it, which is what
:func:`identity_report` uses to check the labeled-measure identities exactly.
The quotient mode never materializes labels and only needs
:func:`separated_fraction` and :func:`choose_n` to size the output.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from math import factorial, prod
from typing import NamedTuple, Sequence

from .balls import (
    BallCode,
    Code,
    EdgeBall,
    VecBall,
    children,
    directed_automorphism_count,
    orientations,
)
from .exceptions import ExplosionGuard
from .measures import MarginalTable
from .validator import edge_marginals, induce_vec

LTree = tuple  # (label, tuple[LTree, ...])

#: default cap on ``n ** |V|`` for faithful enumeration
FAITHFUL_CAP = 10**8


class LVec(NamedTuple):
    root_side: LTree
    head: LTree


class LEdge(NamedTuple):
    root_side: LTree
    head_side: LTree


# --------------------------------------------------------------------------
# label budget
# --------------------------------------------------------------------------


def separated_fraction(ball: BallCode | int, n: int) -> Fraction:
    """Fraction of ``{1..n}``-labelings of the ball using pairwise distinct labels."""
    size = ball if isinstance(ball, int) else ball.num_vertices
    if n < 1:
        raise ValueError("n must be positive")
    return Fraction(prod(range(n - size + 1, n + 1)) if size <= n else 0, n**size)


@dataclass(frozen=True)
class LabelBudget:
    n: int
    slack: Fraction
    bound: Fraction
    depth: int


def _slack(masses: Sequence[tuple[int, Fraction]], n: int) -> Fraction:
    return sum((p * (1 - separated_fraction(size, n)) for size, p in masses), Fraction(0))


def choose_n(table: MarginalTable, depth: int, bound: Fraction | str | float) -> LabelBudget:
    """Smallest ``n`` whose non-separated mass at ``depth`` is below ``bound``."""
    bound = Fraction(bound)
    if not 0 < bound < 1:
        raise ValueError("bound must lie in (0, 1)")
    sizes: dict[int, Fraction] = defaultdict(Fraction)
    for ball, p in table.levels[depth].items():
        sizes[ball.num_vertices] += p
    masses = sorted(sizes.items())
    lo, hi = 0, 1
    while _slack(masses, hi) >= bound:
        lo, hi = hi, hi * 2
    # invariant: slack(lo) >= bound > slack(hi), slack(0) counted as 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _slack(masses, mid) < bound:
            hi = mid
        else:
            lo = mid
    return LabelBudget(hi, _slack(masses, hi), bound, depth)


# --------------------------------------------------------------------------
# labeled trees
# --------------------------------------------------------------------------


def _multinomial(items: Sequence) -> int:
    return factorial(len(items)) // prod(factorial(m) for m in Counter(items).values())


@lru_cache(maxsize=None)
def labeled_classes(code: Code, n: int) -> dict[LTree, int]:
    """Labeling classes of the rooted tree ``code`` with their sizes.

    The value for a class is the number of concrete labelings of a fixed
    representative of ``code`` that fall in it; the values sum to
    ``n ** |V|``.
    """
    groups = Counter(children(code))
    partial: dict[tuple, int] = {(): 1}
    for c, m in sorted(groups.items()):
        sub = labeled_classes(c, n)
        keys = sorted(sub)
        nxt: dict[tuple, int] = {}
        for combo in combinations_with_replacement(keys, m):
            w = _multinomial(combo) * prod(sub[k] for k in combo)
            for prefix, cnt in partial.items():
                nxt[prefix + combo] = cnt * w
        partial = nxt
    out: dict[LTree, int] = {}
    for kids, cnt in partial.items():
        kids = tuple(sorted(kids))
        for label in range(n):
            out[(label, kids)] = cnt
    return out


@lru_cache(maxsize=None)
def ltruncate(t: LTree, depth: int) -> LTree:
    if depth == 0:
        return (t[0], ())
    return (t[0], tuple(sorted(ltruncate(c, depth - 1) for c in t[1])))


def lsize(t: LTree) -> int:
    return 1 + sum(lsize(c) for c in t[1])


def labels_of(t: LTree) -> list[int]:
    out = [t[0]]
    for c in t[1]:
        out.extend(labels_of(c))
    return out


def is_separated(t: LTree) -> bool:
    labels = labels_of(t)
    return len(set(labels)) == len(labels)


@lru_cache(maxsize=None)
def labeled_automorphism_count(t: LTree) -> int:
    total = 1
    for c, m in Counter(t[1]).items():
        total *= factorial(m) * labeled_automorphism_count(c) ** m
    return total


def lball(vec: LVec) -> LTree:
    """Undirected labeled ball underlying a labeled directed ball."""
    label, kids = vec.root_side
    return (label, tuple(sorted(kids + (vec.head,))))


def lmultiplicity(vec: LVec) -> int:
    """Root edges carried to the distinguished one by label-preserving automorphisms."""
    return vec.root_side[1].count(vec.head) + 1


def ledge_within(vec: LVec, r: int) -> LEdge:
    """Labeled radius-``r`` edge-ball of a labeled radius ``r+1`` directed ball."""
    return LEdge(ltruncate(vec.root_side, r), vec.head)


def ls_view(phi: LEdge, r: int) -> LVec:
    return LVec(phi.root_side, ltruncate(phi.head_side, r - 1))


def lt_view(phi: LEdge, r: int) -> LVec:
    return LVec(phi.head_side, ltruncate(phi.root_side, r - 1))


def linvolute(phi: LEdge) -> LEdge:
    return LEdge(phi.head_side, phi.root_side)


def ltruncate_vec(vec: LVec, r: int) -> LVec:
    return LVec(ltruncate(vec.root_side, r), ltruncate(vec.head, r - 1))


# --------------------------------------------------------------------------
# labeled masses
# --------------------------------------------------------------------------


def vecball_layout(vb: VecBall) -> list[int]:
    """Parent array of a concrete representative of ``vb``.

    Vertex 0 is the root, vertex 1 the head; the head subtree follows in
    preorder, then the remaining children of the root in canonical order.
    """
    parent: list[int] = [-1]

    def grow(code: Code, p: int) -> None:
        me = len(parent)
        parent.append(p)
        for c in children(code):
            grow(c, me)

    grow(vb.head, 0)
    for c in children(vb.root_side):
        grow(c, 0)
    return parent


def labeled_vec_of(vb: VecBall, labels: Sequence[int]) -> LVec:
    """Canonical labeled class of the labeling ``labels`` of :func:`vecball_layout`."""
    parent = vecball_layout(vb)
    if len(labels) != len(parent):
        raise ValueError(f"expected {len(parent)} labels, got {len(labels)}")
    kids: list[list[int]] = [[] for _ in parent]
    for v, p in enumerate(parent):
        if p >= 0:
            kids[p].append(v)

    def build(v: int) -> LTree:
        return (labels[v], tuple(sorted(build(c) for c in kids[v])))

    root_side = (labels[0], tuple(sorted(build(c) for c in kids[0] if c != 1)))
    return LVec(root_side, build(1))


def class_size(vb: VecBall, vec: LVec) -> int:
    """|C(kappa)|: labelings of ``vb`` equivalent to one in class ``vec``."""
    fixed = labeled_automorphism_count(vec.root_side) * labeled_automorphism_count(vec.head)
    return directed_automorphism_count(vb) // fixed


def labeled_mass(vb: VecBall, labels: Sequence[int], n: int, vec_mass: Fraction) -> Fraction:
    """Mass of the labeling class of ``labels`` under the labeled directed measure."""
    if any(not 0 <= x < n for x in labels):
        raise ValueError(f"labels must lie in 0..{n - 1}")
    return Fraction(class_size(vb, labeled_vec_of(vb, labels)), n ** vb.num_vertices) * vec_mass


def _pair_classes(left: Code, right: Code, n: int, cap: int) -> tuple[dict, dict]:
    if n ** (len(left) + len(right)) > cap:
        raise ExplosionGuard(f"{n}^{len(left) + len(right)} labelings exceed cap {cap}")
    return labeled_classes(left, n), labeled_classes(right, n)


def lift_vec(masses: dict[VecBall, Fraction], n: int, *, cap: int = FAITHFUL_CAP) -> dict[LVec, Fraction]:
    """Labeled directed measure from an unlabeled one."""
    out: dict[LVec, Fraction] = defaultdict(Fraction)
    for vb, m in sorted(masses.items()):
        rs, hd = _pair_classes(vb.root_side, vb.head, n, cap)
        unit = m / n**vb.num_vertices
        for a, ca in rs.items():
            for b, cb in hd.items():
                out[LVec(a, b)] += unit * (ca * cb)
    return dict(out)


def lift_edges(masses: dict[EdgeBall, Fraction], n: int, *, cap: int = FAITHFUL_CAP) -> dict[LEdge, Fraction]:
    """Labeled edge-ball measure from an unlabeled one."""
    out: dict[LEdge, Fraction] = defaultdict(Fraction)
    for eb, m in sorted(masses.items()):
        rs, hs = _pair_classes(eb.root_side, eb.head_side, n, cap)
        unit = m / n**eb.num_vertices
        for a, ca in rs.items():
            for b, cb in hs.items():
                out[LEdge(a, b)] += unit * (ca * cb)
    return dict(out)


def _accumulate(total: dict, local: dict[object, int], unit: Fraction) -> None:
    for key, cnt in local.items():
        total[key] += unit * cnt


# --------------------------------------------------------------------------
# identity harness
# --------------------------------------------------------------------------


@dataclass
class IdentityCheck:
    name: str
    checked: int = 0
    failures: list[tuple[str, Fraction, Fraction]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.checked > 0 and not self.failures

    def compare(self, key: object, lhs: Fraction, rhs: Fraction) -> None:
        self.checked += 1
        if lhs != rhs:
            self.failures.append((repr(key), lhs, rhs))


@dataclass
class IdentityReport:
    n: int
    r: int
    checks: list[IdentityCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_text(self) -> str:
        lines = [f"n={self.n} r={self.r}"]
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"{status}\t{c.name}\tchecked={c.checked}\tfailures={len(c.failures)}")
        return "\n".join(lines) + "\n"


def _compare_all(check: IdentityCheck, lhs: dict, rhs: dict) -> None:
    for key in sorted(set(lhs) | set(rhs), key=repr):
        check.compare(key, lhs.get(key, Fraction(0)), rhs.get(key, Fraction(0)))


def identity_report(table: MarginalTable, r: int, n: int, *, cap: int = FAITHFUL_CAP) -> IdentityReport:
    """Check the labeled-measure identities at radius ``r`` by enumeration.

    Every labeling class of every radius ``r`` and ``r+1`` orientation is
    enumerated with its size, and the following are compared exactly:

    * per directed ball, the labeled masses add back up to the unlabeled mass;
    * radius ``r+1`` classes truncate onto radius ``r`` classes (consistency);
    * labeled edge-balls summed by source view and by target view both give
      the labeled directed measure, and each edge-ball has the mass of its
      reversal;
    * the aggregated edge-ball masses match the closed form
      ``|C| / n^|V| * mass``;
    * the undirected labeled measure, summed over all labelings of a ball,
      gives the ball's probability, and its label-separated part is
      ``separated_fraction * probability``.
    """
    if r < 1:
        raise ValueError("labeled identities are stated for r >= 1")
    if table.depth < r + 1:
        raise ValueError(f"table depth {table.depth} < {r + 1}")

    mass_sum = IdentityCheck("labeled masses sum to directed mass")
    consistency = IdentityCheck("labeled depth consistency")
    source = IdentityCheck("source-view sums")
    target = IdentityCheck("target-view sums")
    involution = IdentityCheck("edge-ball involution invariance")
    closed = IdentityCheck("edge-ball closed form")
    unlabeled_sum = IdentityCheck("undirected labeled masses sum to ball mass")
    separated = IdentityCheck("label-separated fraction")

    vec_r: dict[LVec, Fraction] = defaultdict(Fraction)
    for vb, m in sorted(induce_vec(table, r).items()):
        rs, hd = _pair_classes(vb.root_side, vb.head, n, cap)
        local: dict[LVec, int] = {}
        for a, ca in rs.items():
            for b, cb in hd.items():
                local[LVec(a, b)] = ca * cb
        mass_sum.compare(vb, sum(local.values()) * m / n**vb.num_vertices, m)
        _accumulate(vec_r, local, m / n**vb.num_vertices)

    trunc_r1: dict[LVec, Fraction] = defaultdict(Fraction)
    edges: dict[LEdge, Fraction] = defaultdict(Fraction)
    for vb, m in sorted(induce_vec(table, r + 1).items()):
        rs, hd = _pair_classes(vb.root_side, vb.head, n, cap)
        t_rs = {a: ltruncate(a, r) for a in rs}
        t_hd = {b: ltruncate(b, r - 1) for b in hd}
        to_trunc: dict[LVec, int] = defaultdict(int)
        to_edge: dict[LEdge, int] = defaultdict(int)
        total = 0
        for a, ca in rs.items():
            ta = t_rs[a]
            for b, cb in hd.items():
                c = ca * cb
                total += c
                to_trunc[LVec(ta, t_hd[b])] += c
                to_edge[LEdge(ta, b)] += c
        unit = m / n**vb.num_vertices
        mass_sum.compare(vb, total * unit, m)
        _accumulate(trunc_r1, to_trunc, unit)
        _accumulate(edges, to_edge, unit)
    _compare_all(consistency, trunc_r1, vec_r)

    by_source: dict[LVec, Fraction] = defaultdict(Fraction)
    by_target: dict[LVec, Fraction] = defaultdict(Fraction)
    for phi, m in edges.items():
        by_source[ls_view(phi, r)] += m
        by_target[lt_view(phi, r)] += m
    _compare_all(source, by_source, vec_r)
    _compare_all(target, by_target, vec_r)
    seen: set[LEdge] = set()
    for phi in sorted(edges):
        if phi not in seen:
            rev = linvolute(phi)
            seen.update((phi, rev))
            involution.compare(phi, edges[phi], edges.get(rev, Fraction(0)))
    _compare_all(closed, edges, lift_edges(edge_marginals(table, r), n, cap=cap))

    # undirected labeled measure: mass of M is the mass of any orientation / l
    mu_n: dict[LTree, Fraction] = defaultdict(Fraction)
    owner: dict[LTree, BallCode] = {}
    for ball, p in sorted(table.levels[r].items()):
        if p == 0:
            continue
        if ball.root_degree == 0:
            for label in range(n):
                mu_n[(label, ())] += p / n
                owner[(label, ())] = ball
            continue
        for vb in orientations(ball):
            rs, hd = labeled_classes(vb.root_side, n), labeled_classes(vb.head, n)
            unit = vb.multiplicity * p / n**vb.num_vertices
            for a, ca in rs.items():
                for b, cb in hd.items():
                    vec = LVec(a, b)
                    M = lball(vec)
                    mu_n[M] += unit * ca * cb / ball.root_degree
                    owner[M] = ball
    per_ball: dict[BallCode, Fraction] = defaultdict(Fraction)
    per_ball_sep: dict[BallCode, Fraction] = defaultdict(Fraction)
    for M, m in mu_n.items():
        per_ball[owner[M]] += m
        if is_separated(M):
            per_ball_sep[owner[M]] += m
    for ball, p in sorted(table.levels[r].items()):
        if p == 0:
            continue
        unlabeled_sum.compare(ball, per_ball[ball], p)
        separated.compare(ball, per_ball_sep.get(ball, Fraction(0)), separated_fraction(ball, n) * p)

    # the per-M formula (1/deg) * sum over orientations must agree with mass / l
    for vec, m in vec_r.items():
        M = lball(vec)
        unlabeled_sum.compare(("orientation", vec), m / lmultiplicity(vec), mu_n[M])

    return IdentityReport(
        n, r, [mass_sum, consistency, source, target, involution, closed, unlabeled_sum, separated]
    )
