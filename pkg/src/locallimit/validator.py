"""Exact involution-invariance check for marginal tables.

The directed measure puts mass ``l * mu(alpha)`` on each orientation of a
ball ``alpha`` (``l`` = size of the orbit of the distinguished edge).  Edge-ball
masses at radius ``r`` are read off the radius ``r+1`` orientations.  A table
is involution invariant to radius ``r`` when every edge-ball has the same mass
as its reversal; the source/target marginal identities are checked alongside.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from .balls import EdgeBall, VecBall, edge_ball_within, involute, orientations, s_view, t_view
from .exceptions import InsufficientDepth
from .measures import MarginalTable


def induce_vec(table: MarginalTable, r: int) -> dict[VecBall, Fraction]:
    """Directed-ball masses at radius ``r`` (``r >= 1``)."""
    if r < 1 or r > table.depth:
        raise InsufficientDepth(f"directed balls need 1 <= r <= depth ({table.depth}), got {r}")
    out: dict[VecBall, Fraction] = {}
    for ball, p in table.levels[r].items():
        if p == 0 or not ball.is_tree:
            continue
        for vb in orientations(ball):
            out[vb] = vb.multiplicity * p
    return out


def edge_marginals(table: MarginalTable, r: int) -> dict[EdgeBall, Fraction]:
    """Edge-ball masses at radius ``r``, read from the radius ``r+1`` level."""
    if table.depth < r + 1:
        raise InsufficientDepth(f"edge-balls of radius {r} need table depth >= {r + 1}")
    out: dict[EdgeBall, Fraction] = defaultdict(Fraction)
    for vb, m in induce_vec(table, r + 1).items():
        out[edge_ball_within(vb)] += m
    return dict(out)


@dataclass(frozen=True)
class Violation:
    equation: str
    radius: int
    witness: str
    lhs: Fraction
    rhs: Fraction

    def __str__(self) -> str:
        return f"{self.equation}\tr={self.radius}\t{self.witness}\t{self.lhs}\t{self.rhs}"


@dataclass
class ValidationReport:
    r_max: int
    tolerance: Fraction
    violations: list[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def certified_radius(self) -> int:
        """Largest radius up to which every edge identity holds (-1 if none)."""
        bad = [v.radius for v in self.violations if v.equation in ("e1", "e2", "e3")]
        other = [v for v in self.violations if v.equation not in ("e1", "e2", "e3")]
        if other:
            return -1
        return min(bad) - 1 if bad else self.r_max

    def by_equation(self, equation: str) -> list[Violation]:
        return [v for v in self.violations if v.equation == equation]

    def to_text(self) -> str:
        lines = [
            f"status\t{'PASS' if self.passed else 'FAIL'}",
            f"r_max\t{self.r_max}",
            f"tolerance\t{self.tolerance}",
            f"certified_radius\t{self.certified_radius}",
            f"violations\t{len(self.violations)}",
        ]
        lines += [str(v) for v in self.violations]
        return "\n".join(lines) + "\n"


def check(table: MarginalTable, r_max: int | None = None, tolerance: Fraction | int | str = 0) -> ValidationReport:
    """Check sum-to-one, support, depth consistency and the edge identities.

    Edge identities are checked for every ``r <= r_max``; ``r_max`` defaults to
    ``depth - 1``, the largest radius a finite table can certify.
    """
    tol = Fraction(tolerance)
    r_max = table.depth - 1 if r_max is None else r_max
    if r_max < 0 or table.depth < r_max + 1:
        raise InsufficientDepth(f"checking radius {r_max} needs table depth >= {r_max + 1}")
    report = ValidationReport(r_max, tol)
    add = report.violations.append

    for kind, r, ball, lhs, rhs in table.problems():
        if kind == "support" or abs(lhs - rhs) > tol:
            add(Violation(kind, r, ball.token if ball is not None else "*", lhs, rhs))

    for r in range(r_max + 1):
        edges = edge_marginals(table, r)
        seen: set[EdgeBall] = set()
        for phi in sorted(edges):
            if phi in seen:
                continue
            rev = involute(phi)
            seen.update((phi, rev))
            lhs, rhs = edges[phi], edges.get(rev, Fraction(0))
            if abs(lhs - rhs) > tol:
                add(Violation("e3", r, phi.token, lhs, rhs))
        if r == 0:
            # radius-0 directed balls carry no information beyond the level-1 degrees
            continue
        vec = induce_vec(table, r)
        for eq, view in (("e1", s_view), ("e2", t_view)):
            summed: dict[VecBall, Fraction] = defaultdict(Fraction)
            for phi, m in edges.items():
                summed[view(phi)] += m
            for vb in sorted(set(summed) | set(vec)):
                lhs, rhs = summed.get(vb, Fraction(0)), vec.get(vb, Fraction(0))
                if abs(lhs - rhs) > tol:
                    add(Violation(eq, r, vb.token, lhs, rhs))
    return report
