"""Built-in consistency checks run by ``locallimit selftest``."""

from __future__ import annotations

from fractions import Fraction

from .balls import enumerate_tree_balls, involute, orientations, s_view, t_view, edge_ball_within
from .census import ball_census
from .labeling import identity_report
from .measures import marginals_atom, marginals_regular, marginals_rooted, marginals_ugw
from .rationalizer import build_H, choose_N, rationalize
from .synthesizer import synthesize
from .validator import check

Result = tuple[str, bool, str]


def _identities(quick: bool) -> list[Result]:
    cases = [("labeled identities d=2 r=1 n=4 path3", marginals_atom(3, [(0, 1), (1, 2)], 3), 1, 4)]
    if not quick:
        cases.append(("labeled identities d=3 r=1 n=5 ugw", marginals_ugw({1: Fraction(1, 2), 3: Fraction(1, 2)}, 3, 2), 1, 5))
    out = []
    for name, table, r, n in cases:
        rep = identity_report(table, r, n)
        failed = [c.name for c in rep.checks if not c.passed]
        out.append((name, rep.passed, "all exact" if rep.passed else "failed: " + ", ".join(failed)))
    return out


def _involution_algebra() -> Result:
    bad = 0
    total = 0
    for d in (1, 2, 3):
        for r in (1, 2, 3):
            for ball in enumerate_tree_balls(d, r):
                if sum(vb.multiplicity for vb in orientations(ball)) != ball.root_degree:
                    bad += 1
                if r < 2:
                    continue
                for vb in orientations(ball):
                    phi = edge_ball_within(vb)
                    total += 1
                    if involute(involute(phi)) != phi or t_view(involute(phi)) != s_view(phi):
                        bad += 1
    return ("involution algebra d<=3 r<=2", bad == 0, f"{total} edge-balls, {bad} failures")


def _validator() -> Result:
    half = Fraction(1, 2)
    verdicts = [
        check(marginals_regular(3, 3)).passed,
        check(marginals_ugw({1: half, 3: half}, 3, 3)).passed,
        bool(check(marginals_rooted(3, [(0, 1), (1, 2)], 0, 3)).by_equation("e3")),
        bool(check(marginals_ugw({1: half, 3: half}, 3, 3, size_biased=False)).by_equation("e3")),
    ]
    return ("validator discrimination", all(verdicts), f"{sum(verdicts)}/4 verdicts correct")


def _weights() -> Result:
    tables = [(marginals_regular(3, 3), 1), (marginals_ugw({1: Fraction(1, 2), 3: Fraction(1, 2)}, 3, 3), 1)]
    deltas = []
    for t, r in tables:
        ws = rationalize(build_H(t, r))
        deltas.append(ws.delta == 0 and not ws.problems() and choose_N(ws) % 2 == 0)
    return ("exact weight systems", all(deltas), f"{sum(deltas)}/{len(deltas)} exact")


def _end_to_end() -> list[Result]:
    out = []
    t = marginals_regular(2, 3)
    g, _ = synthesize(t, 1, Fraction(1, 20))
    rep = ball_census(g, 1, table=t)
    cycles = bool((g.degrees() == 2).all())
    out.append(("regular d=2 r=1 synthesis", cycles and rep.tv_distance <= Fraction(1, 20),
                f"|V|={g.n} TV={float(rep.tv_distance):.4g}"))
    t = marginals_atom(2, [(0, 1)], 2)
    g, _ = synthesize(t, 0, Fraction(1, 20))
    rep = ball_census(g, 0, table=t)
    out.append(("K2 r=0 synthesis", rep.tv_distance == 0 and bool((g.degrees() == 1).all()), f"TV={rep.tv_distance}"))
    return out


def run_selftest(quick: bool = False) -> list[Result]:
    results = _identities(quick)
    results.append(_involution_algebra())
    results.append(_validator())
    results.append(_weights())
    results.extend(_end_to_end())
    return results
