"""Finite-depth marginal tables of involution-invariant tree measures.

A :class:`MarginalTable` stores, for every depth ``r <= depth``, the exact
probability of each rooted tree ball of radius ``r``.  Tables come from
generators (regular trees, unimodular Galton-Watson trees, uniformly rooted
finite trees, mixtures) or from table files.
"""

from __future__ import annotations

import hashlib
import json
import re
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from math import factorial, prod
from os import PathLike
from pathlib import Path
from typing import Iterator, Mapping, Sequence

from .balls import LEAF, BallCode, Code, canonicalize, extract_ball, join, point_ball, truncate
from .exceptions import (
    DegreeExceeded,
    InvariantViolation,
    LocalLimitError,
    NotATree,
    ParameterMismatch,
    ParseError,
    ZeroMeanDegree,
)

FORMAT_VERSION = 1

Level = dict[BallCode, Fraction]


@dataclass(frozen=True)
class MarginalTable:
    """Exact ball marginals ``levels[r][ball]`` for ``r = 0 .. depth``.

    Construction does not enforce the measure invariants, so that broken
    tables can be handed to the validator; use :meth:`problems` or
    :func:`load_table` for checked access.
    """

    d: int
    levels: tuple[Level, ...]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def __getitem__(self, r: int) -> Level:
        return self.levels[r]

    def support(self, r: int) -> list[BallCode]:
        return sorted(b for b, p in self.levels[r].items() if p != 0)

    def prob(self, ball: BallCode) -> Fraction:
        return self.levels[ball.radius].get(ball, Fraction(0))

    def restrict(self, depth: int) -> "MarginalTable":
        if depth > self.depth:
            raise ParameterMismatch(f"table has depth {self.depth} < {depth}")
        return MarginalTable(self.d, self.levels[: depth + 1])

    def problems(self) -> Iterator[tuple[str, int, BallCode | None, Fraction, Fraction]]:
        """Yield ``(kind, depth, witness, lhs, rhs)`` for each broken invariant.

        ``kind`` is one of ``sum-to-one``, ``support`` and ``consistency``.
        """
        for r, level in enumerate(self.levels):
            total = sum(level.values(), Fraction(0))
            if total != 1:
                yield "sum-to-one", r, None, total, Fraction(1)
            for ball, p in sorted(level.items()):
                if p < 0 or not ball.is_tree or ball.d != self.d or ball.radius != r:
                    yield "support", r, ball, p, Fraction(0)
        for r in range(self.depth):
            projected: dict[BallCode, Fraction] = defaultdict(Fraction)
            for ball, p in self.levels[r + 1].items():
                if ball.is_tree and ball.radius == r + 1:
                    projected[truncate(ball, r)] += p
            for ball in sorted(set(projected) | set(self.levels[r])):
                lhs = self.levels[r].get(ball, Fraction(0))
                if lhs != projected.get(ball, Fraction(0)):
                    yield "consistency", r, ball, lhs, projected.get(ball, Fraction(0))

    def check(self) -> "MarginalTable":
        for kind, r, ball, lhs, rhs in self.problems():
            token = ball.token if ball is not None else None
            raise InvariantViolation(
                f"{kind} violated at depth {r}" + (f" for {token}" if token else "") + f": {lhs} != {rhs}",
                depth=r,
                ball=token,
            )
        return self

    def expected_degree(self) -> Fraction:
        level = self.levels[1] if self.depth >= 1 else {}
        return sum((b.root_degree * p for b, p in level.items()), Fraction(0))

    def to_bytes(self) -> bytes:
        doc = {
            "format_version": FORMAT_VERSION,
            "d": self.d,
            "depth": self.depth,
            "levels": [
                [
                    {"ball": b.token, "numerator": p.numerator, "denominator": p.denominator}
                    for b, p in sorted(level.items())
                ]
                for level in self.levels
            ],
        }
        return (json.dumps(doc, indent=1) + "\n").encode()

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()[:16]


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


# --------------------------------------------------------------------------
# generators
# --------------------------------------------------------------------------


def _regular_subtree(d: int, budget: int) -> Code:
    code = LEAF
    for _ in range(budget):
        code = join([code] * (d - 1))
    return code


def marginals_regular(d: int, depth: int) -> MarginalTable:
    """Point mass on the d-regular tree at every depth."""
    if d < 1 or depth < 0:
        raise ValueError("need d >= 1 and depth >= 0")
    levels = [{point_ball(d): Fraction(1)}]
    for r in range(1, depth + 1):
        code = join([_regular_subtree(d, r - 1)] * d)
        levels.append({BallCode(d, r, True, code): Fraction(1)})
    return MarginalTable(d, tuple(levels))


def _multiset_dist(law: Mapping[int, Fraction], sub: Mapping[Code, Fraction]) -> dict[Code, Fraction]:
    """Law of a vertex with ``k ~ law`` children drawn i.i.d. from ``sub``."""
    keys = sorted(sub)
    out: dict[Code, Fraction] = defaultdict(Fraction)
    for k, pk in sorted(law.items()):
        if pk == 0:
            continue
        for combo in combinations_with_replacement(keys, k):
            mult = factorial(k) // prod(factorial(m) for m in Counter(combo).values())
            out[join(combo)] += pk * mult * prod((sub[c] for c in combo), start=Fraction(1))
    return dict(out)


def _check_law(law: Mapping[int, Fraction], d: int) -> dict[int, Fraction]:
    law = {int(k): _frac(p) for k, p in law.items()}
    if any(k < 0 or k > d for k in law):
        raise DegreeExceeded(f"degree distribution {law} not supported on 0..{d}")
    if any(p < 0 for p in law.values()) or sum(law.values()) != 1:
        raise ValueError(f"degree distribution {law} is not a probability vector")
    return law


def marginals_ugw(
    degree_dist: Mapping[int, Fraction | int | str],
    d: int,
    depth: int,
    *,
    size_biased: bool = True,
) -> MarginalTable:
    """Ball marginals of a Galton-Watson tree with root degree ``degree_dist``.

    With ``size_biased=True`` (the unimodular case) a non-root vertex has
    ``k`` children with probability ``(k+1) q[k+1] / sum_j j q[j]``.  With
    ``size_biased=False`` non-root degrees follow ``degree_dist`` conditioned
    on being positive; that tree is not involution invariant in general and is
    only useful as a negative example.
    """
    q = _check_law(degree_dist, d)
    mean = sum(k * p for k, p in q.items())
    if mean == 0:
        raise ZeroMeanDegree("degree distribution has zero mean")
    if size_biased:
        offspring = {k - 1: k * p / mean for k, p in q.items() if k >= 1 and p}
    else:
        positive = 1 - q.get(0, Fraction(0))
        offspring = {k - 1: p / positive for k, p in q.items() if k >= 1 and p}
    levels = [{point_ball(d): Fraction(1)}]
    sub: dict[Code, Fraction] = {LEAF: Fraction(1)}
    for r in range(1, depth + 1):
        root = _multiset_dist(q, sub)
        levels.append({BallCode(d, r, True, c): p for c, p in root.items()})
        sub = _multiset_dist(offspring, sub)
    return MarginalTable(d, tuple(levels))


def marginals_atom(n: int, edges: Sequence[tuple[int, int]], depth: int, d: int | None = None) -> MarginalTable:
    """Uniformly rooted finite tree on vertices ``0..n-1``."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    if n < 1 or len(edges) != n - 1 or not _connected(adj):
        raise NotATree(f"{n} vertices / {len(edges)} edges do not form a tree")
    dmax = max(len(a) for a in adj)
    d = dmax if d is None else d
    if dmax > d:
        raise DegreeExceeded(f"tree has a vertex of degree {dmax} > {d}")
    levels = []
    for r in range(depth + 1):
        counts = Counter(canonicalize(extract_ball(adj, v, r), d, r) for v in range(n))
        levels.append({b: Fraction(c, n) for b, c in counts.items()})
    return MarginalTable(d, tuple(levels))


def marginals_rooted(n: int, edges: Sequence[tuple[int, int]], root: int, depth: int, d: int | None = None) -> MarginalTable:
    """Point mass on a finite tree rooted at ``root`` (not involution invariant in general)."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    if n < 1 or len(edges) != n - 1 or not _connected(adj):
        raise NotATree(f"{n} vertices / {len(edges)} edges do not form a tree")
    if not 0 <= root < n:
        raise ValueError(f"root {root} outside 0..{n - 1}")
    dmax = max(len(a) for a in adj)
    d = dmax if d is None else d
    if dmax > d:
        raise DegreeExceeded(f"tree has a vertex of degree {dmax} > {d}")
    return MarginalTable(d, tuple({canonicalize(extract_ball(adj, root, r), d, r): Fraction(1)} for r in range(depth + 1)))


def _connected(adj: Sequence[Sequence[int]]) -> bool:
    seen = {0}
    stack = [0]
    while stack:
        for v in adj[stack.pop()]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(adj)


def mixture(tables: Sequence[tuple[MarginalTable, Fraction | int | str]]) -> MarginalTable:
    """Convex combination of tables sharing ``d`` and ``depth``."""
    if not tables:
        raise ParameterMismatch("empty mixture")
    d, depth = tables[0][0].d, tables[0][0].depth
    weights = [_frac(w) for _, w in tables]
    if any(t.d != d or t.depth != depth for t, _ in tables):
        raise ParameterMismatch("mixture components must share d and depth")
    if any(w <= 0 for w in weights) or sum(weights) != 1:
        raise ParameterMismatch(f"mixture weights {weights} must be positive and sum to 1")
    levels = []
    for r in range(depth + 1):
        level: dict[BallCode, Fraction] = defaultdict(Fraction)
        for (t, _), w in zip(tables, weights):
            for b, p in t.levels[r].items():
                level[b] += w * p
        levels.append(dict(level))
    return MarginalTable(d, tuple(levels))


def named_tree(shape: str) -> tuple[int, list[tuple[int, int]]]:
    """Small named trees: ``K1``, ``K2``, ``pathN``, ``starN`` (N leaves),
    ``binaryN`` (complete binary tree on N vertices) or an explicit edge list
    such as ``0-1,1-2``."""
    s = shape.strip()
    if s == "K1":
        return 1, []
    if s == "K2":
        return 2, [(0, 1)]
    if m := re.fullmatch(r"path(\d+)", s):
        n = int(m.group(1))
        return n, [(i, i + 1) for i in range(n - 1)]
    if m := re.fullmatch(r"star(\d+)", s):
        k = int(m.group(1))
        return k + 1, [(0, i) for i in range(1, k + 1)]
    if m := re.fullmatch(r"binary(\d+)", s):
        n = int(m.group(1))
        return n, [((i - 1) // 2, i) for i in range(1, n)]
    try:
        edges = [tuple(int(x) for x in e.split("-")) for e in s.split(",") if e]
        if any(len(e) != 2 for e in edges):
            raise ValueError
    except ValueError as exc:
        raise ParseError(f"unknown tree shape {shape!r}") from exc
    n = 1 + max((max(e) for e in edges), default=0)
    return n, [(u, v) for u, v in edges]


def parse_degree_dist(text: str) -> dict[int, Fraction]:
    """Parse ``"1:1/2,3:1/2"`` into ``{1: 1/2, 3: 1/2}``."""
    out: dict[int, Fraction] = {}
    try:
        for item in text.split(","):
            k, p = item.split(":")
            out[int(k)] = out.get(int(k), Fraction(0)) + Fraction(p.strip())
    except ValueError as exc:
        raise ParseError(f"bad degree distribution {text!r}") from exc
    return out


# --------------------------------------------------------------------------
# table files
# --------------------------------------------------------------------------


def save_table(table: MarginalTable, path: str | PathLike) -> None:
    Path(path).write_bytes(table.to_bytes())


def parse_table(data: bytes | str, *, checked: bool = True) -> MarginalTable:
    """Parse table-file contents; ``checked`` also verifies the table invariants."""
    try:
        doc = json.loads(data)
        if doc["format_version"] != FORMAT_VERSION:
            raise ParseError(f"unsupported format_version {doc['format_version']}")
        d, depth, raw = int(doc["d"]), int(doc["depth"]), doc["levels"]
        if len(raw) != depth + 1:
            raise ParseError(f"expected {depth + 1} levels, found {len(raw)}")
        levels = []
        for entries in raw:
            level: dict[BallCode, Fraction] = {}
            for e in entries:
                num, den = e["numerator"], e["denominator"]
                if not isinstance(num, int) or not isinstance(den, int) or den <= 0:
                    raise ParseError(f"bad probability {num}/{den}")
                ball = BallCode.from_token(e["ball"])
                if ball in level:
                    raise ParseError(f"duplicate ball {ball.token}")
                level[ball] = Fraction(num, den)
            levels.append(level)
    except ParseError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"malformed table file: {exc}") from exc
    except LocalLimitError as exc:
        raise ParseError(f"malformed table file: {exc}") from exc
    table = MarginalTable(d, tuple(levels))
    return table.check() if checked else table


def load_table(path: str | PathLike, *, checked: bool = True) -> MarginalTable:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return parse_table(data, checked=checked)


def tables_equal(a: MarginalTable, b: MarginalTable) -> bool:
    """Equality ignoring explicit zero entries."""
    if a.d != b.d or a.depth != b.depth:
        return False
    return all(
        {k: v for k, v in x.items() if v} == {k: v for k, v in y.items() if v} for x, y in zip(a.levels, b.levels)
    )

