"""scikit-learn style wrappers around the synthesis and census pipeline.

``LocalLimitSynthesizer.fit`` takes a marginal table (the "data") and
prepares the seed-independent synthesis plan; ``sample`` draws graphs.
``BallCensus`` turns a list of graphs into a ball-frequency matrix over the
vocabulary of ball classes seen during ``fit``.
"""

from __future__ import annotations

from fractions import Fraction
from os import PathLike
from typing import Any, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .census import DEFAULT_MAX_CORE, ball_census, as_adjacency
from .measures import MarginalTable, load_table
from .synthesizer import DEFAULT_MAX_N, DEFAULT_SEED, MODES, SyntheticGraph, plan_synthesis, realize


def check_table(table: Any) -> MarginalTable:
    """Accept a MarginalTable or a path to a table file; the result is checked."""
    if isinstance(table, MarginalTable):
        return table.check()
    if isinstance(table, (str, PathLike)):
        return load_table(table)
    raise TypeError(f"expected a MarginalTable or a table path, got {type(table).__name__}")


def check_graph(graph: Any, d: int | None = None) -> list[list[int]]:
    """Adjacency lists of a simple graph, optionally with degrees bounded by ``d``."""
    adj = as_adjacency(graph)
    n = len(adj)
    for v, nb in enumerate(adj):
        if v in nb:
            raise ValueError(f"vertex {v} has a self-loop")
        if len(set(nb)) != len(nb):
            raise ValueError(f"vertex {v} has a repeated neighbor")
        if any(not 0 <= u < n or v not in adj[u] for u in nb):
            raise ValueError(f"adjacency of vertex {v} is not symmetric")
        if d is not None and len(nb) > d:
            raise ValueError(f"vertex {v} has degree {len(nb)} > {d}")
    return adj


def _check_fraction(x: Any, name: str) -> Fraction:
    value = Fraction(x).limit_denominator(10**9) if isinstance(x, float) else Fraction(x)
    if not 0 < value < 1:
        raise ValueError(f"{name} must lie in (0, 1), got {x}")
    return value


class LocalLimitSynthesizer(BaseEstimator):
    """Synthesize finite graphs whose radius-``radius`` balls follow a table."""

    def __init__(
        self,
        radius: int = 1,
        epsilon: float | str = 0.05,
        mode: str = "quotient",
        seed: int = DEFAULT_SEED,
        n_labels: int | None = None,
        min_vertices: int | None = None,
        max_N: int = DEFAULT_MAX_N,
        max_denominator: int | None = None,
    ):
        self.radius = radius
        self.epsilon = epsilon
        self.mode = mode
        self.seed = seed
        self.n_labels = n_labels
        self.min_vertices = min_vertices
        self.max_N = max_N
        self.max_denominator = max_denominator

    def fit(self, table, y=None):
        table = check_table(table)
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        eps = _check_fraction(self.epsilon, "epsilon")
        self.plan_ = plan_synthesis(
            table,
            self.radius,
            eps,
            self.mode,
            n_labels=self.n_labels,
            min_vertices=self.min_vertices,
            max_N=self.max_N,
            max_denominator=self.max_denominator,
        )
        self.table_ = table
        self.H_ = self.plan_.H
        self.weights_ = self.plan_.ws
        self.N_ = self.plan_.N
        self.graph_, self.report_ = realize(self.plan_, self.seed)
        return self

    def sample(self, seed: int | None = None) -> SyntheticGraph:
        check_is_fitted(self, "plan_")
        return realize(self.plan_, self.seed if seed is None else seed)[0]

    def score(self, table=None, y=None) -> float:
        """Negative TV distance of the fitted graph's census to ``table``."""
        check_is_fitted(self, "graph_")
        table = self.table_ if table is None else check_table(table)
        rep = ball_census(self.graph_, self.radius, table=table, with_girth=False)
        return -float(rep.tv_distance)


class BallCensus(TransformerMixin, BaseEstimator):
    """Ball-frequency features of graphs at a fixed radius."""

    def __init__(self, radius: int = 1, d: int | None = None, max_core: int | None = DEFAULT_MAX_CORE, workers: int = 1):
        self.radius = radius
        self.d = d
        self.max_core = max_core
        self.workers = workers

    def _census(self, graphs: Sequence[Any]):
        if isinstance(graphs, SyntheticGraph) or not isinstance(graphs, Sequence):
            raise TypeError("expected a sequence of graphs")
        out = []
        for g in graphs:
            check_graph(g, self.d)
            out.append(ball_census(g, self.radius, self.d_, max_core=self.max_core,
                                   workers=self.workers, with_girth=False))
        return out

    def fit(self, graphs, y=None):
        self.d_ = self.d if self.d is not None else max(
            [max((len(nb) for nb in as_adjacency(g)), default=0) for g in graphs] + [1]
        )
        reports = self._census(graphs)
        self.balls_ = sorted({b for rep in reports for b in rep.counts})
        self.vocabulary_ = {b: i for i, b in enumerate(self.balls_)}
        return self

    def transform(self, graphs) -> np.ndarray:
        """Row ``i`` holds the ball frequencies of graph ``i``; unseen balls are dropped."""
        check_is_fitted(self, "balls_")
        reports = self._census(graphs)
        X = np.zeros((len(reports), len(self.balls_)))
        for i, rep in enumerate(reports):
            for b, c in rep.counts.items():
                j = self.vocabulary_.get(b)
                if j is not None:
                    X[i, j] = c / rep.total
        return X

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        check_is_fitted(self, "balls_")
        return np.array([b.token for b in self.balls_], dtype=object)
