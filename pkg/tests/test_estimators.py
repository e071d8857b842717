from __future__ import annotations

from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from locallimit.estimators import BallCensus, LocalLimitSynthesizer, check_graph, check_table
from locallimit.measures import marginals_regular, save_table


def test_synthesizer_params_round_trip():
    est = LocalLimitSynthesizer(radius=2, epsilon="1/10", seed=4)
    params = est.get_params()
    assert params["radius"] == 2 and params["epsilon"] == "1/10"
    again = clone(est)
    assert again.get_params() == params
    est.set_params(mode="faithful")
    assert est.mode == "faithful"


def test_fit_sets_learned_attributes(regular2_depth3):
    est = LocalLimitSynthesizer(radius=1, epsilon=0.05).fit(regular2_depth3)
    assert (est.graph_.degrees() == 2).all()
    assert est.report_.delta == 0 and est.N_ == est.report_.N
    assert est.score() >= -0.05
    other = est.sample(seed=123)
    assert other.n == est.graph_.n


def test_fit_accepts_paths(tmp_path, regular2_depth3):
    path = tmp_path / "t.json"
    save_table(regular2_depth3, path)
    est = LocalLimitSynthesizer(radius=1).fit(str(path))
    assert est.table_ == regular2_depth3


def test_fit_validates_hyperparameters(regular2_depth3):
    with pytest.raises(ValueError):
        LocalLimitSynthesizer(epsilon=1.5).fit(regular2_depth3)
    with pytest.raises(ValueError):
        LocalLimitSynthesizer(mode="magic").fit(regular2_depth3)
    with pytest.raises(TypeError):
        LocalLimitSynthesizer().fit([[0.5, 0.5]])


def test_unfitted_errors():
    with pytest.raises(NotFittedError):
        LocalLimitSynthesizer().sample()
    with pytest.raises(NotFittedError):
        BallCensus().transform([nx.cycle_graph(5)])


def test_ball_census_features():
    graphs = [nx.cycle_graph(6), nx.path_graph(4)]
    bc = BallCensus(radius=1, d=2)
    X = bc.fit_transform(graphs)
    assert X.shape == (2, len(bc.balls_))
    np.testing.assert_allclose(X.sum(axis=1), 1.0)
    names = bc.get_feature_names_out()
    assert len(names) == X.shape[1] and all(isinstance(n, str) for n in names)
    # unseen classes are dropped, so rows can sum below one
    Y = bc.transform([nx.star_graph(2), nx.complete_graph(3)])
    assert Y[1].sum() == 0


def test_ball_census_in_pipeline(regular2_depth3):
    est = LocalLimitSynthesizer(radius=1).fit(regular2_depth3)
    X = BallCensus(radius=1, d=2).fit_transform([est.graph_, est.sample(seed=2)])
    assert X.shape[0] == 2 and X.max() > 0.99


def test_check_graph():
    assert check_graph(nx.cycle_graph(4), 2) == [[1, 3], [0, 2], [1, 3], [0, 2]]
    with pytest.raises(ValueError):
        check_graph(nx.star_graph(3), 2)
    with pytest.raises(ValueError):
        check_graph([[1], []])
    with pytest.raises(ValueError):
        check_graph([[0]])


def test_check_table(tmp_path):
    t = marginals_regular(2, 2)
    assert check_table(t) is t
    with pytest.raises(TypeError):
        check_table(Fraction(1))
