from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from locallimit.balls import involute
from locallimit.exceptions import ValidationRequired
from locallimit.measures import marginals_atom, marginals_regular, marginals_ugw, named_tree
from locallimit.rationalizer import HGraph, WeightSystem, build_H, build_labeled_H, choose_N, rationalize, rref

from conftest import HALF, UGW13
from oracles import minimal_even_N

F = Fraction


def hgraph(weights, mult, balls, edges):
    return HGraph(
        d=3, r=0, keys=list(range(len(weights))), balls=balls, multiplicity=mult,
        links=[0] * len(weights), weight=[F(w) for w in weights], edges={k: F(v) for k, v in edges.items()},
    )


def system(H, w_edge=None):
    return WeightSystem(H, list(H.weight), dict(w_edge or H.edges), dict(H.isolated), F(0), 1)


def test_choose_N_worked_examples():
    # w(A) = 1/3 with l_A = 3, edge weights 1/6
    H = hgraph([F(1, 3), F(1, 6), F(1, 6)], [3, 1, 1], ["M", "P", "Q"],
               {(0, 1): F(1, 6), (1, 0): F(1, 6), (0, 2): F(1, 6), (2, 0): F(1, 6)})
    assert choose_N(system(H)) == 18
    # integer weights, multiplicity 1
    H = hgraph([1, 1], [1, 1], ["M", "P"], {(0, 1): 1, (1, 0): 1})
    assert choose_N(system(H)) == 2
    # regular(3): w(A) = 2 with l_A = 3, w_edge = 2
    H = hgraph([2, 2], [3, 3], ["M", "P"], {(0, 1): 2, (1, 0): 2})
    assert choose_N(system(H)) == 6


def test_choose_N_makes_loop_cells_even():
    H = hgraph([F(1, 2)], [1], ["M"], {(0, 0): F(1, 2)})
    assert choose_N(system(H)) == 4  # N = 2 would leave a loop cell of odd size 1


def test_nearest_rounding_example():
    x = F(333333, 10**6)
    H = hgraph([x], [1], ["M"], {(0, 0): x})
    ws = rationalize(H, 100)
    assert ws.w_edge[0, 0] == F(1, 3) and ws.w == [F(1, 3)]
    assert ws.delta <= F(1, 10**6)


def test_exact_weights_returned_unchanged():
    H = hgraph([F(1, 3)], [1], ["M"], {(0, 0): F(1, 3)})
    ws = rationalize(H)
    assert ws.delta == 0 and ws.w_edge == H.edges


def test_rounding_restores_orientation_consistency():
    # two orientations of one ball with l = 1 and l = 2 whose exact weights disagree slightly
    H = hgraph([F(1001, 3000), F(2, 3)], [1, 2], ["M", "M"], {(0, 1): F(1001, 3000), (1, 0): F(1001, 3000), (1, 1): F(1, 3)})
    ws = rationalize(H, 1000)
    assert not ws.problems()
    assert ws.w[0] / 1 == ws.w[1] / 2
    assert ws.delta < F(1, 100)


def test_grid_rounding_hits_the_grid(ugw13_depth4):
    H = build_H(ugw13_depth4, 2)
    ws = rationalize(H, 1024, rounding="grid")
    assert not ws.problems() and ws.delta > 0
    assert ws.delta <= F(1, 100)


GENERATORS = [
    ("regular1", marginals_regular(1, 4)),
    ("regular2", marginals_regular(2, 4)),
    ("regular3", marginals_regular(3, 4)),
    ("ugw13", marginals_ugw(UGW13, 3, 4)),
    ("ugw123", marginals_ugw({1: F(1, 3), 2: F(1, 3), 3: F(1, 3)}, 3, 4)),
    ("ugw2", marginals_ugw({1: F(1, 4), 2: F(3, 4)}, 2, 4)),
    ("K2", marginals_atom(*named_tree("K2"), 4)),
    ("path3", marginals_atom(*named_tree("path3"), 4)),
    ("star3", marginals_atom(*named_tree("star3"), 4)),
    ("spider", marginals_atom(*named_tree("0-1,1-2,1-3,3-4,4-5"), 4)),
]


@pytest.mark.parametrize("name,table", GENERATORS, ids=[g[0] for g in GENERATORS])
@pytest.mark.parametrize("r", [0, 1, 2])
def test_generator_weights_are_exact(name, table, r):
    H = build_H(table, r)
    for (i, j) in H.edges:
        assert H.links[i] == involute(H.links[j])
    ws = rationalize(H)
    assert ws.delta == 0
    assert not ws.problems()
    N = choose_N(ws)
    assert N % 2 == 0


@pytest.mark.parametrize("table,r", [(marginals_atom(*named_tree("path3"), 3), 1), (marginals_regular(3, 3), 1),
                                     (marginals_atom(*named_tree("star3"), 4), 2)])
def test_choose_N_minimal_by_scan(table, r):
    ws = rationalize(build_H(table, r))
    H = ws.H
    ratios = [w / H.multiplicity[i] for i, w in enumerate(ws.w)]
    plain = [m for (i, j), m in ws.w_edge.items() if i != j]
    loops = [m for (i, j), m in ws.w_edge.items() if i == j]
    assert choose_N(ws) == minimal_even_N(ratios, plain, loops, ws.w_isolated.values())


def test_isolated_mass_is_kept():
    from locallimit.measures import mixture

    t = mixture([(marginals_atom(*named_tree("K1"), 3, d=2), HALF), (marginals_regular(2, 3), HALF)])
    H = build_H(t, 1)
    assert sum(H.isolated.values()) == HALF
    assert choose_N(rationalize(H)) == 2


def test_invalid_table_refused(endpoint_path3):
    with pytest.raises(ValidationRequired):
        build_H(endpoint_path3, 1)


def test_labeled_h_graph_is_balanced(path3_depth3):
    H = build_labeled_H(path3_depth3, 1, 2)
    ws = rationalize(H)
    assert ws.delta == 0 and not ws.problems()
    assert H.labels == 2


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.lists(st.integers(-3, 3), min_size=5, max_size=5), min_size=1, max_size=4),
    st.lists(st.integers(-5, 5), min_size=5, max_size=5),
)
def test_rref_parametrizes_the_null_space(rows, free_values):
    A = [[F(x) for x in row] for row in rows]
    R, pivots = rref(A, 5)
    for k, pc in enumerate(pivots):
        assert R[k][pc] == 1
        assert all(R[j][pc] == 0 for j in range(len(R)) if j != k)
    free = [c for c in range(5) if c not in pivots]
    x = [F(0)] * 5
    for c in free:
        x[c] = F(free_values[c])
    for row, pc in zip(R, pivots):
        x[pc] = -sum(row[c] * x[c] for c in free)
    for row in A:
        assert sum(a * b for a, b in zip(row, x)) == 0
