from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from locallimit.balls import (
    BallCode,
    RootedGraph,
    automorphism_count,
    canonicalize,
    count_tree_balls,
    directed_automorphism_count,
    edge_ball_within,
    enumerate_tree_balls,
    extract_ball,
    involute,
    orientations,
    point_ball,
    s_view,
    t_view,
    to_rooted_graph,
    truncate,
    truncate_vec,
    tree_ball,
    vecball,
)
from locallimit.exceptions import BadRadius, BallTooLarge, DegreeExceeded, ParseError, RadiusExceeded

from oracles import relabel, root_edge_orbits, rooted_automorphisms, rooted_isomorphic


def cycle(n):
    return [[(i - 1) % n, (i + 1) % n] for i in range(n)]


def rg(adj, root=0):
    return RootedGraph(tuple(tuple(a) for a in adj), root)


@pytest.mark.parametrize(
    "d,r,expected",
    [(3, 1, 4), (2, 2, 6), (1, 5, 2), (3, 2, 20), (3, 3, 286), (2, 0, 1)],
)
def test_tree_ball_counts(d, r, expected):
    assert count_tree_balls(d, r) == expected
    assert len(enumerate_tree_balls(d, r)) == expected


def test_enumeration_has_no_duplicates_up_to_isomorphism():
    balls = enumerate_tree_balls(3, 2)
    graphs = [to_rooted_graph(b) for b in balls]
    for i in range(len(graphs)):
        for j in range(i + 1, len(graphs)):
            if graphs[i].n == graphs[j].n:
                assert not rooted_isomorphic(graphs[i].adj, 0, graphs[j].adj, 0)


def test_cycle_roots_share_code():
    c4 = cycle(4)
    a = canonicalize(rg(c4, 0), 2, 2)
    b = canonicalize(rg(c4, 3), 2, 2)
    assert a == b and not a.is_tree


def test_radius_and_degree_checks():
    path = rg([[1], [0, 2], [1]], 0)
    with pytest.raises(RadiusExceeded):
        canonicalize(path, 2, 1)
    star = rg([[1, 2, 3], [0], [0], [0]])
    with pytest.raises(DegreeExceeded):
        canonicalize(star, 2, 1)


def test_ball_too_large():
    c8 = cycle(8)
    with pytest.raises(BallTooLarge):
        canonicalize(rg(c8), 2, 4, max_core=6)
    assert not canonicalize(rg(c8), 2, 4, max_core=8).is_tree


def test_token_round_trip_general_and_tree():
    for ball in [canonicalize(rg(cycle(5)), 2, 2), tree_ball((2, 0, 1, 0), 2, 2), point_ball(3)]:
        assert BallCode.from_token(ball.token) == ball


@pytest.mark.parametrize("token", ["", "x.y", "2.1.1", "2.1.1.5.0", "2.1.2.1.0", "2.1.1.1.1.1.0"])
def test_bad_tokens(token):
    with pytest.raises(ParseError):
        BallCode.from_token(token)


def test_decode_then_encode_is_identity():
    for ball in enumerate_tree_balls(3, 2) + [canonicalize(rg(cycle(6)), 2, 3)]:
        g = to_rooted_graph(ball)
        assert canonicalize(g, ball.d, ball.radius) == ball


def test_truncate_matches_extraction():
    for ball in enumerate_tree_balls(2, 3):
        g = to_rooted_graph(ball)
        for r in range(4):
            direct = canonicalize(extract_ball(g.adj, g.root, r), 2, r)
            assert truncate(ball, r) == direct


def test_truncate_general_ball():
    ball = canonicalize(rg(cycle(6)), 2, 3)
    assert truncate(ball, 2) == tree_ball((2, 1, 0, 1, 0), 2, 2)
    with pytest.raises(BadRadius):
        truncate(ball, 4)


def test_automorphism_count_matches_brute_force():
    for ball in enumerate_tree_balls(3, 2):
        g = to_rooted_graph(ball)
        assert automorphism_count(ball.code) == len(rooted_automorphisms(g.adj, g.root))


def test_orientation_multiplicities_match_orbits():
    for d in (1, 2, 3):
        for r in (1, 2):
            for ball in enumerate_tree_balls(d, r):
                g = to_rooted_graph(ball)
                mine = sorted(vb.multiplicity for vb in orientations(ball))
                assert mine == root_edge_orbits(g.adj, g.root)


def test_directed_automorphisms_fix_the_edge():
    for ball in enumerate_tree_balls(3, 2):
        g = to_rooted_graph(ball)
        autos = rooted_automorphisms(g.adj, g.root)
        for vb in orientations(ball):
            # stabilizer of one edge in the orbit = |Aut| / orbit size
            assert directed_automorphism_count(vb) * vb.multiplicity == len(autos)


def test_edge_ball_views():
    ball = tree_ball((3, 0, 1, 0, 2, 0, 0), 3, 2)
    for vb in orientations(ball):
        phi = edge_ball_within(vb)
        assert phi.radius == 1
        assert involute(involute(phi)) == phi
        assert t_view(involute(phi)) == s_view(phi)
        assert s_view(phi) == truncate_vec(vb, 1)


def test_radius_zero_views_rejected():
    phi = edge_ball_within(orientations(tree_ball((1, 0), 1, 1))[0])
    assert phi.radius == 0
    with pytest.raises(BadRadius):
        s_view(phi)


def test_vecball_assembles_canonical_child_order():
    vb = vecball(3, 1, (2, 0, 0), (0,))
    assert vb.ball.code == (3, 0, 0, 0)
    assert vb.multiplicity == 3


def test_extract_ball_is_induced():
    k4 = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]]
    g = extract_ball(k4, 2, 1)
    assert g.n == 4 and sum(map(len, g.adj)) == 12


# random trees as Pruefer sequences
@st.composite
def trees(draw, max_n=9):
    n = draw(st.integers(2, max_n))
    seq = draw(st.lists(st.integers(0, n - 1), min_size=n - 2, max_size=n - 2))
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = min(i for i in range(n) if degree[i] == 1)
        edges.append((leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = [i for i in range(n) if degree[i] == 1]
    edges.append((u, v))
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    root = draw(st.integers(0, n - 1))
    return adj, root


@settings(max_examples=150, deadline=None)
@given(trees(), st.integers(0, 2**32 - 1))
def test_tree_code_invariant_under_relabeling(tree, seed):
    adj, root = tree
    adj2, root2 = relabel(adj, root, np.random.default_rng(seed))
    d = max(map(len, adj))
    a = canonicalize(rg(adj, root), d, len(adj))
    b = canonicalize(rg(adj2, root2), d, len(adj))
    assert a == b and a.is_tree and a.num_vertices == len(adj)


@st.composite
def connected_graphs(draw, max_n=7):
    n = draw(st.integers(1, max_n))
    adj = [set() for _ in range(n)]
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        adj[u].add(v)
        adj[v].add(u)
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=6))
    for u, v in extra:
        if u != v:
            adj[u].add(v)
            adj[v].add(u)
    return [sorted(a) for a in adj], draw(st.integers(0, n - 1))


@settings(max_examples=150, deadline=None)
@given(connected_graphs(), st.integers(0, 2**32 - 1))
def test_graph_code_invariant_and_decodable(graph, seed):
    adj, root = graph
    adj2, root2 = relabel(adj, root, np.random.default_rng(seed))
    d = max(1, max(map(len, adj)))
    a = canonicalize(rg(adj, root), d, len(adj))
    assert a == canonicalize(rg(adj2, root2), d, len(adj))
    back = to_rooted_graph(a)
    assert rooted_isomorphic(back.adj, back.root, adj, root)
