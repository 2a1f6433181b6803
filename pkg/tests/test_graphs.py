"""Core half-edge graph structure: involution/retraction bookkeeping,
validation, canonical forms, automorphisms."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from graphspine.graphs import (
    AbstractGraph,
    automorphism_group,
    canonical_form,
    canonical_graph,
    edge_permutation,
    invariants,
    is_isomorphic,
    subgraph_is_tree,
    validate,
)

from conftest import graph_from_edges


def test_rose_structure(rose2):
    assert rose2.vertices == (0,)
    assert len(rose2.edges) == 2
    assert rose2.valence[0] == 4
    assert invariants(rose2).betti == 2


def test_theta_structure(theta):
    assert theta.vertices == (0, 1)
    assert [theta.valence[v] for v in theta.vertices] == [3, 3]
    inv = invariants(theta)
    assert (inv.num_edges, inv.betti, inv.num_components) == (3, 2, 1)


def test_edges_are_sorted_pairs(dumbbell):
    for a, b in dumbbell.edges:
        assert a < b
        assert dumbbell.sigma[a] == b
    assert list(dumbbell.edges) == sorted(dumbbell.edges)


def test_star_and_valence_consistency(dumbbell):
    total = sum(len(dumbbell.star[v]) for v in dumbbell.vertices)
    assert total == 2 * len(dumbbell.edges)
    for v in dumbbell.vertices:
        assert dumbbell.valence[v] == len(dumbbell.star[v])


def test_validate_reports_non_involution():
    g = AbstractGraph(3, [1, 2, 0], [0, 0, 0])
    rep = validate(g)
    assert not rep.ok
    assert any("involution" in msg or "permutation" in msg
               for msg in rep.structural_errors)


def test_validate_reports_bad_retraction():
    # t sends a half-edge to another half-edge
    g = AbstractGraph(4, [0, 1, 3, 2], [0, 1, 1, 2])
    rep = validate(g)
    assert not rep.ok
    assert rep.structural_errors


def test_validate_flags_valence_two():
    g = graph_from_edges(3, [(0, 1), (1, 2)], {0: 1, 2: 2})
    rep = validate(g)
    assert not rep.ok
    assert any("valence 2" in msg for msg in rep.violations)


def test_validate_flags_unlabelled_leaf():
    g = graph_from_edges(2, [(0, 1), (0, 0)])
    rep = validate(g)
    assert not rep.ok
    assert any("no leaf label" in msg for msg in rep.violations)


def test_validate_flags_duplicate_labels():
    g = graph_from_edges(3, [(0, 1), (0, 2), (0, 0)], {1: 1, 2: 1})
    rep = validate(g)
    assert not rep.ok
    assert any("exhaust" in msg for msg in rep.violations)


def test_validate_accepts_catalog_shapes(rose2, theta, dumbbell, wedge_loop_leaf):
    for g in (rose2, theta, dumbbell, wedge_loop_leaf):
        rep = validate(g)
        assert rep.ok and rep.connected, rep.all_messages()


def test_known_automorphism_orders(rose2, theta, dumbbell, wedge_loop_leaf):
    # each loop can flip (2*2) and the loops can swap (2): 8 total
    assert len(automorphism_group(rose2)) == 8
    # S3 on the edges times the vertex swap
    assert len(automorphism_group(theta)) == 12
    assert len(automorphism_group(dumbbell)) == 8
    assert len(automorphism_group(wedge_loop_leaf)) == 2


def test_automorphisms_fix_leaf_labels(wedge_loop_leaf):
    for perm in automorphism_group(wedge_loop_leaf):
        for v, lab in wedge_loop_leaf.leaf_items:
            assert perm[v] == v, "labelled leaf moved by an automorphism"


def test_automorphism_group_closure(theta):
    auts = {tuple(p) for p in automorphism_group(theta)}
    for p in auts:
        for q in auts:
            assert tuple(p[q[x]] for x in range(theta.m)) in auts


def test_edge_permutation_is_permutation(dumbbell):
    for p in automorphism_group(dumbbell):
        ep = edge_permutation(dumbbell, p)
        assert sorted(ep) == list(range(len(dumbbell.edges)))


@given(seed=st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_canonical_form_is_relabelling_invariant(seed):
    rng = random.Random(seed)
    graphs = [
        graph_from_edges(1, [(0, 0), (0, 0)]),
        graph_from_edges(2, [(0, 1), (0, 1), (0, 1)]),
        graph_from_edges(2, [(0, 0), (1, 1), (0, 1)]),
        graph_from_edges(2, [(0, 0), (0, 1)], {1: 1}),
        graph_from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
    ]
    g = graphs[rng.randrange(len(graphs))]
    perm = list(range(g.m))
    rng.shuffle(perm)
    h = g.relabel(perm)
    assert canonical_form(g)[0] == canonical_form(h)[0]
    assert is_isomorphic(g, h)


def test_canonical_graph_idempotent(theta, dumbbell):
    for g in (theta, dumbbell):
        cg = canonical_graph(g)
        assert canonical_form(cg)[0] == canonical_form(g)[0]
        assert canonical_graph(cg) == cg


def test_canonical_separates_known_pairs(rose2, theta, dumbbell):
    keys = {canonical_form(g)[0] for g in (rose2, theta, dumbbell)}
    assert len(keys) == 3


def test_labels_affect_canonical_form():
    g1 = graph_from_edges(3, [(0, 0), (0, 1), (0, 2)], {1: 1, 2: 2})
    g2 = graph_from_edges(3, [(0, 0), (0, 1), (0, 2)], {1: 2, 2: 1})
    # swapping the two leaf labels is realized by an isomorphism here
    assert is_isomorphic(g1, g2)
    g3 = graph_from_edges(4, [(0, 1), (1, 2), (0, 0), (0, 3)], {2: 1, 3: 2})
    g4 = graph_from_edges(4, [(0, 1), (1, 2), (0, 0), (0, 3)], {2: 2, 3: 1})
    # here label 1 sits at distance 2 from the loop in g3 but distance 1 in g4
    assert not is_isomorphic(g3, g4)
    assert canonical_form(g3)[0] != canonical_form(g4)[0]


def test_subgraph_is_tree_cases(dumbbell, theta):
    # bridge of the dumbbell: a tree; a loop: never
    assert subgraph_is_tree(dumbbell, [2])
    assert not subgraph_is_tree(dumbbell, [0])
    # two parallel edges of theta form a cycle
    assert subgraph_is_tree(theta, [0])
    assert not subgraph_is_tree(theta, [0, 1])
    assert not subgraph_is_tree(theta, [])


def test_sum_of_valences_counts_half_edges(rose2, theta, dumbbell, wedge_loop_leaf):
    for g in (rose2, theta, dumbbell, wedge_loop_leaf):
        assert sum(g.valence[v] for v in g.vertices) == len(g.half_edges)
        assert len(g.half_edges) == 2 * len(g.edges)


def test_json_round_trip(dumbbell, wedge_loop_leaf):
    for g in (dumbbell, wedge_loop_leaf):
        assert AbstractGraph.from_json_dict(g.to_json_dict()) == g
