"""Graph catalogs: frozen class counts, brute-force agreement, caching,
and the forest/chain enumerations used to build cell complexes."""

import os

import pytest

from graphspine import bruteforce
from graphspine.catalogs import (
    Catalog,
    cache_path,
    collapsible_edges,
    enumerate_forest_chains,
    enumerate_forests,
    enumerate_graphs,
)
from graphspine.graphs import canonical_form, canonical_graph, invariants, validate

SLOW = os.environ.get("GRAPHSPINE_SLOW")

# class counts pinned from two independent generators agreeing
KNOWN_COUNTS = {
    (0, 2): 1,
    (0, 3): 1,
    (1, 0): 0,
    (1, 1): 1,
    (1, 2): 3,
    (2, 0): 3,
    (2, 1): 7,
    (2, 2): 35,
    (3, 0): 15,
    (3, 1): 64,
}


@pytest.mark.parametrize("n,s", sorted(KNOWN_COUNTS))
def test_frozen_class_counts(n, s):
    assert len(enumerate_graphs(n, s)) == KNOWN_COUNTS[(n, s)]


@pytest.mark.skipif(not SLOW, reason="set GRAPHSPINE_SLOW=1 to run")
def test_frozen_class_count_rank_four():
    assert len(enumerate_graphs(4, 0)) == 111


def test_enumerate_rejects_bad_ranges():
    for n, s in [(-1, 2), (0, -1), (0, 0)]:
        with pytest.raises(ValueError):
            enumerate_graphs(n, s)


@pytest.mark.parametrize("n,s", [(0, 2), (0, 3), (1, 1), (2, 0), (1, 2), (2, 1)])
def test_matches_brute_force_class_by_class(n, s):
    cat = enumerate_graphs(n, s)
    brute = bruteforce.generate_all(n, s)
    assert len(cat) == len(brute)
    used = set()
    for g in cat:
        hits = [i for i, h in enumerate(brute)
                if i not in used and bruteforce.is_isomorphic(g, h)]
        assert len(hits) == 1, "class of %r not matched exactly once" % (g,)
        used.add(hits[0])


@pytest.mark.skipif(not SLOW, reason="set GRAPHSPINE_SLOW=1 to run")
def test_matches_brute_force_rank_three():
    cat = enumerate_graphs(3, 0)
    brute = bruteforce.generate_all(3, 0)
    assert len(cat) == len(brute) == 15
    for g in cat:
        assert sum(bruteforce.is_isomorphic(g, h) for h in brute) == 1


@pytest.mark.parametrize("n,s", [(2, 0), (2, 1), (1, 2), (3, 0)])
def test_catalog_entries_are_valid_and_canonical(n, s):
    cat = enumerate_graphs(n, s)
    keys = []
    for g in cat:
        rep = validate(g)
        assert rep.ok and rep.connected, rep.all_messages()
        inv = invariants(g)
        assert inv.betti == n and inv.leaf_count == s
        assert all(g.valence[v] >= 3 for v in g.vertices
                   if v not in dict(g.leaf_items))
        assert canonical_graph(g) == g
        keys.append(canonical_form(g)[0])
    assert keys == sorted(keys)
    assert len(set(keys)) == len(keys)


def test_rank_two_catalog_contains_the_three_shapes(rose2, theta, dumbbell):
    cat = enumerate_graphs(2, 0)
    assert rose2 in cat and theta in cat and dumbbell in cat
    assert sorted(len(g.vertices) for g in cat) == [1, 2, 2]


def test_index_of_is_relabelling_invariant(theta):
    cat = enumerate_graphs(2, 0)
    i = cat.index_of(theta)
    shuffled = theta.relabel([1, 0, 4, 5, 2, 3, 7, 6])
    assert cat.index_of(shuffled) == i
    assert cat.index_of_key(canonical_form(shuffled)[0]) == i


def test_index_of_raises_for_missing_class(wedge_loop_leaf):
    cat = enumerate_graphs(2, 0)
    assert wedge_loop_leaf not in cat
    with pytest.raises(KeyError):
        cat.index_of(wedge_loop_leaf)


def test_enumeration_is_deterministic():
    a = enumerate_graphs(2, 1).to_jsonl()
    b = enumerate_graphs(2, 1).to_jsonl()
    assert a == b


def test_jsonl_round_trip():
    cat = enumerate_graphs(2, 1)
    again = Catalog.from_jsonl(cat.to_jsonl())
    assert (again.n, again.s) == (2, 1)
    assert list(again) == list(cat)


def test_jsonl_rejects_corruption():
    cat = enumerate_graphs(1, 1)
    text = cat.to_jsonl()
    with pytest.raises(ValueError, match="version"):
        Catalog.from_jsonl(text.replace('"version": 1', '"version": 99'))
    head, rest = text.split("\n", 1)
    with pytest.raises(ValueError, match="count"):
        Catalog.from_jsonl(head.replace('"count": 1', '"count": 2') + "\n" + rest)
    with pytest.raises(ValueError, match="empty"):
        Catalog.from_jsonl("")


def test_cache_round_trip(tmp_path):
    cache = str(tmp_path)
    first = enumerate_graphs(2, 0, cache_dir=cache)
    assert os.path.exists(cache_path(cache, 2, 0))
    second = enumerate_graphs(2, 0, cache_dir=cache)
    assert list(first) == list(second)
    loaded = Catalog.load(cache_path(cache, 2, 0))
    assert list(loaded) == list(first)


def test_collapsible_edges(dumbbell, theta, wedge_loop_leaf):
    assert collapsible_edges(dumbbell) == [2]
    assert collapsible_edges(theta) == [0, 1, 2]
    assert collapsible_edges(wedge_loop_leaf) == []


def test_forest_counts_on_fixtures(dumbbell, theta, wedge_loop_leaf):
    assert len(enumerate_forests(dumbbell)) == 1
    # any single theta edge works, any pair closes a cycle
    assert len(enumerate_forests(theta)) == 3
    assert enumerate_forests(wedge_loop_leaf) == []


@pytest.mark.parametrize("n,s", [(2, 0), (2, 1), (1, 2)])
def test_forests_match_brute_force(n, s):
    for g in enumerate_graphs(n, s):
        fast = {f.edge_ids for f in enumerate_forests(g)}
        slow = set(bruteforce.forests(g))
        assert fast == slow


def test_forest_enumeration_is_ordered(theta):
    ids = [tuple(sorted(f.edge_ids)) for f in enumerate_forests(theta)]
    assert ids == sorted(ids)


def test_chain_counts_on_fixtures(dumbbell, theta):
    assert len(enumerate_forest_chains(dumbbell)) == 1
    # three incomparable singleton forests: no chain of length two
    chains = enumerate_forest_chains(theta)
    assert len(chains) == 3
    assert all(len(c) == 1 for c in chains)


def test_chain_counts_with_nesting():
    from conftest import graph_from_edges

    g = graph_from_edges(3, [(0, 1), (1, 2), (0, 0), (1, 1), (2, 2)])
    forests = enumerate_forests(g)
    assert {tuple(sorted(f.edge_ids)) for f in forests} == {(0,), (1,), (0, 1)}
    chains = enumerate_forest_chains(g, forests=forests)
    # three singletons plus {0}<{0,1} and {1}<{0,1}
    assert len(chains) == 5
    assert sorted(len(c) for c in chains) == [1, 1, 1, 2, 2]
    capped = enumerate_forest_chains(g, forests=forests, max_length=1)
    assert len(capped) == 3


def test_chain_enumeration_matches_brute_force():
    cat = enumerate_graphs(2, 1)
    for g in cat:
        forests = enumerate_forests(g)
        sets = [frozenset(f.edge_ids) for f in forests]
        brute = 0
        import itertools

        for k in range(1, len(sets) + 1):
            for combo in itertools.permutations(range(len(sets)), k):
                if all(sets[a] < sets[b] for a, b in zip(combo, combo[1:])):
                    brute += 1
        assert len(enumerate_forest_chains(g, forests=forests)) == brute
