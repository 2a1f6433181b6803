"""Naive reference implementations (oracles).

Everything in this module is deliberately dumb: isomorphism is an exhaustive
backtracking search over vertex bijections and star matchings, generation
enumerates every perfect matching of half-edge stubs, and forest enumeration
filters all edge subsets.  No canonical forms, no pruning beyond feasibility.
The production code in graphs.py / catalogs.py is cross-checked against these
in the test suite and in the acceptance criteria.
"""

from __future__ import annotations

import itertools

from .graphs import AbstractGraph, invariants, validate


def isomorphisms(g1, g2, first_only=False):
    """All bijections of elements commuting with sigma and t and preserving
    leaf labels.  Returns a list of permutation tuples p with p[x] in g2."""
    if g1.m != g2.m or len(g1.vertices) != len(g2.vertices):
        return []
    lab1, lab2 = dict(g1.leaf_items), dict(g2.leaf_items)

    def vclass(g, lab, v):
        return (g.valence[v], lab.get(v, 0))

    by1, by2 = {}, {}
    for v in g1.vertices:
        by1.setdefault(vclass(g1, lab1, v), []).append(v)
    for v in g2.vertices:
        by2.setdefault(vclass(g2, lab2, v), []).append(v)
    if sorted(by1) != sorted(by2):
        return []
    if any(len(by1[k]) != len(by2[k]) for k in by1):
        return []

    found = []
    keys = sorted(by1)

    def assign_stars(fmap, verts, i):
        if i == len(verts):
            found.append(tuple(fmap[x] for x in range(g1.m)))
            return not first_only
        v = verts[i]
        s1 = g1.star[v]
        s2 = g2.star[fmap[v]]
        for image in itertools.permutations(s2):
            ok = True
            trial = dict(zip(s1, image))
            for h, h2 in trial.items():
                p = g1.sigma[h]
                p2 = fmap.get(p, trial.get(p))
                if p2 is not None and p2 != g2.sigma[h2]:
                    ok = False
                    break
            if not ok:
                continue
            for h, h2 in trial.items():
                fmap[h] = h2
            if not assign_stars(fmap, verts, i + 1):
                return False
            for h in s1:
                del fmap[h]
        return True

    def assign_vertices(parts):
        for combo in itertools.product(*parts):
            fmap = {}
            for k, perm in zip(keys, combo):
                for v, w in zip(by1[k], perm):
                    fmap[v] = w
            verts = [v for k in keys for v in by1[k]]
            if not assign_stars(fmap, verts, 0):
                return

    assign_vertices([itertools.permutations(by2[k]) for k in keys])
    return found


def is_isomorphic(g1, g2):
    return bool(isomorphisms(g1, g2, first_only=True))


def automorphisms(g):
    return isomorphisms(g, g)


def _partitions(total, parts, least):
    # descending partitions of `total` into exactly `parts` parts >= least
    if parts == 0:
        if total == 0:
            yield ()
        return
    top = total - least * (parts - 1)
    for first in range(top, least - 1, -1):
        for rest in _partitions(total - first, parts - 1, least):
            if not rest or first >= rest[0]:
                yield (first,) + rest


def _matchings(items):
    if not items:
        yield ()
        return
    a = items[0]
    for i in range(1, len(items)):
        b = items[i]
        rest = items[1:i] + items[i + 1 :]
        for m in _matchings(rest):
            yield ((a, b),) + m


def _build(v_int, s, degrees):
    """Element layout shared by all candidates for one stratum: internal
    vertices 0..v_int-1 with stub counts `degrees`, then leaf vertices, then
    half-edge stubs in vertex blocks (internal blocks first, leaf stubs last).
    """
    n_vert = v_int + s
    owners = []
    for v, d in enumerate(degrees):
        owners += [v] * d
    for leaf in range(s):
        owners.append(v_int + leaf)
    m = n_vert + len(owners)
    t = list(range(n_vert)) + [o for o in owners]
    labels = {v_int + i: i + 1 for i in range(s)}
    return m, n_vert, t, labels


def generate_all(n, s):
    """Every isomorphism class of connected graphs with first Betti number n
    and s labelled leaves, by exhaustive matching enumeration and pairwise
    isomorphism dedup.  Exponential; intended for small (n, s) only."""
    if n < 0 or s < 0 or n + s < 1:
        raise ValueError("need n >= 0, s >= 0, n + s >= 1")
    classes = []
    hi = 2 * n + s - 2
    for v_int in range(0, hi + 1):
        E = v_int + s + n - 1
        if E < 1:
            continue
        stubs = 2 * E - s
        if v_int == 0:
            if stubs != 0:
                continue
            degree_seqs = [()]
        else:
            degree_seqs = list(_partitions(stubs, v_int, 3))
        for degrees in degree_seqs:
            m, n_vert, t, labels = _build(v_int, s, degrees)
            half = list(range(n_vert, m))
            for match in _matchings(half):
                sigma = list(range(m))
                for a, b in match:
                    sigma[a], sigma[b] = b, a
                g = AbstractGraph(m, sigma, t, labels)
                rep = validate(g)
                if not (rep.ok and rep.connected):
                    continue
                if invariants(g).betti != n:
                    continue
                if any(is_isomorphic(g, h) for h in classes):
                    continue
                classes.append(g)
    return classes


def forests(g):
    """All nonempty edge subsets spanning a disjoint union of trees avoiding
    labelled leaves, by filtering every subset."""
    labelled = {v for v, _ in g.leaf_items}
    ids = range(len(g.edges))
    out = []
    for k in range(1, len(g.edges) + 1):
        for sub in itertools.combinations(ids, k):
            if any(g.is_loop(e) for e in sub):
                continue
            touched = set()
            for e in sub:
                touched.update(g.edge_endpoints(e))
            if touched & labelled:
                continue
            # betti 0: edges = vertices - components, computed directly
            comp = {v: v for v in touched}

            def find(x):
                while comp[x] != x:
                    comp[x] = comp[comp[x]]
                    x = comp[x]
                return x

            acyclic = True
            for e in sub:
                a, b = g.edge_endpoints(e)
                ra, rb = find(a), find(b)
                if ra == rb:
                    acyclic = False
                    break
                comp[ra] = rb
            if acyclic:
                out.append(frozenset(sub))
    return out
