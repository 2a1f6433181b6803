"""Catalogs of connected graphs by first Betti number and leaf count.

:func:`enumerate_graphs` lists, up to isomorphism, all connected abstract
graphs with first Betti number ``n``, exactly ``s`` labelled leaves
(labels 1..s), and no internal vertex of valence below three.  Graphs are
generated by stub matching per internal-vertex degree partition, deduplicated
by canonical string, and returned sorted by that string, so the catalog order
is a pure function of (n, s).

Catalogs serialize to JSON lines (one header record, then one graph per line)
and can be cached on disk keyed by (n, s, format version).

:func:`enumerate_forests` and :func:`enumerate_forest_chains` list the
collapsible subgraphs of one graph: subforests avoiding loops and labelled
leaves, and strictly nested chains of those.
"""

from __future__ import annotations

import json
import os

from .graphs import AbstractGraph, canonical_form, canonical_graph, validate
from .morphisms import Forest, ForestChain

CATALOG_VERSION = 1


class Catalog:
    """An immutable, ordered list of canonical-form graphs for one (n, s)."""

    def __init__(self, n, s, graphs):
        self.n = int(n)
        self.s = int(s)
        self.graphs = tuple(graphs)
        self._index = {}
        for i, g in enumerate(self.graphs):
            key, _ = canonical_form(g)
            if key in self._index:
                raise ValueError("catalog contains duplicate classes")
            self._index[key] = i

    def __len__(self):
        return len(self.graphs)

    def __iter__(self):
        return iter(self.graphs)

    def __getitem__(self, i):
        return self.graphs[i]

    def index_of(self, g):
        """Catalog index of the class of g, or raise KeyError."""
        key, _ = canonical_form(g)
        return self._index[key]

    def index_of_key(self, key):
        return self._index[key]

    def __contains__(self, g):
        key, _ = canonical_form(g)
        return key in self._index

    def to_jsonl(self):
        lines = [
            json.dumps(
                {
                    "n": self.n,
                    "s": self.s,
                    "count": len(self.graphs),
                    "version": CATALOG_VERSION,
                },
                sort_keys=True,
            )
        ]
        for g in self.graphs:
            lines.append(json.dumps(g.to_json_dict(), sort_keys=True))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text):
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty catalog file")
        head = json.loads(lines[0])
        if head.get("version") != CATALOG_VERSION:
            raise ValueError(
                "catalog version %r, expected %d" % (head.get("version"), CATALOG_VERSION)
            )
        graphs = [AbstractGraph.from_json_dict(json.loads(ln)) for ln in lines[1:]]
        if len(graphs) != head.get("count"):
            raise ValueError(
                "catalog count %r does not match %d graphs" % (head.get("count"), len(graphs))
            )
        return cls(head["n"], head["s"], graphs)

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_jsonl(fh.read())


def cache_path(cache_dir, n, s):
    return os.path.join(cache_dir, "catalog_n%d_s%d_v%d.jsonl" % (n, s, CATALOG_VERSION))


def enumerate_graphs(n, s, cache_dir=None):
    """Catalog of all classes with first Betti number n and s labelled leaves.

    Raises ValueError unless n >= 0, s >= 0, n + s >= 1.  The result may be
    empty (e.g. n=1, s=0 admits no graph without valence-2 vertices).  When
    cache_dir is given, a previously saved catalog is reused and a fresh one
    is written back.
    """
    n, s = int(n), int(s)
    if n < 0 or s < 0 or n + s < 1:
        raise ValueError("need n >= 0, s >= 0 and n + s >= 1")

    if cache_dir is not None:
        path = cache_path(cache_dir, n, s)
        if os.path.exists(path):
            cat = Catalog.load(path)
            if cat.n == n and cat.s == s:
                return cat

    seen = {}
    for v_int in range(0 if (n, s) == (0, 2) else 1, max(2 * n + s - 2, 0) + 1):
        for g in _stratum(n, s, v_int):
            key, _ = canonical_form(g)
            if key not in seen:
                seen[key] = canonical_graph(g)
    cat = Catalog(n, s, [seen[k] for k in sorted(seen)])

    if cache_dir is not None:
        os.makedirs(cache_dir, exist_ok=True)
        cat.save(cache_path(cache_dir, n, s))
    return cat


def _stratum(n, s, v_int):
    """Connected graphs with v_int internal vertices, valences >= 3, betti n,
    s labelled leaves.  Yields raw (non-canonical) graphs, possibly with
    isomorphic repeats across degree partitions of equal multiset; repeats
    within one matching run are pruned by the per-vertex lowest-stub rule."""
    n_edges = v_int + s + n - 1
    if n_edges < 0:
        return
    internal_stubs = 2 * n_edges - s
    if internal_stubs < 0:
        return
    for degrees in _degree_partitions(internal_stubs, v_int):
        # element layout: internal vertices, leaf vertices, stubs by vertex
        first_stub = v_int + s
        vertex_of = []
        for v, d in enumerate(degrees):
            vertex_of.extend([v] * d)
        for i in range(s):
            vertex_of.append(v_int + i)
        n_stubs = len(vertex_of)
        if n_stubs != 2 * n_edges:
            continue
        is_leaf_stub = [vertex_of[x] >= v_int for x in range(n_stubs)]
        allow_leaf_leaf = v_int == 0
        seen_multisets = set()
        for matching in _matchings(vertex_of, is_leaf_stub, allow_leaf_leaf):
            # one matching per vertex-level edge multiset is enough: the rest
            # differ by within-vertex stub swaps, which are isomorphisms
            key = tuple(
                sorted(
                    (vertex_of[a], vertex_of[b])
                    if vertex_of[a] <= vertex_of[b]
                    else (vertex_of[b], vertex_of[a])
                    for a, b in matching
                )
            )
            if key in seen_multisets:
                continue
            seen_multisets.add(key)
            m = first_stub + n_stubs
            sigma = list(range(m))
            t = list(range(m))
            for a, b in matching:
                sigma[first_stub + a] = first_stub + b
                sigma[first_stub + b] = first_stub + a
            for x in range(n_stubs):
                t[first_stub + x] = vertex_of[x]
            labels = {v_int + i: i + 1 for i in range(s)}
            g = AbstractGraph(m, sigma, t, labels)
            rep = validate(g)
            if not rep.ok or not rep.connected:
                continue
            yield g


def _degree_partitions(total, parts):
    """Non-increasing partitions of `total` into exactly `parts` parts >= 3."""
    if parts == 0:
        if total == 0:
            yield ()
        return

    def rec(remaining, k, cap):
        if k == 0:
            if remaining == 0:
                yield ()
            return
        # largest next part: at most cap, at least 3, and must leave >= 3(k-1)
        hi = min(cap, remaining - 3 * (k - 1))
        for d in range(hi, 2, -1):
            for rest in rec(remaining - d, k - 1, d):
                yield (d,) + rest

    yield from rec(total, parts, total)


def _matchings(vertex_of, is_leaf_stub, allow_leaf_leaf):
    """Perfect matchings of the stubs, up to within-vertex stub symmetry.

    The lowest unmatched stub is always matched next, and its partner is
    restricted to the lowest unmatched stub of each vertex; stubs at one
    vertex are interchangeable, so every vertex-level multigraph still
    appears, with far fewer repeats than raw matchings (repeats that remain
    come from revisiting one multigraph through different edge orders and are
    removed downstream by canonical dedup).  Pairings of two leaf stubs are
    skipped unless allowed (they are only valid for the rank-0 two-leaf
    graph)."""
    n_stubs = len(vertex_of)
    matched = [False] * n_stubs
    pairs = []

    def rec():
        x = next((i for i in range(n_stubs) if not matched[i]), None)
        if x is None:
            yield list(pairs)
            return
        matched[x] = True
        seen_vertices = set()
        for y in range(x + 1, n_stubs):
            if matched[y]:
                continue
            v = vertex_of[y]
            if v in seen_vertices:
                continue
            seen_vertices.add(v)
            if is_leaf_stub[x] and is_leaf_stub[y] and not allow_leaf_leaf:
                continue
            matched[y] = True
            pairs.append((x, y))
            yield from rec()
            pairs.pop()
            matched[y] = False
        matched[x] = False

    yield from rec()


def collapsible_edges(g):
    """Edge ids usable in forests: non-loops with no labelled-leaf endpoint."""
    labelled = {v for v, _ in g.leaf_items}
    out = []
    for e in range(len(g.edges)):
        if g.is_loop(e):
            continue
        a, b = g.edge_endpoints(e)
        if a in labelled or b in labelled:
            continue
        out.append(e)
    return out


def enumerate_forests(g):
    """All nonempty forests of g, ordered lexicographically by edge id tuple."""
    cands = collapsible_edges(g)
    out = []

    def find(parent, a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def extend(chosen, parent, start):
        for i in range(start, len(cands)):
            e = cands[i]
            a, b = g.edge_endpoints(e)
            p = dict(parent)
            p.setdefault(a, a)
            p.setdefault(b, b)
            ra, rb = find(p, a), find(p, b)
            if ra == rb:
                continue
            p[ra] = rb
            chosen.append(e)
            out.append(tuple(chosen))
            extend(chosen, p, i + 1)
            chosen.pop()

    extend([], {}, 0)
    return [Forest(g, ids) for ids in out]


def enumerate_forest_chains(g, forests=None, max_length=None):
    """All strictly nested chains F1 < ... < Fk of nonempty forests of g.

    Returned as ForestChain objects ordered by (length, edge id tuples), so
    the output is deterministic.  `forests` may be passed to reuse an
    existing enumeration."""
    if forests is None:
        forests = enumerate_forests(g)
    sets = [f.edge_ids for f in forests]
    order = sorted(range(len(sets)), key=lambda i: (len(sets[i]), tuple(sorted(sets[i]))))
    supersets = {
        i: [j for j in order if len(sets[j]) > len(sets[i]) and sets[i] < sets[j]]
        for i in order
    }

    chains = []

    def extend(chain):
        if len(chain) >= 1:
            chains.append(tuple(chain))
        if max_length is not None and len(chain) >= max_length:
            return
        for j in supersets[chain[-1]]:
            chain.append(j)
            extend(chain)
            chain.pop()

    for i in order:
        extend([i])

    chains.sort(key=lambda ch: (len(ch), tuple(tuple(sorted(sets[i])) for i in ch)))
    return [ForestChain(g, [forests[i] for i in ch]) for ch in chains]
