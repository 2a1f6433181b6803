"""Cellular maps, graph epimorphisms, forests, and forest collapses.

A cellular map between abstract graphs is a total map of elements commuting
with sigma and t.  It is a graph epimorphism when every half-edge of the
codomain has exactly one preimage (a half-edge), every vertex preimage is a
tree, no labelled leaf sits inside a collapsed tree (a leaf's preimage is just
the corresponding leaf), and leaf labels are preserved.  Equivalently:
epimorphisms are exactly composites of isomorphisms with collapses of single
non-loop, non-leaf edges; :func:`factor_as_collapses` produces such a
factorization and :func:`collapse_forest` performs the all-at-once quotient by
a forest.
"""

from __future__ import annotations

from .graphs import AbstractGraph

EPI_OK = "ok"
EPI_NOT_CELLULAR = "not_cellular"
EPI_HALF_EDGE_PREIMAGE = "half_edge_preimage"
EPI_VERTEX_PREIMAGE_NOT_TREE = "vertex_preimage_not_tree"
EPI_LEAF_VIOLATION = "leaf_violation"


class CellularMap:
    """Total element map f: domain -> codomain with f(sigma x) = sigma f(x)
    and f(t x) = t f(x).  Commutation is enforced at construction."""

    def __init__(self, domain, codomain, f):
        f = tuple(int(x) for x in f)
        if len(f) != domain.m:
            raise ValueError("f must be defined on every element of the domain")
        if any(not (0 <= y < codomain.m) for y in f):
            raise ValueError("f lands outside the codomain")
        for x in range(domain.m):
            if f[domain.sigma[x]] != codomain.sigma[f[x]]:
                raise ValueError("f does not commute with sigma at %d" % x)
            if f[domain.t[x]] != codomain.t[f[x]]:
                raise ValueError("f does not commute with t at %d" % x)
        self.domain = domain
        self.codomain = codomain
        self.f = f

    def __call__(self, x):
        return self.f[x]

    def __eq__(self, other):
        return (
            isinstance(other, CellularMap)
            and self.domain == other.domain
            and self.codomain == other.codomain
            and self.f == other.f
        )

    def __hash__(self):
        return hash((self.domain, self.codomain, self.f))

    def __repr__(self):
        return "CellularMap(%r -> %r)" % (self.domain, self.codomain)

    def is_identity(self):
        return self.domain == self.codomain and self.f == tuple(range(self.domain.m))

    def is_isomorphism(self):
        return self.domain.m == self.codomain.m and sorted(self.f) == list(
            range(self.codomain.m)
        )

    def to_json_dict(self):
        return {
            "domain": self.domain.to_json_dict(),
            "codomain": self.codomain.to_json_dict(),
            "f": list(self.f),
        }

    @classmethod
    def from_json_dict(cls, d):
        return cls(
            AbstractGraph.from_json_dict(d["domain"]),
            AbstractGraph.from_json_dict(d["codomain"]),
            d["f"],
        )


class GraphEpimorphism(CellularMap):
    """A cellular map that passes :func:`is_graph_epimorphism`."""

    def __init__(self, domain, codomain, f):
        super().__init__(domain, codomain, f)
        ok, reason = is_graph_epimorphism(self)
        if not ok:
            raise ValueError("not a graph epimorphism: %s" % reason)


def is_graph_epimorphism(m):
    """Decide the epimorphism conditions; returns (bool, reason code).

    Reason codes: half_edge_preimage (some codomain half-edge has not exactly
    one preimage, or a non-half-edge one), vertex_preimage_not_tree, and
    leaf_violation (a labelled leaf inside a collapsed tree, or labels not
    preserved).
    """
    dom, cod, f = m.domain, m.codomain, m.f
    pre = {y: [] for y in range(cod.m)}
    for x in range(dom.m):
        pre[f[x]].append(x)

    for h in cod.half_edges:
        p = pre[h]
        if len(p) != 1 or dom.sigma[p[0]] == p[0]:
            return False, EPI_HALF_EDGE_PREIMAGE

    dom_labels = dict(dom.leaf_items)
    cod_labels = dict(cod.leaf_items)
    for v in cod.vertices:
        p = pre[v]
        if not p:
            return False, EPI_VERTEX_PREIMAGE_NOT_TREE
        if not _is_tree_subset(dom, p):
            return False, EPI_VERTEX_PREIMAGE_NOT_TREE
        if len(p) > 1 and any(x in dom_labels for x in p):
            return False, EPI_LEAF_VIOLATION

    for v, lab in dom.leaf_items:
        if cod_labels.get(f[v]) != lab:
            return False, EPI_LEAF_VIOLATION
    for v, lab in cod.leaf_items:
        p = pre[v]
        if len(p) != 1 or dom_labels.get(p[0]) != lab:
            return False, EPI_LEAF_VIOLATION
    return True, EPI_OK


def _is_tree_subset(g, elements):
    """Is this sigma- and t-closed element subset a tree (connected subgraph
    with betti 0)?  Half-edges in the set pair up under sigma because the set
    is a full vertex preimage of a cellular map."""
    elems = set(elements)
    verts = [x for x in elems if g.sigma[x] == x]
    if not verts:
        return False
    for x in elems:
        if g.sigma[x] not in elems or g.t[x] not in elems:
            return False
    parent = {x: x for x in elems}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra == rb:
            return False
        parent[ra] = rb
        return True

    for x in elems:
        if g.sigma[x] != x:
            union(x, g.t[x])
    n_edges = 0
    for x in elems:
        if g.sigma[x] != x and x < g.sigma[x]:
            n_edges += 1
            if not union(x, g.sigma[x]):
                return False  # cycle
    roots = {find(x) for x in elems}
    return len(roots) == 1


class Forest:
    """A set of edge ids of a host graph spanning a disjoint union of trees,
    with no loops and no labelled-leaf endpoints."""

    def __init__(self, host, edge_ids):
        edge_ids = frozenset(int(e) for e in edge_ids)
        labelled = {v for v, _ in host.leaf_items}
        parent = {}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for e in sorted(edge_ids):
            if not (0 <= e < len(host.edges)):
                raise ValueError("edge id %d out of range" % e)
            if host.is_loop(e):
                raise ValueError("edge %d is a loop" % e)
            a, b = host.edge_endpoints(e)
            if a in labelled or b in labelled:
                raise ValueError("edge %d touches a labelled leaf" % e)
            for v in (a, b):
                parent.setdefault(v, v)
            ra, rb = find(a), find(b)
            if ra == rb:
                raise ValueError("edges contain a cycle through %d" % e)
            parent[ra] = rb
        self.host = host
        self.edge_ids = edge_ids

    def __len__(self):
        return len(self.edge_ids)

    def __eq__(self, other):
        return (
            isinstance(other, Forest)
            and self.host == other.host
            and self.edge_ids == other.edge_ids
        )

    def __hash__(self):
        return hash((self.host, self.edge_ids))

    def __le__(self, other):
        return self.edge_ids <= other.edge_ids

    def __lt__(self, other):
        return self.edge_ids < other.edge_ids

    def __repr__(self):
        return "Forest(%s)" % sorted(self.edge_ids)

    def to_json(self):
        return sorted(self.edge_ids)


class ForestChain:
    """Strictly nested nonempty forests F1 < F2 < ... < Fk of one host."""

    def __init__(self, host, chain):
        chain = tuple(chain)
        for f in chain:
            if not isinstance(f, Forest) or f.host != host:
                raise ValueError("chain entries must be forests of the host")
            if not f.edge_ids:
                raise ValueError("chain forests must be nonempty")
        for a, b in zip(chain, chain[1:]):
            if not a.edge_ids < b.edge_ids:
                raise ValueError("chain must be strictly nested")
        self.host = host
        self.chain = chain

    def __len__(self):
        return len(self.chain)

    def __repr__(self):
        return "ForestChain(%s)" % [sorted(f.edge_ids) for f in self.chain]


def collapse_forest(g, forest):
    """Quotient g by a forest: each tree of the forest collapses to a vertex.

    Returns (quotient graph, GraphEpimorphism).  The quotient keeps the first
    Betti number and the labelled leaves; its edge count drops by the size of
    the forest.  New element ids are assigned in order: one vertex per merged
    component (ordered by smallest member), then the surviving half-edges in
    their old relative order.
    """
    if isinstance(forest, Forest):
        if forest.host != g:
            raise ValueError("forest belongs to a different host")
        edge_ids = forest.edge_ids
    else:
        edge_ids = Forest(g, forest).edge_ids

    collapsed_half = set()
    for e in edge_ids:
        a, b = g.edges[e]
        collapsed_half.add(a)
        collapsed_half.add(b)

    parent = {v: v for v in g.vertices}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e in edge_ids:
        a, b = g.edge_endpoints(e)
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    comps = {}
    for v in g.vertices:
        comps.setdefault(find(v), []).append(v)
    new_vertices = sorted(comps.values(), key=min)
    vmap = {}
    for i, members in enumerate(new_vertices):
        for v in members:
            vmap[v] = i

    survivors = [h for h in g.half_edges if h not in collapsed_half]
    hmap = {h: len(new_vertices) + i for i, h in enumerate(survivors)}

    m2 = len(new_vertices) + len(survivors)
    sigma2 = list(range(m2))
    t2 = list(range(m2))
    for h in survivors:
        sigma2[hmap[h]] = hmap[g.sigma[h]]
        t2[hmap[h]] = vmap[g.t[h]]
    labels2 = {vmap[v]: l for v, l in g.leaf_items}
    q = AbstractGraph(m2, sigma2, t2, labels2)

    f = [0] * g.m
    for v in g.vertices:
        f[v] = vmap[v]
    for h in g.half_edges:
        f[h] = hmap[h] if h in hmap else vmap[g.t[h]]
    return q, GraphEpimorphism(g, q, f)


def image_forest(epi, edge_ids, skip):
    """Edge ids of the images of `edge_ids`, for edges surviving a collapse.

    `skip` is the collapsed edge set; members of it are dropped, everything
    else must survive as an edge of the codomain."""
    g, q = epi.domain, epi.codomain
    out = set()
    for e in edge_ids:
        if e in skip:
            continue
        a, b = g.edges[e]
        x, y = epi.f[a], epi.f[b]
        out.add(q.edge_index[(min(x, y), max(x, y))])
    return frozenset(out)


def compose(a, b):
    """Composite of epimorphisms a then b (codomain of a = domain of b)."""
    if a.codomain != b.domain:
        raise ValueError("codomain of the first map must equal domain of the second")
    f = tuple(b.f[a.f[x]] for x in range(a.domain.m))
    return GraphEpimorphism(a.domain, b.codomain, f)


def factor_as_collapses(m):
    """Write an epimorphism as elementary collapses followed by one
    isomorphism.  Returns (list of GraphEpimorphism, CellularMap iso); the
    composite of the list followed by the iso reproduces m exactly."""
    ok, reason = is_graph_epimorphism(m)
    if not ok:
        raise ValueError("not a graph epimorphism: %s" % reason)
    g = m.domain
    cod = m.codomain
    collapsed = sorted(
        e
        for e in range(len(g.edges))
        if cod.sigma[m.f[g.edges[e][0]]] == m.f[g.edges[e][0]]
    )

    steps = []
    current = g
    total = None
    for e in collapsed:
        # image of edge e in the current partial quotient
        a, b = g.edges[e]
        if total is None:
            ia, ib = a, b
        else:
            ia, ib = total.f[a], total.f[b]
        eid = current.edge_index[(min(ia, ib), max(ia, ib))]
        current, step = collapse_forest(current, [eid])
        steps.append(step)
        total = step if total is None else compose(total, step)

    if total is None:
        iso = CellularMap(current, m.codomain, m.f)
        return [], iso
    iso_f = [None] * current.m
    for x in range(g.m):
        iso_f[total.f[x]] = m.f[x]
    iso = CellularMap(current, m.codomain, iso_f)
    return steps, iso
