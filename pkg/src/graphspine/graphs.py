"""Abstract graphs as half-edge structures.

A finite abstract graph is a finite set of elements 0..m-1 together with an
involution ``sigma`` and a retraction ``t`` onto the fixed points of sigma.
Fixed points of sigma are the vertices; the remaining elements are half-edges,
and ``t`` sends each half-edge to the vertex it is attached to.  An edge is an
orbit {x, sigma(x)} with x != sigma(x).  The valence of a vertex v is
|t^-1(v)| - 1 (the count of half-edges at v).  Vertices of valence 0 and 2 are
disallowed.  Valence-1 vertices are leaves and must carry distinct labels
1..s.

This module houses the graph type, validation, basic invariants, canonical
forms (with an optional element coloring, used by the spine builder to
identify cells), automorphism groups, and the tree test for edge subsets.
Everything here is pure and treats graphs as immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass


class AbstractGraph:
    """Half-edge structure on elements 0..m-1.

    Construction performs only structural normalization (lengths, ranges,
    types).  Semantic requirements (sigma an involution, t a retraction,
    valence and label rules) are checked by :func:`validate`, so that invalid
    graphs can be built and reported on.
    """

    def __init__(self, m, sigma, t, leaf_labels=None):
        sigma = tuple(int(x) for x in sigma)
        t = tuple(int(x) for x in t)
        if len(sigma) != m or len(t) != m:
            raise ValueError("sigma and t must have length m")
        if any(not (0 <= x < m) for x in sigma) or any(not (0 <= x < m) for x in t):
            raise ValueError("sigma and t entries must lie in 0..m-1")
        if leaf_labels is None:
            leaf_labels = {}
        items = tuple(sorted((int(v), int(l)) for v, l in dict(leaf_labels).items()))
        for v, _ in items:
            if not (0 <= v < m):
                raise ValueError("leaf label on element %d outside 0..m-1" % v)
        self.m = m
        self.sigma = sigma
        self.t = t
        self.leaf_items = items

        self.vertices = tuple(x for x in range(m) if sigma[x] == x)
        self.half_edges = tuple(x for x in range(m) if sigma[x] != x)
        star = {v: [] for v in self.vertices}
        for h in self.half_edges:
            if t[h] in star:
                star[t[h]].append(h)
        self.star = {v: tuple(hs) for v, hs in star.items()}
        self.valence = {v: len(star[v]) for v in self.vertices}
        # Edge list: one entry per sigma-orbit of half-edges, ordered by the
        # smaller element.  Edge ids used everywhere are indices into this.
        edges = []
        for x in self.half_edges:
            if x < sigma[x]:
                edges.append((x, sigma[x]))
        self.edges = tuple(edges)
        self.edge_index = {e: i for i, e in enumerate(edges)}

    @property
    def leaf_labels(self):
        return dict(self.leaf_items)

    def edge_of(self, h):
        """Edge id of the half-edge h."""
        a, b = min(h, self.sigma[h]), max(h, self.sigma[h])
        return self.edge_index[(a, b)]

    def edge_endpoints(self, e):
        a, b = self.edges[e]
        return (self.t[a], self.t[b])

    def is_loop(self, e):
        a, b = self.edges[e]
        return self.t[a] == self.t[b]

    def __eq__(self, other):
        return (
            isinstance(other, AbstractGraph)
            and self.m == other.m
            and self.sigma == other.sigma
            and self.t == other.t
            and self.leaf_items == other.leaf_items
        )

    def __hash__(self):
        return hash((self.m, self.sigma, self.t, self.leaf_items))

    def __repr__(self):
        return "AbstractGraph(m=%d, edges=%d, vertices=%d)" % (
            self.m,
            len(self.edges),
            len(self.vertices),
        )

    def relabel(self, perm):
        """Apply a bijection perm (old id -> new id) and return the new graph."""
        if sorted(perm) != list(range(self.m)):
            raise ValueError("perm is not a bijection of 0..m-1")
        sigma = [0] * self.m
        t = [0] * self.m
        for x in range(self.m):
            sigma[perm[x]] = perm[self.sigma[x]]
            t[perm[x]] = perm[self.t[x]]
        labels = {perm[v]: l for v, l in self.leaf_items}
        return AbstractGraph(self.m, sigma, t, labels)

    def to_json_dict(self):
        return {
            "m": self.m,
            "sigma": list(self.sigma),
            "t": list(self.t),
            "leaf_labels": {str(v): l for v, l in self.leaf_items},
        }

    @classmethod
    def from_json_dict(cls, d):
        return cls(
            d["m"],
            d["sigma"],
            d["t"],
            {int(v): l for v, l in d.get("leaf_labels", {}).items()},
        )


@dataclass(frozen=True)
class GraphInvariants:
    num_vertices: int
    num_edges: int
    num_components: int
    betti: int
    leaf_count: int


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    structural_errors: tuple
    violations: tuple
    connected: bool

    def all_messages(self):
        return list(self.structural_errors) + list(self.violations)


def _components(g):
    """Connected components of the element set (x ~ sigma x, x ~ t x)."""
    parent = list(range(g.m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for x in range(g.m):
        union(x, g.sigma[x])
        union(x, g.t[x])
    return len({find(x) for x in range(g.m)})


def validate(g):
    """Check every graph invariant; report structural malformations distinctly
    from valence and label violations.

    Structural errors: sigma not an involution/permutation, t not a retraction
    onto the fixed points of sigma.  Violations: forbidden valences, unlabeled
    or multiply labelled leaves, labels not exhausting 1..s.  Connectivity is
    reported as a flag, not a violation; catalog builders require it but
    validate does not.
    """
    structural = []
    if sorted(g.sigma) != list(range(g.m)):
        structural.append("sigma is not a permutation")
    else:
        if any(g.sigma[g.sigma[x]] != x for x in range(g.m)):
            structural.append("sigma is not an involution")
    fixed = set(x for x in range(g.m) if g.sigma[x] == x)
    bad_target = [x for x in range(g.m) if g.t[x] not in fixed]
    if bad_target:
        structural.append(
            "t does not land in Fix(sigma) at elements %s" % sorted(bad_target)
        )
    bad_retract = [v for v in fixed if g.t[v] != v]
    if bad_retract:
        structural.append(
            "t is not the identity on Fix(sigma) at %s" % sorted(bad_retract)
        )
    if structural:
        return ValidationReport(False, tuple(structural), (), False)

    violations = []
    label_map = dict(g.leaf_items)
    for v in g.vertices:
        val = g.valence[v]
        if val in (0, 2):
            violations.append("vertex %d has valence %d" % (v, val))
        if val == 1 and v not in label_map:
            violations.append("valence-1 vertex %d carries no leaf label" % v)
        if val != 1 and v in label_map:
            violations.append("label on vertex %d of valence %d" % (v, val))
    for v, _ in g.leaf_items:
        if v not in g.valence:
            violations.append("label on non-vertex element %d" % v)
    labels = [l for _, l in g.leaf_items]
    s = len(labels)
    if sorted(labels) != list(range(1, s + 1)):
        violations.append("leaf labels %s do not exhaust 1..%d" % (sorted(labels), s))
    connected = g.m > 0 and _components(g) == 1
    return ValidationReport(not violations, (), tuple(violations), connected)


def invariants(g):
    """Counts: vertices, edges, components, first Betti number, leaf count."""
    V = len(g.vertices)
    E = len(g.edges)
    c = _components(g) if g.m else 0
    return GraphInvariants(V, E, c, E - V + c, len(g.leaf_items))


def subgraph_is_tree(g, edge_ids):
    """True iff the nonempty edge subset spans a connected, acyclic subgraph.

    Loops and parallel edges force a cycle and fail the edge/vertex count
    test; the empty set is not a tree.
    """
    edge_ids = sorted(set(edge_ids))
    if not edge_ids:
        return False
    verts = set()
    for e in edge_ids:
        a, b = g.edge_endpoints(e)
        verts.add(a)
        verts.add(b)
    parent = {v: v for v in verts}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    comps = len(verts)
    for e in edge_ids:
        a, b = g.edge_endpoints(e)
        ra, rb = find(a), find(b)
        if ra == rb:
            return False
        parent[ra] = rb
        comps -= 1
    return comps == 1


# ---------------------------------------------------------------------------
# Canonical forms and automorphisms via backtracking partition refinement.
#
# Elements are initially colored by kind (vertex or half-edge), valence, leaf
# label, and any externally supplied color.  The partition is refined by
# neighborhood signatures until stable; non-singleton cells are then split by
# individualizing each member in turn.  Every discrete leaf of the search
# yields a candidate labeling; the lexicographically least serialized image
# is the canonical form, and the labelings tying for the minimum recover the
# automorphism group.


def _initial_partition(g, colors):
    keys = {}
    for x in range(g.m):
        if g.sigma[x] == x:
            keys[x] = (0, g.valence.get(x, -1), dict(g.leaf_items).get(x, 0), colors[x])
        else:
            keys[x] = (1, 0, 0, colors[x])
    order = sorted(range(g.m), key=lambda x: keys[x])
    cells = []
    for x in order:
        if cells and keys[cells[-1][0]] == keys[x]:
            cells[-1].append(x)
        else:
            cells.append([x])
    return cells


def _refine(g, cells):
    while True:
        cell_of = {}
        for i, cell in enumerate(cells):
            for x in cell:
                cell_of[x] = i
        incident = {v: tuple(sorted(cell_of[h] for h in g.star.get(v, ()))) for v in g.vertices}
        changed = False
        new_cells = []
        for cell in cells:
            if len(cell) == 1:
                new_cells.append(cell)
                continue
            sig = {}
            for x in cell:
                sig[x] = (cell_of[g.sigma[x]], cell_of[g.t[x]], incident.get(x, ()))
            groups = {}
            for x in cell:
                groups.setdefault(sig[x], []).append(x)
            if len(groups) == 1:
                new_cells.append(cell)
            else:
                changed = True
                for key in sorted(groups):
                    new_cells.append(groups[key])
        cells = new_cells
        if not changed:
            return cells


def _serialize_labeling(g, colors, perm):
    """Image of (sigma, t, labels, colors) under perm, as one comparable tuple."""
    m = g.m
    sigma = [0] * m
    t = [0] * m
    col = [0] * m
    for x in range(m):
        sigma[perm[x]] = perm[g.sigma[x]]
        t[perm[x]] = perm[g.t[x]]
        col[perm[x]] = colors[x]
    labels = tuple(sorted((perm[v], l) for v, l in g.leaf_items))
    return (tuple(sigma), tuple(t), labels, tuple(col))


def _search(g, colors, cells, best, leaves):
    cells = _refine(g, cells)
    target = None
    for i, cell in enumerate(cells):
        if len(cell) > 1:
            target = i
            break
    if target is None:
        perm = [0] * g.m
        for i, cell in enumerate(cells):
            perm[cell[0]] = i
        key = _serialize_labeling(g, colors, perm)
        if best[0] is None or key < best[0]:
            best[0] = key
            leaves.clear()
            leaves.append(tuple(perm))
        elif key == best[0]:
            leaves.append(tuple(perm))
        return
    cell = cells[target]
    for x in sorted(cell):
        rest = [y for y in cell if y != x]
        branched = cells[:target] + [[x], rest] + cells[target + 1 :]
        _search(g, colors, branched, best, leaves)


def _canonical_search(g, colors=None):
    if colors is None:
        colors = [0] * g.m
    if g.m == 0:
        return (tuple(), tuple(), tuple(), tuple()), [tuple()]
    cells = _initial_partition(g, colors)
    best = [None]
    leaves = []
    _search(g, colors, cells, best, leaves)
    return best[0], leaves


def _hex_of_key(m, key):
    sigma, t, labels, colors = key
    payload = "%d;%s;%s;%s;%s" % (
        m,
        ",".join(map(str, sigma)),
        ",".join(map(str, t)),
        ",".join("%d:%d" % (v, l) for v, l in labels),
        ",".join(map(str, colors)),
    )
    return payload.encode("ascii").hex()


def canonical_form(g, colors=None):
    """Canonical byte string (lowercase hex) and the relabelling onto it.

    Two graphs get equal strings exactly when some bijection of elements
    commutes with sigma and t, preserves leaf labels, and preserves the
    optional element coloring.  The returned relabelling maps g onto its
    canonical representative: ``g.relabel(relabelling)`` is that
    representative.
    """
    key, leaves = _canonical_search(g, colors)
    # The lex-least labeling among the minimum-key leaves is the identity
    # whenever g is already canonical, which makes canonical_form idempotent.
    return _hex_of_key(g.m, key), min(leaves)


def canonical_graph(g):
    """The canonical representative itself (plain coloring)."""
    _, perm = canonical_form(g)
    return g.relabel(perm)


def automorphism_group(g):
    """All element bijections commuting with sigma and t and fixing every
    labelled leaf, as permutation tuples (x -> perm[x]).

    The identity is always present; the set is closed under composition and
    inverses.  Labelled leaves are required to be fixed pointwise, which for
    valid graphs coincides with label preservation since labels are distinct.
    """
    _, leaves = _canonical_search(g)
    p0 = min(leaves)
    inv0 = [0] * g.m
    for x in range(g.m):
        inv0[p0[x]] = x
    group = set()
    for p in leaves:
        group.add(tuple(inv0[p[x]] for x in range(g.m)))
    return sorted(group)


def edge_permutation(g, perm):
    """Action of an element permutation on edge ids."""
    out = []
    for a, b in g.edges:
        x, y = perm[a], perm[b]
        out.append(g.edge_index[(min(x, y), max(x, y))])
    return tuple(out)


def is_isomorphic(g1, g2):
    """Isomorphism test via canonical strings."""
    if g1.m != g2.m:
        return False
    return canonical_form(g1)[0] == canonical_form(g2)[0]
