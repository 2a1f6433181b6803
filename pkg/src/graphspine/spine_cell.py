"""Cells of the quotient spine complex.

A cell is an isomorphism class of (graph, strictly nested forest chain).  The
public identity is the canonical form of the graph with every half-edge
colored by the least chain level whose forest contains its edge (0 for edges
outside the chain); two cells are equal exactly when those colored canonical
strings agree.  Internally the cell also carries the orbit-minimal bitmask
tuple used during complex construction; both identities name the same thing,
since either one matches iff some automorphism of the graph carries one chain
to the other level by level.
"""

from __future__ import annotations

from .graphs import canonical_form
from .morphisms import Forest, ForestChain


class SpineCell:
    __slots__ = ("catalog", "graph", "mask_chain", "dim", "_colored")

    def __init__(self, catalog, graph, mask_chain, dim):
        self.catalog = catalog
        self.graph = graph
        self.mask_chain = tuple(mask_chain)
        self.dim = dim
        self._colored = None

    @property
    def dimension(self):
        return self.dim

    def forest_edge_sets(self):
        """The chain as a list of frozensets of edge ids, smallest first."""
        out = []
        for mask in self.mask_chain:
            ids = set()
            rest = mask
            while rest:
                low = rest & -rest
                ids.add(low.bit_length() - 1)
                rest ^= low
            out.append(frozenset(ids))
        return out

    @property
    def chain(self):
        """The chain as a ForestChain of the catalog representative."""
        host = self.catalog[self.graph]
        return ForestChain(host, [Forest(host, ids) for ids in self.forest_edge_sets()])

    def colored_key(self):
        """Canonical form of the graph with half-edges colored by least chain
        level containing their edge; the cell's public identity."""
        if self._colored is None:
            g = self.catalog[self.graph]
            self._colored = colored_chain_key(g, self.forest_edge_sets())
        return self._colored

    def same_chain(self, edge_sets):
        """Does this cell represent (same graph, this chain up to symmetry)?"""
        g = self.catalog[self.graph]
        return self.colored_key() == colored_chain_key(g, edge_sets)

    def __eq__(self, other):
        return isinstance(other, SpineCell) and self.colored_key() == other.colored_key()

    def __hash__(self):
        return hash(self.colored_key())

    def __repr__(self):
        return "SpineCell(graph=%d, chain=%s)" % (
            self.graph,
            [sorted(s) for s in self.forest_edge_sets()],
        )


def colored_chain_key(g, edge_sets):
    """Canonical string of g with every half-edge colored by the least
    1-based chain level whose forest contains its edge (0 if none)."""
    colors = [0] * g.m
    for level, ids in enumerate(edge_sets, start=1):
        for e in ids:
            a, b = g.edges[e]
            for h in (a, b):
                if colors[h] == 0:
                    colors[h] = level
    key, _ = canonical_form(g, colors)
    return key
