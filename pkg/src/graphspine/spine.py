"""Rational chain complex of the quotient spine and its Betti numbers.

A k-cell is an isomorphism class of pairs (G, F1 < F2 < ... < Fk) where G is
a catalog graph and the Fi are strictly nested nonempty forests.  The
boundary is the alternating face sum: face 0 collapses F1 (replacing the pair
by (G/F1, images of the remaining forests)) and face i >= 1 deletes Fi.
Because the forest sizes strictly increase along a chain, no automorphism of
a pair can permute the chain levels, so cells carry a well-defined
orientation and the rational chain groups are free on the cells.

Internally forests are edge-id bitmasks; a cell is identified by the minimum,
over the automorphism group of its graph, of its transformed mask tuple.
That key is equivalent to the colored canonical form exposed by
:class:`SpineCell` (color each half-edge by the least chain level containing
its edge): equality of either datum amounts to an automorphism of the graph
carrying one chain to the other levelwise.
"""

from __future__ import annotations

import time

from .catalogs import enumerate_forests, enumerate_graphs
from .exact_linalg import SparseIntMatrix, rank_exact, rank_modular
from .graphs import automorphism_group, canonical_form, edge_permutation
from .spine_cell import SpineCell

EXACT_COLUMN_BOUND = 20000


class SparseIntChainComplex:
    """Cells per dimension plus integer boundary matrices.

    boundaries[k] (k >= 1) has one row per (k-1)-cell and one column per
    k-cell; signed face coefficients are accumulated, so entries that cancel
    are genuinely absent.
    """

    def __init__(self, n, s, catalog, cells, boundaries, metadata):
        self.n = n
        self.s = s
        self.catalog = catalog
        self.cells = cells
        self.boundaries = boundaries
        self.metadata = metadata

    @property
    def dimension(self):
        dims = [k for k, cs in self.cells.items() if cs]
        return max(dims) if dims else -1

    def cell_counts(self):
        return [len(self.cells.get(k, ())) for k in range(self.dimension + 1)]

    def boundary(self, k):
        """The matrix of d_k; a zero-shaped matrix outside the built range."""
        if k in self.boundaries:
            return self.boundaries[k]
        rows = len(self.cells.get(k - 1, ()))
        cols = len(self.cells.get(k, ()))
        return SparseIntMatrix(rows, cols)

    def check_dd_zero(self):
        """Verify d_k . d_{k+1} = 0 exactly for every consecutive pair."""
        for k in sorted(self.boundaries):
            if k + 1 in self.boundaries:
                prod = self.boundaries[k].matmul(self.boundaries[k + 1])
                if not prod.is_zero():
                    return False, k
        return True, None

    def is_connected(self):
        """Connectivity of the 1-skeleton (quotient spine path components)."""
        n0 = len(self.cells.get(0, ()))
        if n0 == 0:
            return False
        parent = list(range(n0))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        d1 = self.boundary(1)
        cols = {}
        for (i, j), _v in d1.items():
            cols.setdefault(j, []).append(i)
        for rows in cols.values():
            for a, b in zip(rows, rows[1:]):
                parent[find(a)] = find(b)
        return len({find(i) for i in range(n0)}) == 1

    def boundary_text(self, k):
        """Triplet text for d_k: header `k rows cols nnz`, then `row col value`
        lines sorted by (col, row), 0-indexed."""
        m = self.boundary(k)
        lines = ["%d %d %d %d" % (k, m.nrows, m.ncols, m.nnz)]
        for (i, j), v in m.items():
            lines.append("%d %d %d" % (i, j, v))
        return "\n".join(lines) + "\n"


def max_chain_dimension(catalog):
    """Largest possible chain length: the maximum forest size in the catalog."""
    best = 0
    for g in catalog:
        forests = enumerate_forests(g)
        if forests:
            best = max(best, max(len(f) for f in forests))
    return best


def build_spine_complex(n, s, max_dim=None, cache_dir=None, progress=None):
    """Build the quotient spine chain complex for (n, s).

    max_dim truncates the built dimensions (the truncation is recorded in
    metadata and Betti numbers then refer to the truncated complex); the
    default builds every dimension the catalog supports.
    """
    t_start = time.time()
    catalog = enumerate_graphs(n, s, cache_dir=cache_dir)

    say = progress if callable(progress) else (lambda msg: None)

    per_graph = []
    natural_dim = 0
    for gi, g in enumerate(catalog):
        forests = enumerate_forests(g)
        masks = sorted(
            (sum(1 << e for e in f.edge_ids) for f in forests),
            key=lambda m: (bin(m).count("1"), m),
        )
        if masks:
            natural_dim = max(natural_dim, bin(masks[-1]).count("1"))
        tables = _aut_mask_tables(g)
        sup = []
        for i, mi in enumerate(masks):
            sup.append(
                [
                    j
                    for j in range(len(masks))
                    if masks[j] != mi and (masks[j] & mi) == mi
                ]
            )
        per_graph.append((masks, sup, tables))

    dim = natural_dim if max_dim is None else min(max_dim, natural_dim)
    truncated = dim < natural_dim

    index = {k: {} for k in range(dim + 1)}
    for gi in range(len(catalog)):
        index[0][(gi, ())] = None
    raw_chains = 0
    for gi, (masks, sup, tables) in enumerate(per_graph):
        say("cells of graph %d/%d" % (gi + 1, len(catalog)))
        seen = index

        def visit(prefix_ids):
            nonlocal raw_chains
            k = len(prefix_ids)
            raw_chains += 1
            key = _orbit_min(tuple(masks[i] for i in prefix_ids), tables)
            seen[k].setdefault((gi, key), None)
            if k < dim:
                for j in sup[prefix_ids[-1]]:
                    visit(prefix_ids + (j,))

        for i in range(len(masks)):
            if dim >= 1:
                visit((i,))

    cells = {}
    for k in range(dim + 1):
        ordered = sorted(index[k])
        for pos, ck in enumerate(ordered):
            index[k][ck] = pos
        cells[k] = [
            SpineCell(catalog, gi, key, k) for gi, key in ordered
        ]

    boundaries = {}
    collapse_memo = {}
    for k in range(1, dim + 1):
        say("boundary in dimension %d (%d cells)" % (k, len(cells[k])))
        mat = SparseIntMatrix(len(cells[k - 1]), len(cells[k]))
        for col, (gi, chain) in enumerate(sorted(index[k])):
            tables = per_graph[gi][2]
            tgi, timage = _collapse_face(
                catalog, gi, chain, collapse_memo
            )
            tkey = _orbit_min(timage, per_graph[tgi][2])
            mat.add(index[k - 1][(tgi, tkey)], col, 1)
            for i in range(1, k + 1):
                sub = chain[: i - 1] + chain[i:]
                row = index[k - 1][(gi, _orbit_min(sub, tables))]
                mat.add(row, col, -1 if i % 2 else 1)
        boundaries[k] = mat

    metadata = {
        "requested_max_dim": max_dim,
        "natural_dim": natural_dim,
        "truncated": truncated,
        "raw_chains": raw_chains,
        "build_seconds": time.time() - t_start,
    }
    return SparseIntChainComplex(n, s, catalog, cells, boundaries, metadata)


def _aut_mask_tables(g):
    """Bitmask translation tables for the edge action of Aut(g), or None when
    the action is trivial (then every mask tuple is already canonical)."""
    n_edges = len(g.edges)
    eperms = {edge_permutation(g, p) for p in automorphism_group(g)}
    eperms.discard(tuple(range(n_edges)))
    if not eperms:
        return None
    tables = []
    for ep in eperms:
        bit = [1 << ep[e] for e in range(n_edges)]
        tbl = [0] * (1 << n_edges)
        for mask in range(1, 1 << n_edges):
            low = mask & -mask
            tbl[mask] = tbl[mask ^ low] | bit[low.bit_length() - 1]
        tables.append(tbl)
    return tables


def _orbit_min(chain, tables):
    """Minimum of the chain mask tuple over the graph's edge symmetries."""
    if tables is None or not chain:
        return chain
    best = chain
    for tbl in tables:
        cand = tuple(tbl[m] for m in chain)
        if cand < best:
            best = cand
    return best


def _collapse_face(catalog, gi, chain, memo):
    """Face 0 of (gi, chain): collapse F1 and push the rest of the chain into
    the canonical representative of the quotient.  Returns (target graph
    index, image mask tuple)."""
    f1 = chain[0]
    got = memo.get((gi, f1))
    if got is None:
        g = catalog[gi]
        ids = [e for e in range(len(g.edges)) if f1 >> e & 1]
        q, epi = _collapse(g, ids)
        key, perm = canonical_form(q)
        tgi = catalog.index_of_key(key)
        target = catalog[tgi]
        ebm = [0] * len(g.edges)
        for e in range(len(g.edges)):
            if f1 >> e & 1:
                continue
            a, b = g.edges[e]
            x, y = perm[epi.f[a]], perm[epi.f[b]]
            ebm[e] = 1 << target.edge_index[(min(x, y), max(x, y))]
        got = (tgi, ebm)
        memo[(gi, f1)] = got
    tgi, ebm = got
    timage = []
    for m in chain[1:]:
        rest = m & ~f1
        out = 0
        while rest:
            low = rest & -rest
            out |= ebm[low.bit_length() - 1]
            rest ^= low
        timage.append(out)
    return tgi, tuple(timage)


def _collapse(g, edge_ids):
    from .morphisms import collapse_forest

    return collapse_forest(g, edge_ids)


class BettiReport(list):
    """Betti numbers b_0..b_d, with how each rank was established.

    Behaves as a plain list of integers; extra attributes record the per-k
    boundary ranks, whether each rank was certified by exact elimination, and
    whether the modular primes agreed among themselves.
    """

    def __init__(self, betti, ranks, certified, agreement, mode, primes, seed):
        super().__init__(betti)
        self.ranks = ranks
        self.certified = certified
        self.agreement = agreement
        self.mode = mode
        self.primes = primes
        self.seed = seed


def betti_numbers(c, mode="auto", primes=3, seed=0, exact_cols=EXACT_COLUMN_BOUND):
    """Rational Betti numbers b_k = dim C_k - rank d_k - rank d_{k+1}.

    mode "modular": seeded random-prime ranks only (lower bounds that are
    almost surely exact).  mode "exact": fraction-free integer elimination.
    mode "auto" (default): modular everywhere plus exact certification on
    every matrix with at most exact_cols columns; when both run, the exact
    value wins and a disagreement would show up as certified-but-unequal
    ranks, which raises.  A truncated complex reports the Betti numbers of
    the truncation.
    """
    if mode not in ("auto", "modular", "exact"):
        raise ValueError("unknown mode %r" % mode)
    d = c.dimension
    if d < 0:
        return BettiReport([], {}, {}, True, mode, primes, seed)

    ranks = {}
    certified = {}
    agreement = True
    for k in range(1, d + 1):
        m = c.boundary(k)
        if m.ncols == 0 or m.nrows == 0:
            ranks[k] = 0
            certified[k] = True
            continue
        exact_val = None
        modular_val = None
        if mode in ("auto", "modular"):
            res = rank_modular(m, primes=primes, seed=seed)
            modular_val = res.rank
            agreement = agreement and res.agreed
        if mode == "exact" or (mode == "auto" and m.ncols <= exact_cols):
            exact_val = rank_exact(m)
        if exact_val is not None and modular_val is not None and exact_val != modular_val:
            if exact_val < modular_val:
                raise AssertionError(
                    "modular rank exceeded exact rank in dimension %d" % k
                )
            agreement = False
        ranks[k] = exact_val if exact_val is not None else modular_val
        certified[k] = exact_val is not None

    betti = []
    for k in range(d + 1):
        nk = len(c.cells.get(k, ()))
        bk = nk - ranks.get(k, 0) - ranks.get(k + 1, 0)
        if bk < 0:
            raise AssertionError("negative Betti number b_%d = %d" % (k, bk))
        betti.append(bk)
    bcert = {
        k: certified.get(k, True) and certified.get(k + 1, True) for k in range(d + 1)
    }
    return BettiReport(betti, ranks, bcert, agreement, mode, primes, seed)


def euler_characteristic(c):
    """Alternating sum of cell counts; equals the alternating Betti sum."""
    return sum((-1) ** k * len(cs) for k, cs in c.cells.items())


def betti_report_dict(c, report):
    return {
        "n": c.n,
        "s": c.s,
        "mode": report.mode,
        "betti": list(report),
        "cells": c.cell_counts(),
        "ranks": dict(report.ranks),
        "certified": dict(report.certified),
        "agreed": report.agreement,
        "connected": c.is_connected(),
        "euler": euler_characteristic(c),
        "truncated": c.metadata.get("truncated", False),
        "natural_dim": c.metadata.get("natural_dim", c.dimension),
    }


def cross_check_two_cells(c):
    """Face identity on every 2-cell: the three boundary-routine faces must
    agree with faces derived independently by composing single collapses.

    Returns the number of 2-cells checked; raises AssertionError on any
    mismatch.
    """
    from .morphisms import collapse_forest, compose, image_forest
    from .spine_cell import colored_chain_key

    d2 = c.boundary(2)
    by_col = {}
    for (i, j), v in d2.items():
        by_col.setdefault(j, {})[i] = v
    row_of = {
        cell.colored_key(): idx for idx, cell in enumerate(c.cells.get(1, ()))
    }
    checked = 0
    for cell_idx, cell in enumerate(c.cells.get(2, ())):
        g = c.catalog[cell.graph]
        f1, f2 = cell.forest_edge_sets()
        q1, e1 = collapse_forest(g, sorted(f1))
        img = image_forest(e1, sorted(f2), skip=f1)
        q2a, e2 = collapse_forest(q1, sorted(img))
        comp = compose(e1, e2)
        q2b, _ = collapse_forest(g, sorted(f2))
        ka, _ = canonical_form(q2a)
        kb, _ = canonical_form(comp.codomain)
        kc, _ = canonical_form(q2b)
        assert ka == kb == kc, "composite quotient mismatch on 2-cell %d" % cell_idx

        kq, pq = canonical_form(q1)
        tgi = c.catalog.index_of_key(kq)
        target = c.catalog[tgi]
        img_canon = set()
        for e in img:
            a, b = q1.edges[e]
            x, y = pq[a], pq[b]
            img_canon.add(target.edge_index[(min(x, y), max(x, y))])
        expected = {}
        for row, v in (
            (row_of[colored_chain_key(target, (img_canon,))], 1),
            (row_of[colored_chain_key(g, (f2,))], -1),
            (row_of[colored_chain_key(g, (f1,))], 1),
        ):
            expected[row] = expected.get(row, 0) + v
            if expected[row] == 0:
                del expected[row]
        assert by_col.get(cell_idx, {}) == expected, (
            "face coefficients disagree on 2-cell %d" % cell_idx
        )
        checked += 1
    return checked


def orientation_safety_check(c):
    """Assert no automorphism can permute a cell's chain levels nontrivially:
    any symmetry preserving the chain as a set of forests fixes each level.
    Returns the number of (cell, symmetry) pairs inspected."""
    checked = 0
    eperm_cache = {}
    for k, cs in c.cells.items():
        if k < 1:
            continue
        for cell in cs:
            if cell.graph not in eperm_cache:
                g = c.catalog[cell.graph]
                eperm_cache[cell.graph] = sorted(
                    {edge_permutation(g, p) for p in automorphism_group(g)}
                )
            sets = cell.forest_edge_sets()
            for ep in eperm_cache[cell.graph]:
                imgs = [frozenset(ep[e] for e in fs) for fs in sets]
                if set(imgs) == set(sets):
                    assert imgs == sets, (
                        "chain levels permuted by a symmetry on a %d-cell" % k
                    )
                checked += 1
    return checked
