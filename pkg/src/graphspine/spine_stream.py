"""Low-memory Betti pipeline for large forest-chain complexes.

``build_spine_complex`` keeps every boundary as a dict-of-dicts integer
matrix, comfortable up to a few hundred thousand cells.  The (4, 1) complex
has millions of cells and tens of millions of boundary entries, so this
pipeline trades dict convenience for compactness:

* cell identities are packed integers held in sorted lists, looked up by
  bisection instead of hashing;
* each boundary is compressed sparse columns backed by ``array`` objects,
  one signed byte per coefficient;
* d . d = 0 is verified by integer sparse products taken in column blocks,
  whose 32-bit accumulators cannot overflow because the coefficients are
  bounded by the number of faces of a cell;
* modular ranks run bottom-up as a clearing ladder: the pivot lead rows of
  each reduced d_k are deleted from d_{k+1} before it is reduced (see
  _rows_mod_p), which removes exactly the rows that would otherwise cancel
  to zero at maximal fill;
* a rank is reported as certified when exact integer elimination confirmed
  it, or when the modular lower bounds saturate the dimension count
  rank d_k + rank d_{k+1} <= #k-cells, which pins both ranks rationally.

Cell order matches ``build_spine_complex`` (graph index first, then the
chain's mask tuple), so on complexes small enough to build both ways the two
pipelines produce identical matrices; tests pin that.
"""

from __future__ import annotations

import time
from array import array
from bisect import bisect_left

from .catalogs import enumerate_forests, enumerate_graphs
from .exact_linalg import SparseIntMatrix, choose_primes, rank_exact
from .spine import EXACT_COLUMN_BOUND, _aut_mask_tables, _collapse_face, _orbit_min


class CSCBoundary:
    """One boundary matrix in compressed sparse column form.

    Column j's entries sit in ``rows[indptr[j]:indptr[j+1]]`` (ascending row
    ids) with coefficients in ``vals``.  A column of d_k holds at most k + 1
    faces, so coefficients fit a signed byte.
    """

    __slots__ = ("nrows", "ncols", "indptr", "rows", "vals")

    def __init__(self, nrows):
        self.nrows = nrows
        self.ncols = 0
        self.indptr = array("q", [0])
        self.rows = array("i")
        self.vals = array("b")

    def push_column(self, entries):
        """Append one column given as (row, coefficient) pairs, row-sorted."""
        for r, v in entries:
            self.rows.append(r)
            self.vals.append(v)
        self.indptr.append(len(self.rows))
        self.ncols += 1

    @property
    def nnz(self):
        return len(self.rows)

    def column(self, j):
        lo, hi = self.indptr[j], self.indptr[j + 1]
        return list(zip(self.rows[lo:hi], self.vals[lo:hi]))

    def to_sparse_int_matrix(self):
        m = SparseIntMatrix(self.nrows, self.ncols)
        indptr, rr, vv = self.indptr, self.rows, self.vals
        for j in range(self.ncols):
            for t in range(indptr[j], indptr[j + 1]):
                m.add(rr[t], j, vv[t])
        return m


def _rows_mod_p(csc, p, skip_rows=None):
    """Row-major (starts, ends, cols, vals) arrays of the matrix mod p.

    Row ri occupies cols[starts[ri]:ends[ri]] (ascending column ids) with
    the matching vals slice.  skip_rows drops those row ids before packing.
    The justification for dropping: d_{k-1} . d_k = 0 means a pivot row of
    a reduced d_{k-1}, written c e_j + (columns > j), certifies that row j
    of d_k is a combination of rows j' > j of d_k; deleting every pivot
    lead row therefore preserves rank (peel from the largest lead down).
    Leads computed mod p stay within their own prime field.
    """
    import numpy as np

    cols = np.repeat(
        np.arange(csc.ncols, dtype=np.int64),
        np.diff(np.frombuffer(csc.indptr, np.int64)),
    )
    r = np.frombuffer(csc.rows, np.int32).astype(np.int64)
    v = np.frombuffer(csc.vals, np.int8).astype(np.int64) % p
    if skip_rows is not None and len(skip_rows):
        keep = np.ones(csc.nrows, bool)
        keep[skip_rows] = False
        sel = keep[r]
        r, cols, v = r[sel], cols[sel], v[sel]
    if not len(r):
        empty = np.zeros(0, np.int64)
        return empty, empty, empty, empty
    order = np.lexsort((cols, r))
    r = r[order]
    cols = np.ascontiguousarray(cols[order])
    v = np.ascontiguousarray(v[order])
    starts = np.nonzero(np.r_[True, r[1:] != r[:-1]])[0]
    ends = np.r_[starts[1:], len(r)]
    return starts, ends, cols, v


def _spa_echelon(starts, ends, cols, vals, ncols, p, say=None, label=""):
    """Row-echelon rank mod p via a sparse accumulator.

    Rows scatter one at a time into a dense mod-p scratch vector and reduce
    against the immutable pivot rows already collected, shortest rows first;
    whatever survives becomes a new pivot keyed by its lead column.  Returns
    (rank, leads) with leads the sorted array of pivot lead columns, which
    the clearing ladder threads into the next dimension's row deletion.
    """
    import numpy as np

    t0 = time.time()
    order = np.argsort(ends - starts, kind="stable")
    dense = np.zeros(ncols, np.int64)
    pivots = {}
    for done, ri in enumerate(order):
        a, b = int(starts[ri]), int(ends[ri])
        c0 = cols[a:b]
        dense[c0] = vals[a:b]
        touched = [c0]
        agenda = c0
        while True:
            nxt = []
            for c in agenda:
                if dense[c] == 0:
                    continue
                piv = pivots.get(int(c))
                if piv is None:
                    continue
                pc, pv, pinv = piv
                f = int(dense[c]) * pinv % p
                dense[pc] = (dense[pc] - f * pv) % p
                if len(pc) > 1:
                    nxt.append(pc[1:])
            if not nxt:
                break
            agenda = np.concatenate(nxt)
            touched.append(agenda)
        touched = np.concatenate(touched) if len(touched) > 1 else touched[0]
        live = touched[dense[touched] != 0]
        if len(live):
            sc = np.unique(live)
            sv = dense[sc].copy()
            pivots[int(sc[0])] = (sc, sv, pow(int(sv[0]), p - 2, p))
        dense[touched] = 0
        if say and done and done % 200_000 == 0:
            say(
                "%s: %d/%d rows, %d pivots, %.1fs"
                % (label, done, len(order), len(pivots), time.time() - t0)
            )
    leads = np.fromiter(pivots.keys(), np.int64, len(pivots))
    leads.sort()
    return len(pivots), leads


def _dd_zero_blocks(a, b, block=200_000):
    """Exact check that a . b == 0, in column blocks of b.

    Products and their sums stay far below 2**31 (coefficients are single
    digits and a column has at most a handful of entries), so int32 sparse
    arithmetic is exact here.
    """
    import numpy as np
    from scipy import sparse

    if a.ncols != b.nrows:
        raise ValueError("shape mismatch: %d cols vs %d rows" % (a.ncols, b.nrows))
    if a.nnz == 0 or b.nnz == 0:
        return True

    def as_scipy(m):
        return sparse.csc_matrix(
            (
                np.frombuffer(m.vals, dtype=np.int8).astype(np.int32),
                np.frombuffer(m.rows, dtype=np.int32),
                np.frombuffer(m.indptr, dtype=np.int64),
            ),
            shape=(m.nrows, m.ncols),
        )

    sa = as_scipy(a)
    sb = as_scipy(b)
    for j0 in range(0, b.ncols, block):
        prod = sa @ sb[:, j0 : j0 + block]
        if prod.count_nonzero():
            return False
    return True


def _pack(gi, chain, mask_bits):
    acc = gi
    for m in chain:
        acc = (acc << mask_bits) | m
    return acc


def _unpack(packed, k, mask_bits):
    mask = (1 << mask_bits) - 1
    rev = []
    for _ in range(k):
        rev.append(packed & mask)
        packed >>= mask_bits
    rev.reverse()
    return packed, tuple(rev)


def stream_spine_betti(
    n,
    s,
    primes=3,
    seed=0,
    max_dim=None,
    cache_dir=None,
    progress=None,
    exact_cols=EXACT_COLUMN_BOUND,
    dd_check=True,
    dd_block=200_000,
):
    """Betti numbers of the (n, s) forest-chain complex, dict-free.

    Modular ranks run for every boundary as one clearing ladder per prime.
    A rank is certified when exact integer elimination confirmed it (matrix
    or transpose within exact_cols columns) or when modular lower bounds
    saturate a dimension count, which pins the ranks on both sides of that
    dimension rationally.  Returns a JSON-ready report dict; raises
    AssertionError if d . d != 0 or a Betti number would come out negative.
    """
    t0 = time.time()
    say = progress if callable(progress) else (lambda msg: None)
    catalog = enumerate_graphs(n, s, cache_dir=cache_dir)
    report = {
        "n": n,
        "s": s,
        "mode": "streamed",
        "primes": list(choose_primes(primes, seed)),
        "seed": seed,
    }
    if len(catalog) == 0:
        report.update(
            cells=[],
            betti=[],
            ranks={},
            ranks_by_prime={},
            certified={},
            agreed=True,
            dd_zero=True,
            connected=False,
            euler=0,
            natural_dim=-1,
            truncated=False,
            raw_chains=0,
            nnz={},
            total_seconds=time.time() - t0,
        )
        return report

    mask_bits = max(max(len(g.edges) for g in catalog), 1)
    dim_cap = float("inf") if max_dim is None else max_dim

    say("catalog: %d graphs" % len(catalog))
    tables = [_aut_mask_tables(g) for g in catalog]
    key_sets = {0: set(range(len(catalog)))}
    natural_dim = 0
    raw_chains = 0
    t_cells = time.time()
    for gi, g in enumerate(catalog):
        forests = enumerate_forests(g)
        masks = sorted(
            (sum(1 << e for e in f.edge_ids) for f in forests),
            key=lambda m: (bin(m).count("1"), m),
        )
        if masks:
            natural_dim = max(natural_dim, bin(masks[-1]).count("1"))
        if dim_cap < 1 or not masks:
            continue
        sup = []
        for mi in masks:
            sup.append(
                [
                    j
                    for j in range(len(masks))
                    if masks[j] != mi and (masks[j] & mi) == mi
                ]
            )
        gtab = tables[gi]

        def visit(ids):
            nonlocal raw_chains
            raw_chains += 1
            k = len(ids)
            key = _orbit_min(tuple(masks[i] for i in ids), gtab)
            key_sets.setdefault(k, set()).add(_pack(gi, key, mask_bits))
            if k < dim_cap:
                for j in sup[ids[-1]]:
                    visit(ids + (j,))

        for i in range(len(masks)):
            visit((i,))
        if gi % 50 == 0 or gi == len(catalog) - 1:
            say(
                "cells: graph %d/%d, %d raw chains, %.1fs"
                % (gi + 1, len(catalog), raw_chains, time.time() - t_cells)
            )

    dim = max(key_sets)
    truncated = max_dim is not None and natural_dim > dim
    keys = {}
    for k in range(dim + 1):
        keys[k] = sorted(key_sets.pop(k, ()))
    counts = [len(keys[k]) for k in range(dim + 1)]
    say("cells per dimension: %s (%.1fs)" % (counts, time.time() - t_cells))

    boundaries = {}
    memo = {}
    t_build = time.time()
    for k in range(1, dim + 1):
        prev = keys[k - 1]
        cur = keys[k]
        say("boundary %d: %d columns" % (k, len(cur)))
        csc = CSCBoundary(len(prev))
        for col, packed in enumerate(cur):
            gi, chain = _unpack(packed, k, mask_bits)
            gtab = tables[gi]
            entries = {}

            tgi, timage = _collapse_face(catalog, gi, chain, memo)
            tkey = _pack(tgi, _orbit_min(timage, tables[tgi]), mask_bits)
            r = bisect_left(prev, tkey)
            if r == len(prev) or prev[r] != tkey:
                raise AssertionError("collapse face missing in dimension %d" % (k - 1))
            entries[r] = entries.get(r, 0) + 1

            for i in range(1, k + 1):
                sub = _pack(
                    gi, _orbit_min(chain[: i - 1] + chain[i:], gtab), mask_bits
                )
                r = bisect_left(prev, sub)
                if r == len(prev) or prev[r] != sub:
                    raise AssertionError(
                        "deletion face missing in dimension %d" % (k - 1)
                    )
                entries[r] = entries.get(r, 0) + (-1 if i % 2 else 1)

            csc.push_column(sorted((r, v) for r, v in entries.items() if v))
            if col % 250_000 == 0 and col:
                say(
                    "boundary %d: %d/%d columns, %.1fs"
                    % (k, col, len(cur), time.time() - t_build)
                )
        boundaries[k] = csc
        say(
            "boundary %d done: %d x %d, nnz %d, %.1fs"
            % (k, csc.nrows, csc.ncols, csc.nnz, time.time() - t_build)
        )
        if k >= 2:
            keys[k - 1] = None
    build_seconds = time.time() - t_build

    t_dd = time.time()
    dd_zero = None
    if dd_check:
        for k in range(1, dim):
            say("checking d%d . d%d = 0" % (k, k + 1))
            if not _dd_zero_blocks(boundaries[k], boundaries[k + 1], dd_block):
                raise AssertionError(
                    "d%d . d%d != 0 in streamed build" % (k, k + 1)
                )
        dd_zero = True
    dd_seconds = time.time() - t_dd

    chosen = tuple(report["primes"])
    ranks_by_prime = {k: [] for k in range(1, dim + 1)}
    t_rank = time.time()
    for p in chosen:
        leads = None
        for k in range(1, dim + 1):
            csc = boundaries[k]
            starts, ends, cc, vv = _rows_mod_p(csc, p, skip_rows=leads)
            say(
                "rank d%d mod %d: %d of %d rows kept (%.1fs)"
                % (k, p, len(starts), csc.nrows, time.time() - t_rank)
            )
            rk, leads = _spa_echelon(
                starts,
                ends,
                cc,
                vv,
                csc.ncols,
                p,
                say=say,
                label="rank d%d mod %d" % (k, p),
            )
            ranks_by_prime[k].append(rk)
            say("rank d%d mod %d: %d (%.1fs)" % (k, p, rk, time.time() - t_rank))

    ranks = {}
    certified = {}
    agreed = True
    for k in range(1, dim + 1):
        per_prime = ranks_by_prime[k]
        modular = max(per_prime)
        agreed = agreed and len(set(per_prime)) == 1
        csc = boundaries[k]
        exact = None
        if csc.nnz == 0:
            exact = 0
        elif csc.ncols <= exact_cols:
            exact = rank_exact(csc.to_sparse_int_matrix())
        elif csc.nrows <= exact_cols:
            exact = rank_exact(csc.to_sparse_int_matrix().transpose())
        if exact is not None:
            if modular > exact:
                raise AssertionError(
                    "modular rank exceeded exact rank in dimension %d" % k
                )
            if exact != modular:
                agreed = False
            say("rank d%d exact: %d (%.1fs)" % (k, exact, time.time() - t_rank))
        ranks[k] = exact if exact is not None else modular
        certified[k] = exact is not None
    # modular ranks bound the rational ones from below, and
    # im d_{k+1} <= ker d_k bounds rank d_k + rank d_{k+1} above by the
    # number of k-cells; where the two meet, both ranks are pinned exactly
    # with no exact elimination needed.
    for k in range(1, dim + 1):
        if ranks[k] + ranks.get(k + 1, 0) == counts[k]:
            certified[k] = True
            if k + 1 in ranks:
                certified[k + 1] = True
    rank_seconds = time.time() - t_rank

    betti = []
    for k in range(dim + 1):
        bk = counts[k] - ranks.get(k, 0) - ranks.get(k + 1, 0)
        if bk < 0:
            raise AssertionError("negative Betti number b_%d = %d" % (k, bk))
        betti.append(bk)

    euler = sum((-1) ** k * c for k, c in enumerate(counts))
    if euler != sum((-1) ** k * b for k, b in enumerate(betti)):
        raise AssertionError("Euler characteristic mismatch")

    connected = _connected_via_d1(counts[0], boundaries.get(1))

    report.update(
        cells=counts,
        betti=betti,
        ranks=ranks,
        ranks_by_prime=ranks_by_prime,
        certified=certified,
        agreed=agreed,
        dd_zero=dd_zero,
        connected=connected,
        euler=euler,
        natural_dim=natural_dim,
        truncated=truncated,
        raw_chains=raw_chains,
        nnz={k: boundaries[k].nnz for k in boundaries},
        cell_seconds=t_build - t_cells,
        build_seconds=build_seconds,
        dd_seconds=dd_seconds,
        rank_seconds=rank_seconds,
        total_seconds=time.time() - t0,
    )
    return report


def _connected_via_d1(n0, d1):
    """Union-find over the columns of d_1 (each column joins its face rows)."""
    if n0 == 0:
        return False
    if d1 is None:
        return n0 == 1
    parent = list(range(n0))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    indptr, rr = d1.indptr, d1.rows
    for j in range(d1.ncols):
        lo, hi = indptr[j], indptr[j + 1]
        for t in range(lo + 1, hi):
            parent[find(rr[lo])] = find(rr[t])
    return len({find(i) for i in range(n0)}) == 1
