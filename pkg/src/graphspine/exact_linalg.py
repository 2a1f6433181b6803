"""Sparse integer matrices and exact / modular rank computation.

Boundary matrices of the quotient spine are sparse with entries in
{-1, 0, +1}, but fill-in during elimination produces larger integers, so the
exact path works over arbitrary-precision integers with fraction-free
elimination (gcd-reduced cross-multiplication, which strips at least the
one-step Bareiss factor whenever it divides) and Markowitz pivoting to limit
fill.  The modular path eliminates over GF(p) for a few random word-sized
primes and takes the maximum rank seen; rank over GF(p) can only undercount
the rational rank, never overcount, so the max is a certified lower bound and
equals the rational rank unless every chosen prime divides the same nonzero
minor.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from math import gcd

MODULAR_PRIME_BITS = 31


class SparseIntMatrix:
    """Integer matrix stored as dict-of-rows {row: {col: value}}, zero-free."""

    def __init__(self, nrows, ncols, entries=None):
        nrows, ncols = int(nrows), int(ncols)
        if nrows < 0 or ncols < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        self.nrows = nrows
        self.ncols = ncols
        self.rows = {}
        if entries:
            for (i, j), v in entries.items() if isinstance(entries, dict) else entries:
                self.add(i, j, v)

    def add(self, i, j, v):
        """Accumulate v into entry (i, j), dropping the entry if it cancels."""
        i, j, v = int(i), int(j), int(v)
        if not (0 <= i < self.nrows and 0 <= j < self.ncols):
            raise IndexError("entry (%d, %d) outside %dx%d" % (i, j, self.nrows, self.ncols))
        if v == 0:
            return
        row = self.rows.setdefault(i, {})
        w = row.get(j, 0) + v
        if w == 0:
            row.pop(j, None)
            if not row:
                del self.rows[i]
        else:
            row[j] = w

    def get(self, i, j):
        return self.rows.get(i, {}).get(j, 0)

    @property
    def nnz(self):
        return sum(len(r) for r in self.rows.values())

    def items(self):
        """All nonzero entries as ((row, col), value), in (col, row) order."""
        out = []
        for i, row in self.rows.items():
            for j, v in row.items():
                out.append(((i, j), v))
        out.sort(key=lambda t: (t[0][1], t[0][0]))
        return out

    def copy_rows(self):
        return {i: dict(r) for i, r in self.rows.items()}

    def transpose(self):
        m = SparseIntMatrix(self.ncols, self.nrows)
        for i, row in self.rows.items():
            for j, v in row.items():
                m.add(j, i, v)
        return m

    def matmul(self, other):
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        out = SparseIntMatrix(self.nrows, other.ncols)
        for i, row in self.rows.items():
            acc = {}
            for k, v in row.items():
                orow = other.rows.get(k)
                if not orow:
                    continue
                for j, w in orow.items():
                    acc[j] = acc.get(j, 0) + v * w
            for j, val in acc.items():
                if val:
                    out.add(i, j, val)
        return out

    def is_zero(self):
        return not self.rows

    def __eq__(self, other):
        return (
            isinstance(other, SparseIntMatrix)
            and self.nrows == other.nrows
            and self.ncols == other.ncols
            and self.rows == other.rows
        )

    def __repr__(self):
        return "SparseIntMatrix(%dx%d, nnz=%d)" % (self.nrows, self.ncols, self.nnz)


def rank_exact(matrix):
    """Rational rank by fraction-free elimination over Python integers.

    Each elimination replaces a target row r (entry c in the pivot column) by
    p*r - c*pivot_row, a nonzero rational scaling plus shear, so the rank is
    untouched and no fractions ever appear.  The updated row is then divided
    by the gcd of its entries; whenever the classical one-step Bareiss factor
    divides the row this strips at least that much, so intermediate entries
    stay at most Bareiss-sized (bordered-minor sized) and usually smaller.
    Pivots are chosen by Markowitz cost (fewest fill candidates), breaking
    ties by smaller absolute pivot value; singleton rows and columns are
    fill-free pivots and cascade through a queue ahead of any scan.
    """
    rows = matrix.copy_rows()
    cols = {}
    for i, row in rows.items():
        for j in row:
            cols.setdefault(j, set()).add(i)

    queue = deque()
    for i, row in rows.items():
        if len(row) == 1:
            queue.append((0, i))
    for j, owners in cols.items():
        if len(owners) == 1:
            queue.append((1, j))

    rank = 0

    def eliminate(pi, pj):
        nonlocal rank
        pivot_row = rows.pop(pi)
        pivot = pivot_row[pj]
        for j in pivot_row:
            owners = cols[j]
            owners.discard(pi)
            if not owners:
                del cols[j]
            elif len(owners) == 1:
                queue.append((1, j))
        rank += 1
        others = cols.pop(pj, None)
        if not others:
            return
        # a singleton pivot row only scales other rows' remaining entries,
        # which cannot change the rank, so just drop their pivot-column entry
        plain_drop = len(pivot_row) == 1
        for i in others:
            row = rows[i]
            factor = row.pop(pj)
            if not plain_drop:
                for j in list(row):
                    if j not in pivot_row:
                        row[j] *= pivot
                for j, v in pivot_row.items():
                    if j == pj:
                        continue
                    w = row.get(j, 0) * pivot - factor * v
                    old = row.get(j, 0)
                    if w == 0:
                        if j in row:
                            del row[j]
                            owners2 = cols[j]
                            owners2.discard(i)
                            if not owners2:
                                del cols[j]
                            elif len(owners2) == 1:
                                queue.append((1, j))
                    else:
                        row[j] = w
                        if old == 0:
                            cols.setdefault(j, set()).add(i)
                if row:
                    g = 0
                    for v in row.values():
                        g = gcd(g, v)
                        if g == 1:
                            break
                    if g > 1:
                        for j in row:
                            row[j] //= g
            if not row:
                del rows[i]
            elif len(row) == 1:
                queue.append((0, i))

    while rows:
        while queue:
            kind, idx = queue.popleft()
            if kind == 0:
                row = rows.get(idx)
                if row is None or len(row) != 1:
                    continue
                eliminate(idx, next(iter(row)))
            else:
                owners = cols.get(idx)
                if owners is None or len(owners) != 1:
                    continue
                eliminate(next(iter(owners)), idx)
        if not rows:
            break
        best = None
        for j, owners in cols.items():
            cc = len(owners)
            for i in owners:
                rc = len(rows[i])
                cost = (rc - 1) * (cc - 1)
                v = abs(rows[i][j])
                cand = (cost, v, i, j)
                if best is None or cand < best:
                    best = cand
        if best is None:
            break
        _, _, pi, pj = best
        eliminate(pi, pj)
    return rank


def _elimination_rank_mod(rows_in, p):
    """Rank over GF(p) of a dict-of-rows integer matrix (copies, then
    reduces mod p and eliminates)."""
    rows = {}
    for i, row in rows_in.items():
        r = {}
        for j, v in row.items():
            w = v % p
            if w:
                r[j] = w
        if r:
            rows[i] = r
    return _elimination_rank_mod_inplace(rows, p)


def _elimination_rank_mod_inplace(rows, p):
    """Rank over GF(p) by sparse Gaussian elimination.

    `rows` maps row id to {column: value in [1, p)} and is consumed.

    Pivot order: singleton columns first (their elimination is fill-free),
    then a row from the smallest row-size bucket, taking its entry with the
    fewest column owners — a constant-time Markowitz-style choice.  Size-1
    rows are likewise fill-free, so on near-acyclic matrices (boundary
    matrices of mostly-collapsible complexes) almost the whole elimination
    cascades in linear time.
    """
    cols = {}
    for i, row in rows.items():
        for j in row:
            cols.setdefault(j, set()).add(i)

    buckets = {}

    def place(i, size):
        buckets.setdefault(size, set()).add(i)

    def displace(i, size):
        b = buckets.get(size)
        if b is not None:
            b.discard(i)
            if not b:
                del buckets[size]

    for i, row in rows.items():
        place(i, len(row))

    col_queue = deque(j for j, owners in cols.items() if len(owners) == 1)
    rank = 0

    def eliminate(pi, pj):
        nonlocal rank
        pivot_row = rows.pop(pi)
        displace(pi, len(pivot_row))
        for j in pivot_row:
            owners = cols[j]
            owners.discard(pi)
            if not owners:
                del cols[j]
            elif len(owners) == 1:
                col_queue.append(j)
        rank += 1
        others = cols.pop(pj, None)
        if not others:
            return
        inv = pow(pivot_row[pj], p - 2, p)
        scaled = {j: (v * inv) % p for j, v in pivot_row.items()}
        for i in others:
            row = rows[i]
            old_len = len(row)
            factor = row[pj]
            for j, v in scaled.items():
                if j == pj:
                    del row[j]
                    continue
                old = row.get(j, 0)
                w = (old - factor * v) % p
                if w == 0:
                    if old:
                        del row[j]
                        owners = cols[j]
                        owners.discard(i)
                        if not owners:
                            del cols[j]
                        elif len(owners) == 1:
                            col_queue.append(j)
                else:
                    row[j] = w
                    if old == 0:
                        cols.setdefault(j, set()).add(i)
            displace(i, old_len)
            if not row:
                del rows[i]
            else:
                place(i, len(row))

    while rows:
        while col_queue:
            j = col_queue.popleft()
            owners = cols.get(j)
            if owners is None or len(owners) != 1:
                continue
            eliminate(next(iter(owners)), j)
        if not rows:
            break
        size = min(buckets)
        pi = next(iter(buckets[size]))
        row = rows[pi]
        pj = min(row, key=lambda j: (len(cols[j]), j))
        eliminate(pi, pj)
    return rank


@dataclass(frozen=True)
class ModularRankResult:
    rank: int
    primes: tuple
    ranks: tuple

    @property
    def agreed(self):
        """True when every prime reported the same rank."""
        return len(set(self.ranks)) <= 1


def rank_modular(matrix, primes=3, seed=0):
    """Max rank of the matrix over GF(p) for `primes` random 31-bit primes.

    The primes are drawn from a seeded generator so repeated runs agree.  The
    result's rank is a lower bound for the rational rank and equals it unless
    all chosen primes divide a common nonzero minor; `agreed` records whether
    the per-prime ranks coincided."""
    chosen = choose_primes(primes, seed)
    ranks = tuple(_elimination_rank_mod(matrix.rows, p) for p in chosen)
    return ModularRankResult(max(ranks), tuple(chosen), ranks)


def choose_primes(primes, seed):
    """The distinct random 31-bit primes a given seed yields, as a tuple."""
    if primes < 1:
        raise ValueError("need at least one prime")
    rng = random.Random(seed)
    chosen = []
    while len(chosen) < primes:
        p = _random_prime(rng, MODULAR_PRIME_BITS)
        if p not in chosen:
            chosen.append(p)
    return tuple(chosen)


def _random_prime(rng, bits):
    while True:
        c = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        if _is_prime(c):
            return c


def _is_prime(num):
    """Deterministic Miller-Rabin for num < 3,317,044,064,679,887,385,961,981."""
    if num < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if num % p == 0:
            return num == p
    d = num - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, num)
        if x in (1, num - 1):
            continue
        for _ in range(r - 1):
            x = x * x % num
            if x == num - 1:
                break
        else:
            return False
    return True
