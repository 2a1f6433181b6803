"""Exact and modular sparse integer rank computation.

The rank routines here back every Betti number in the package, so they get
an independent oracle: dense Gaussian elimination over Fraction.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from graphspine.exact_linalg import (
    ModularRankResult,
    SparseIntMatrix,
    _is_prime,
    choose_primes,
    rank_exact,
    rank_modular,
)


def fraction_rank(nrows, ncols, entries):
    """Textbook row reduction over Q."""
    rows = [[Fraction(0)] * ncols for _ in range(nrows)]
    for (i, j), v in entries.items():
        rows[i][j] = Fraction(v)
    rank = 0
    col = 0
    for col in range(ncols):
        piv = next((r for r in range(rank, nrows) if rows[r][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        lead = rows[rank][col]
        for r in range(nrows):
            if r != rank and rows[r][col]:
                fac = rows[r][col] / lead
                rows[r] = [a - fac * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
        if rank == nrows:
            break
    return rank


def from_entries(nrows, ncols, entries):
    m = SparseIntMatrix(nrows, ncols)
    for (i, j), v in entries.items():
        m.add(i, j, v)
    return m


@st.composite
def sparse_entries(draw):
    nrows = draw(st.integers(1, 8))
    ncols = draw(st.integers(1, 8))
    n_entries = draw(st.integers(0, nrows * ncols))
    entries = {}
    for _ in range(n_entries):
        i = draw(st.integers(0, nrows - 1))
        j = draw(st.integers(0, ncols - 1))
        v = draw(st.integers(-9, 9))
        if v:
            entries[(i, j)] = entries.get((i, j), 0) + v
    entries = {k: v for k, v in entries.items() if v}
    return nrows, ncols, entries


def test_matrix_add_accumulates_and_drops_zeros():
    m = SparseIntMatrix(2, 2)
    m.add(0, 0, 3)
    m.add(0, 0, -3)
    m.add(1, 1, 5)
    assert m.get(0, 0) == 0
    assert m.get(1, 1) == 5
    assert m.nnz == 1
    with pytest.raises(IndexError):
        m.add(2, 0, 1)
    with pytest.raises(IndexError):
        m.add(0, -1, 1)


def test_matrix_items_order_and_transpose():
    m = from_entries(3, 2, {(2, 0): 1, (0, 1): 2, (1, 0): -1})
    assert list(m.items()) == [((1, 0), -1), ((2, 0), 1), ((0, 1), 2)]
    t = m.transpose()
    assert t.get(0, 2) == 1 and t.get(1, 0) == 2 and t.get(0, 1) == -1
    assert t.transpose() == m


def test_matmul_small():
    a = from_entries(2, 3, {(0, 0): 1, (0, 2): 2, (1, 1): -1})
    b = from_entries(3, 2, {(0, 0): 3, (2, 1): 4, (1, 0): 5})
    ab = a.matmul(b)
    assert ab.get(0, 0) == 3 and ab.get(0, 1) == 8
    assert ab.get(1, 0) == -5 and ab.get(1, 1) == 0
    with pytest.raises(ValueError):
        b.matmul(a.transpose())


def test_rank_exact_known_values():
    assert rank_exact(SparseIntMatrix(4, 5)) == 0
    ident = from_entries(3, 3, {(i, i): 1 for i in range(3)})
    assert rank_exact(ident) == 3
    # two proportional rows
    m = from_entries(2, 2, {(0, 0): 2, (0, 1): 4, (1, 0): 3, (1, 1): 6})
    assert rank_exact(m) == 1
    # a minor divisible by a small prime but nonzero
    m2 = from_entries(2, 2, {(0, 0): 2, (1, 1): 2})
    assert rank_exact(m2) == 2


@given(sparse_entries())
@settings(max_examples=120, deadline=None)
def test_rank_exact_matches_fraction_oracle(data):
    nrows, ncols, entries = data
    m = from_entries(nrows, ncols, entries)
    assert rank_exact(m) == fraction_rank(nrows, ncols, entries)


@given(sparse_entries())
@settings(max_examples=60, deadline=None)
def test_rank_is_transpose_and_permutation_invariant(data):
    nrows, ncols, entries = data
    m = from_entries(nrows, ncols, entries)
    r = rank_exact(m)
    assert rank_exact(m.transpose()) == r
    flipped = {(nrows - 1 - i, ncols - 1 - j): v for (i, j), v in entries.items()}
    assert rank_exact(from_entries(nrows, ncols, flipped)) == r


@given(sparse_entries(), st.integers(0, 5))
@settings(max_examples=60, deadline=None)
def test_modular_rank_bounded_by_exact(data, seed):
    nrows, ncols, entries = data
    m = from_entries(nrows, ncols, entries)
    exact = rank_exact(m)
    res = rank_modular(m, primes=2, seed=seed)
    assert isinstance(res, ModularRankResult)
    assert res.rank <= exact
    assert all(r <= exact for r in res.ranks)
    # 31-bit primes cannot divide any minor of a tiny matrix with entries
    # bounded by 9, so equality must hold here
    assert res.rank == exact
    assert res.agreed


def test_rank_modular_is_deterministic():
    m = from_entries(3, 3, {(0, 0): 1, (1, 1): 2, (2, 2): 3, (0, 2): 7})
    a = rank_modular(m, primes=3, seed=11)
    b = rank_modular(m, primes=3, seed=11)
    assert a == b


def test_choose_primes_properties():
    ps = choose_primes(4, seed=0)
    assert len(ps) == len(set(ps)) == 4
    assert all(_is_prime(p) and p.bit_length() == 31 for p in ps)
    assert choose_primes(4, seed=0) == ps
    assert choose_primes(4, seed=1) != ps
    with pytest.raises(ValueError):
        choose_primes(0, seed=0)


def test_is_prime_spot_checks():
    primes = [2, 3, 5, 7, 31, 97, 2**31 - 1]
    composites = [0, 1, 4, 9, 91, 561, 2**31 - 2, 7917]
    assert all(_is_prime(p) for p in primes)
    assert not any(_is_prime(c) for c in composites)


def test_is_zero_and_copy_rows():
    m = SparseIntMatrix(2, 2)
    assert m.is_zero()
    m.add(0, 1, 4)
    assert not m.is_zero()
    rows = m.copy_rows()
    rows[0][1] = 99
    assert m.get(0, 1) == 4, "copy_rows must not alias the matrix"
