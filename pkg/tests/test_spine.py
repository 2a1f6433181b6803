"""The forest-chain cell complexes and their Betti numbers, built two ways
(dict-of-rows in memory, compressed columns streamed) and cross-checked.

Frozen cell counts and ranks below were derived once from brute-force chain
enumeration on the small catalogs and have been stable across rewrites.
"""

import pytest

from graphspine.catalogs import enumerate_graphs
from graphspine.exact_linalg import SparseIntMatrix, rank_exact
from graphspine.graphs import canonical_form
from graphspine.morphisms import collapse_forest
from graphspine.spine import (
    betti_numbers,
    betti_report_dict,
    build_spine_complex,
    cross_check_two_cells,
    euler_characteristic,
    max_chain_dimension,
    orientation_safety_check,
)
from graphspine.spine_stream import (
    CSCBoundary,
    _rows_mod_p,
    _spa_echelon,
    stream_spine_betti,
)


@pytest.fixture(scope="module")
def complex_2_0():
    return build_spine_complex(2, 0)


@pytest.fixture(scope="module")
def complex_2_1():
    return build_spine_complex(2, 1)


@pytest.fixture(scope="module")
def complex_3_0():
    return build_spine_complex(3, 0)


def test_rank_two_cells_and_betti(complex_2_0):
    c = complex_2_0
    assert c.cell_counts() == [3, 2]
    ok, where = c.check_dd_zero()
    assert ok, "dd != 0 at %s" % where
    assert euler_characteristic(c) == 1
    assert c.is_connected()
    rep = betti_numbers(c, mode="exact")
    assert list(rep) == [1, 0]
    assert rep.certified == {0: True, 1: True}


def test_rank_two_boundary_matrix(complex_2_0, rose2, theta, dumbbell):
    """Both 1-cells collapse a single edge and land on the rose."""
    c = complex_2_0
    cat = c.catalog
    i_rose = cat.index_of(rose2)
    i_theta = cat.index_of(theta)
    i_dumb = cat.index_of(dumbbell)
    d1 = c.boundary(1)
    assert (d1.nrows, d1.ncols) == (3, 2)
    cols = {}
    for (i, j), v in d1.items():
        cols.setdefault(j, {})[i] = v
    expected = [{i_rose: 1, i_theta: -1}, {i_rose: 1, i_dumb: -1}]
    assert sorted(cols.values(), key=sorted) == sorted(expected, key=sorted)


def test_one_cell_hosts_match_their_columns(complex_2_0):
    # the -1 entry of each column sits at the row of the cell's own graph
    c = complex_2_0
    for j, cell in enumerate(c.cells[1]):
        assert c.boundary(1).get(cell.graph, j) == -1


def test_forestless_catalogs_give_zero_dimensional_complexes():
    for n, s in [(1, 1), (0, 2), (0, 3)]:
        c = build_spine_complex(n, s)
        assert c.dimension == 0
        assert c.cell_counts() == [len(enumerate_graphs(n, s))]
        rep = betti_numbers(c, mode="exact")
        assert list(rep) == [1]


def test_rank_two_one_leaf_complex(complex_2_1):
    c = complex_2_1
    assert c.cell_counts() == [7, 12, 6]
    ok, _ = c.check_dd_zero()
    assert ok
    assert euler_characteristic(c) == 1
    rep = betti_numbers(c, mode="exact")
    assert list(rep) == [1, 0, 0]
    assert all(rep.certified.values())


def test_rank_three_complex(complex_3_0):
    c = complex_3_0
    assert c.cell_counts() == [15, 49, 58, 23]
    ok, _ = c.check_dd_zero()
    assert ok
    assert euler_characteristic(c) == 1
    rep = betti_numbers(c, mode="exact")
    assert list(rep) == [1, 0, 0, 0]


def test_max_chain_dimension_matches_metadata(complex_3_0):
    cat = enumerate_graphs(3, 0)
    assert max_chain_dimension(cat) == 3
    assert complex_3_0.metadata["natural_dim"] == 3
    assert complex_3_0.metadata.get("truncated", False) is False


def test_two_cell_cross_check(complex_2_1, complex_3_0):
    assert cross_check_two_cells(complex_2_1) == 6
    assert cross_check_two_cells(complex_3_0) == 58


def test_orientation_safety(complex_2_1, complex_3_0):
    assert orientation_safety_check(complex_2_1) > 0
    assert orientation_safety_check(complex_3_0) > 0


def test_modes_agree(complex_2_1):
    exact = betti_numbers(complex_2_1, mode="exact")
    modular = betti_numbers(complex_2_1, mode="modular")
    auto = betti_numbers(complex_2_1, mode="auto")
    assert list(exact) == list(modular) == list(auto)
    assert exact.ranks == modular.ranks == auto.ranks
    assert not any(modular.certified.values()) or complex_2_1.dimension == 0
    assert all(auto.certified.values())
    with pytest.raises(ValueError):
        betti_numbers(complex_2_1, mode="fast")


def test_truncation_metadata():
    c = build_spine_complex(3, 0, max_dim=1)
    assert c.dimension == 1
    assert c.metadata["truncated"] is True
    assert c.metadata["natural_dim"] == 3
    assert c.cell_counts() == [15, 49]
    rep = betti_numbers(c, mode="exact")
    assert rep[0] == 1
    # with d2 cut off, every 1-cycle of the truncation survives
    assert rep[1] == 49 - rep.ranks[1]


def test_boundary_text_format(complex_2_0):
    text = complex_2_0.boundary_text(1)
    lines = text.strip().splitlines()
    k, nrows, ncols, nnz = map(int, lines[0].split())
    assert (k, nrows, ncols) == (1, 3, 2)
    assert nnz == len(lines) - 1
    triplets = [tuple(map(int, ln.split())) for ln in lines[1:]]
    assert triplets == sorted(triplets, key=lambda t: (t[1], t[0]))
    m = complex_2_0.boundary(1)
    assert [((i, j), v) for i, j, v in triplets] == m.items()


def test_report_dict_keys(complex_2_1):
    rep = betti_numbers(complex_2_1, mode="auto")
    d = betti_report_dict(complex_2_1, rep)
    assert d["betti"] == [1, 0, 0]
    assert d["cells"] == [7, 12, 6]
    assert d["euler"] == 1
    assert d["connected"] is True
    assert d["truncated"] is False
    assert d["natural_dim"] == 2
    assert set(d) >= {"n", "s", "mode", "ranks", "certified", "agreed"}


@pytest.mark.parametrize("n,s", [(2, 0), (1, 1), (2, 1), (3, 0)])
def test_streamed_pipeline_matches_in_memory(n, s):
    c = build_spine_complex(n, s)
    rep = betti_numbers(c, mode="exact")
    stream = stream_spine_betti(n, s, primes=2, seed=0)
    assert stream["cells"] == c.cell_counts()
    assert stream["betti"] == list(rep)
    assert stream["ranks"] == rep.ranks
    assert stream["dd_zero"] is True
    assert stream["connected"] == c.is_connected()
    assert stream["euler"] == euler_characteristic(c)
    assert all(stream["certified"].values())
    for k, per_prime in stream["ranks_by_prime"].items():
        assert len(per_prime) == 2
        assert max(per_prime) <= rep.ranks[k]


def test_streamed_boundaries_match_in_memory(monkeypatch):
    import graphspine.spine_stream as ss

    captured = []
    orig = ss._dd_zero_blocks

    def capture(a, b, block=200_000):
        captured.append(a)
        captured.append(b)
        return orig(a, b, block)

    monkeypatch.setattr(ss, "_dd_zero_blocks", capture)
    stream_spine_betti(2, 1, primes=2, seed=0)
    c = build_spine_complex(2, 1)
    by_shape = {(m.nrows, m.ncols): m for m in captured}
    for k in range(1, c.dimension + 1):
        m = c.boundary(k)
        csc = by_shape[(m.nrows, m.ncols)]
        mem = [(j, i, v) for (i, j), v in m.items()]
        got = [(j, r, v) for j in range(csc.ncols) for r, v in csc.column(j)]
        assert got == mem, "boundary %d triplets differ between pipelines" % k


def test_streamed_modular_only_mode():
    rep = stream_spine_betti(2, 1, primes=2, seed=0, exact_cols=0)
    assert rep["betti"] == [1, 0, 0]
    assert rep["ranks"] == {1: 6, 2: 6}
    # no exact elimination ran, but 6 + 6 == 12 one-cells and 6 + 0 == 6
    # two-cells saturate the kernel bounds, certifying both ranks anyway
    assert rep["certified"] == {1: True, 2: True}


def test_streamed_truncation_and_empty():
    rep = stream_spine_betti(3, 0, primes=2, seed=0, max_dim=1)
    assert rep["truncated"] is True
    assert rep["cells"] == [15, 49]
    empty = stream_spine_betti(1, 0)
    assert empty["cells"] == [] and empty["betti"] == []
    assert empty["connected"] is False


def _csc_from_dense(rows):
    csc = CSCBoundary(len(rows))
    for j in range(len(rows[0]) if rows else 0):
        col = [(i, rows[i][j]) for i in range(len(rows)) if rows[i][j]]
        csc.push_column(col)
    return csc


@pytest.mark.parametrize(
    "dense",
    [
        [[1, 0], [0, 1]],
        [[1, 1], [1, 1]],
        [[1, 1, 0], [0, 1, 1], [1, 0, 1]],  # cycle: every row hits a pivot
        [[1, 0, 0], [1, 1, 0], [0, 1, 1]],
        [[0, 0], [0, 0]],
        [[2, 3, 0], [0, 1, -1], [0, 0, 4]],
        [[1, 2, 3], [2, 4, 6], [1, 1, 1], [0, 1, 2]],  # proportional rows
    ],
)
def test_spa_echelon_matches_exact_rank(dense):
    p = 2147483629
    csc = _csc_from_dense(dense)
    starts, ends, cc, vv = _rows_mod_p(csc, p)
    rank, leads = _spa_echelon(starts, ends, cc, vv, csc.ncols, p)
    m = SparseIntMatrix(len(dense), len(dense[0]))
    for i, row in enumerate(dense):
        for j, v in enumerate(row):
            if v:
                m.add(i, j, v)
    assert rank == rank_exact(m)
    assert len(leads) == rank
    assert sorted(set(leads.tolist())) == leads.tolist()


def test_row_clearing_preserves_rank():
    # d1 . d2 = 0 on a real complex; deleting d1's pivot lead rows from d2
    # must not change d2's rank
    p = 2147483629
    c = build_spine_complex(3, 0)
    d2 = c.boundary(2)
    full = rank_exact(d2)
    d1 = c.boundary(1)
    csc1 = _csc_from_dense([[d1.get(i, j) for j in range(49)] for i in range(15)])
    starts, ends, cc, vv = _rows_mod_p(csc1, p)
    r1, leads = _spa_echelon(starts, ends, cc, vv, csc1.ncols, p)
    assert r1 == rank_exact(d1)
    csc2 = _csc_from_dense([[d2.get(i, j) for j in range(58)] for i in range(49)])
    starts, ends, cc, vv = _rows_mod_p(csc2, p, skip_rows=leads)
    r2, _ = _spa_echelon(starts, ends, cc, vv, csc2.ncols, p)
    assert r2 == full
