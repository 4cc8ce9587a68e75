import itertools

import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from oddkh.exactla import (
    Echelon,
    F2Matrix,
    IntMatrix,
    Subspace,
    elementary_divisors,
    image_basis,
    kernel_basis,
    quotient_reps,
    rank_f2,
    rref,
    smith_normal_form,
    solve_f2,
)


def f2_matrices(max_rows=7, max_cols=7):
    return st.integers(0, max_rows).flatmap(
        lambda r: st.integers(0, max_cols).flatmap(
            lambda c: st.lists(st.integers(0, (1 << c) - 1), min_size=r, max_size=r).map(
                lambda rows: F2Matrix(r, c, rows))))


def brute_rank(vectors):
    """Size of the span, found by enumeration, as a log2."""
    span = {0}
    for v in vectors:
        span |= {x ^ v for x in span}
    return len(span).bit_length() - 1


def test_rank_small_examples():
    assert rank_f2([]) == 0
    assert rank_f2([0, 0]) == 0
    assert rank_f2([0b11, 0b01, 0b10]) == 2
    assert rank_f2([1, 2, 4, 8]) == 4


@given(st.lists(st.integers(0, 255), max_size=8))
def test_rank_matches_span_size(vs):
    assert rank_f2(vs) == brute_rank(vs)


@given(f2_matrices())
def test_rank_nullity(a):
    assert len(kernel_basis(a)) + len(image_basis(a)) == a.ncols


@given(f2_matrices())
def test_kernel_vectors_are_killed(a):
    for x in kernel_basis(a).basis:
        assert a.apply(x) == 0


@given(f2_matrices(), st.integers(0, 127))
def test_solve_f2(a, x):
    x &= (1 << a.ncols) - 1
    b = a.apply(x)
    y = solve_f2(a, b)
    assert y is not None and a.apply(y) == b


def test_solve_f2_inconsistent():
    a = F2Matrix.from_dense([[1, 1], [1, 1]])
    assert solve_f2(a, 0b01) is None


@given(f2_matrices())
def test_rref_pivots_and_row_space(a):
    red, piv = rref(a)
    assert len(piv) == rank_f2(a.rows)
    for k, j in enumerate(piv):
        for i in range(red.nrows):
            assert ((red.rows[i] >> j) & 1) == (i == k)
    assert Subspace.span(a.ncols, red.rows).basis == Subspace.span(a.ncols, a.rows).basis


def test_echelon_dependency_tags():
    e = Echelon()
    assert e.add(0b011, 0b001) is None
    assert e.add(0b110, 0b010) is None
    assert e.add(0b101, 0b100) == 0b111
    assert e.coordinates(0b101) == 0b011


@given(st.lists(st.integers(1, 63), min_size=1, max_size=6))
def test_quotient_reps_count(vs):
    v = Subspace.span(6, vs)
    w = Subspace.span(6, vs[:1])
    assert len(quotient_reps(v, w)) == len(v) - len(w)


def test_transpose_roundtrip():
    a = F2Matrix.from_dense([[1, 0, 1], [0, 1, 1]])
    assert a.transpose().transpose() == a
    assert a.transpose().to_dense() == [[1, 0], [0, 1], [1, 1]]


def _sympy_divisors(dense):
    m = sympy.Matrix(dense)
    if m.rows == 0 or m.cols == 0:
        return []
    d = sympy_snf(m, domain=sympy.ZZ)
    return [abs(int(d[i, i])) for i in range(min(m.rows, m.cols))]


int_matrices = st.integers(1, 5).flatmap(
    lambda r: st.integers(1, 5).flatmap(
        lambda c: st.lists(st.lists(st.integers(-6, 6), min_size=c, max_size=c),
                           min_size=r, max_size=r)))


@settings(max_examples=60, deadline=None)
@given(int_matrices)
def test_snf_matches_sympy(dense):
    diag, u, v = smith_normal_form(IntMatrix.from_dense(dense))
    assert [abs(x) for x in diag] == _sympy_divisors(dense)
    for a, b in zip(diag, diag[1:]):
        if b:
            assert a and b % a == 0


@settings(max_examples=60, deadline=None)
@given(int_matrices)
def test_snf_transforms(dense):
    diag, u, v = smith_normal_form(IntMatrix.from_dense(dense))
    nr, nc = len(dense), len(dense[0])
    uav = [[sum(u[i][k] * dense[k][t] * v[t][j] for k in range(nr) for t in range(nc))
            for j in range(nc)] for i in range(nr)]
    for i, j in itertools.product(range(nr), range(nc)):
        assert uav[i][j] == (diag[i] if i == j else 0)
    assert abs(sympy.Matrix(u).det()) == 1 and abs(sympy.Matrix(v).det()) == 1


@settings(max_examples=60, deadline=None)
@given(int_matrices)
def test_elementary_divisors_match_sympy(dense):
    nr, nc = len(dense), len(dense[0])
    cols = [{i: dense[i][j] for i in range(nr) if dense[i][j]} for j in range(nc)]
    rank, tors = elementary_divisors(cols, nr)
    ref = [x for x in _sympy_divisors(dense) if x]
    assert rank == len(ref)
    assert tors == [x for x in ref if x > 1]
