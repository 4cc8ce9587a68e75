import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oddkh import cube
from oddkh.cube import FaceSignQuad


@pytest.mark.parametrize("n", range(1, 7))
def test_standard_sign_and_frame_valid(n):
    s, f = cube.standard_sign(n), cube.standard_frame(n)
    assert cube.sign_violations(s) == []
    assert cube.frame_violations(s, f) == []


@pytest.mark.parametrize("n", [2, 3, 4])
def test_cell_counts(n):
    assert len(list(cube.edges(n))) == n * 2 ** (n - 1)
    assert len(list(cube.faces(n))) == n * (n - 1) // 2 * 2 ** (n - 2)
    assert len(list(cube.cubes3(n))) == n * (n - 1) * (n - 2) // 6 * 2 ** max(n - 3, 0) * (n >= 3)


def test_standard_sign_values():
    s = cube.standard_sign(3)
    # edge 000 -> 010 flips coordinate 2; coordinate 1 is 0
    assert s[0b000, 1] == 0
    assert s[0b001, 1] == 1
    assert s[0b011, 2] == 0
    assert s[0b001, 2] == 1


@settings(deadline=None, max_examples=30)
@given(st.integers(2, 5), st.integers(0, 2 ** 32 - 1))
def test_coboundary_squares_to_zero(n, seed):
    rng = np.random.default_rng(seed)
    c0 = cube.random_cochain(n, 0, rng)
    assert not cube.coboundary(cube.coboundary(c0)).any()
    c1 = cube.random_cochain(n, 1, rng)
    assert not any(cube.coboundary(cube.coboundary(c1)).values())


@settings(deadline=None, max_examples=30)
@given(st.integers(2, 5), st.integers(0, 2 ** 32 - 1))
def test_solve_coboundary_roundtrip(n, seed):
    rng = np.random.default_rng(seed)
    target = cube.coboundary(cube.random_cochain(n, 1, rng))
    e = cube.solve_coboundary(target)
    assert e is not None
    assert (cube.coboundary(e) == target).all()


def test_solve_coboundary_rejects_non_cocycle():
    t = cube.zero_cochain(3, 2)
    t[0, 0, 1] = 1
    assert cube.solve_coboundary(t) is None


@settings(deadline=None, max_examples=40)
@given(st.integers(2, 4), st.integers(0, 1), st.integers(0, 1), st.integers(0, 2 ** 32 - 1))
def test_frame_change_preserves_framedness(n, delta, eps, seed):
    rng = np.random.default_rng(seed)
    s0, f0 = cube.standard_sign(n), cube.standard_frame(n)
    s1 = s0 ^ cube.coboundary(cube.random_cochain(n, 0, rng))
    assert cube.sign_violations(s1) == []
    f1 = cube.change_frame(s0, f0, s1, delta, eps)
    assert cube.frame_violations(s1, f1) == []
    f2 = cube.change_frame(s0, f0, s1, delta, eps, alt=True)
    assert cube.frame_violations(s1, f2) == []


@settings(deadline=None, max_examples=40)
@given(st.integers(2, 4), st.integers(0, 2 ** 32 - 1))
def test_frame_coboundary_stays_framed(n, seed):
    rng = np.random.default_rng(seed)
    s, f = cube.standard_sign(n), cube.standard_frame(n)
    f = f ^ cube.coboundary(cube.random_cochain(n, 1, rng))
    assert cube.frame_violations(s, f) == []


def test_frame_change_rejects_odd_pattern():
    with pytest.raises(ValueError):
        cube.frame_change(0, FaceSignQuad(0, 0, 0, 0), FaceSignQuad(1, 0, 0, 0), 0, 0)


def test_frame_change_identity():
    q = FaceSignQuad(0, 1, 1, 1)
    for f in (0, 1):
        assert cube.frame_change(f, q, q, 1, 1) == f
        assert cube.alt_frame_change(f, q, q, 1) == f


def test_frame_change_table_rows():
    old = FaceSignQuad(1, 0, 1, 1)
    assert cube.frame_change(0, old, FaceSignQuad(0, 1, 1, 1), 0, 0) == 1
    assert cube.frame_change(0, old, FaceSignQuad(1, 0, 0, 0), 0, 0) == 0
    assert cube.frame_change(0, old, FaceSignQuad(0, 0, 1, 0), 1, 0) == 0
    assert cube.frame_change(0, old, FaceSignQuad(1, 1, 0, 1), 1, 0) == 1
    assert cube.frame_change(0, old, FaceSignQuad(0, 0, 0, 1), 0, 1) == 1
    assert cube.frame_change(0, old, FaceSignQuad(1, 1, 1, 0), 0, 1) == 0
    assert cube.frame_change(0, old, FaceSignQuad(0, 1, 0, 0), 0, 0) == 1


def test_frame_change_not_involutive():
    # rows with one changed edge among {a, b} and one among {c, d} depend on
    # the starting quad, so changing back need not restore the framing
    old = FaceSignQuad(0, 0, 1, 1)
    new = FaceSignQuad(1, 0, 1, 0)
    there = cube.frame_change(0, old, new, 0, 0)
    back = cube.frame_change(there, new, old, 0, 0)
    assert back != 0


def test_face_quad_labels():
    s = cube.standard_sign(2)
    q = cube.face_quad(s, 0, 0, 1)
    assert q == FaceSignQuad(int(s[0, 0]), int(s[0, 1]), int(s[2, 0]), int(s[1, 1]))
    assert (q.a + q.b + q.c + q.d) % 2 == 1
