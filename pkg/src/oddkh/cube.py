"""Cochains on the cube [0,1]^n, sign and frame assignments, frame changes.

Vertices are integers (bit ``x`` is coordinate ``x+1``).  An edge is a
pair ``(v, x)`` with bit ``x`` of ``v`` clear, joining ``v`` to
``v | 1<<x``.  A square face is ``(w, x, y)`` with ``x < y`` and both
bits clear in its bottom vertex ``w``.  Cochains of degree 0, 1, 2 are
numpy arrays of shape ``(2^n,)``, ``(2^n, n)`` and ``(2^n, n, n)``;
entries off the valid index set are kept at zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterator, Optional, Sequence

import numpy as np


@dataclass(frozen=True, order=True)
class SubCube:
    """The sub-cube C_{top,bottom}; ordered by (bottom, top)."""

    bottom: tuple[int, ...]
    top: tuple[int, ...]

    @property
    def dim(self) -> int:
        return sum(self.top) - sum(self.bottom)

    def directions(self) -> tuple[int, ...]:
        return tuple(i for i, (a, b) in enumerate(zip(self.top, self.bottom)) if a != b)


@dataclass(frozen=True)
class FaceSignQuad:
    """Edge values around a square: a = (v1,w), b = (v2,w), c = (u,v2), d = (u,v1)."""

    a: int
    b: int
    c: int
    d: int


def bits(v: int, n: int) -> tuple[int, ...]:
    return tuple((v >> i) & 1 for i in range(n))


def vertex(u: Sequence[int]) -> int:
    return sum(int(b) << i for i, b in enumerate(u))


def popcount(v: int) -> int:
    return bin(v).count("1")


def enumerate_subcubes(n: int, k: int) -> list[SubCube]:
    """All k-dimensional sub-cubes of the n-cube, in canonical order."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    out = []
    for dirs in combinations(range(n), k):
        mask = sum(1 << i for i in dirs)
        for w in range(1 << n):
            if w & mask == 0:
                out.append(SubCube(bits(w, n), bits(w | mask, n)))
    out.sort()
    assert len(out) == comb(n, k) * 2 ** (n - k)
    return out


def edges(n: int) -> Iterator[tuple[int, int]]:
    for v in range(1 << n):
        for x in range(n):
            if not (v >> x) & 1:
                yield v, x


def faces(n: int) -> Iterator[tuple[int, int, int]]:
    for w in range(1 << n):
        for x in range(n):
            if (w >> x) & 1:
                continue
            for y in range(x + 1, n):
                if not (w >> y) & 1:
                    yield w, x, y


def cubes3(n: int) -> Iterator[tuple[int, int, int, int]]:
    for w in range(1 << n):
        free = [i for i in range(n) if not (w >> i) & 1]
        for x, y, z in combinations(free, 3):
            yield w, x, y, z


def zero_cochain(n: int, k: int) -> np.ndarray:
    shape = {0: (1 << n,), 1: (1 << n, n), 2: (1 << n, n, n)}[k]
    return np.zeros(shape, dtype=np.uint8)


def standard_sign(n: int) -> np.ndarray:
    """s*(C_{u,v}) = v_1 + ... + v_{i-1}, i the flipped coordinate."""
    s = zero_cochain(n, 1)
    for v, x in edges(n):
        s[v, x] = popcount(v & ((1 << x) - 1)) & 1
    return s


def standard_frame(n: int) -> np.ndarray:
    """f*(C_{u,w}) = (w_1+...+w_{i-1})(w_{i+1}+...+w_{j-1})."""
    f = zero_cochain(n, 2)
    for w, x, y in faces(n):
        lo = popcount(w & ((1 << x) - 1))
        mid = popcount(w & ((1 << y) - 1) & ~((1 << (x + 1)) - 1))
        f[w, x, y] = (lo * mid) & 1
    return f


def subcube_value(c: np.ndarray, cube: SubCube) -> int:
    """Evaluate a 1- or 2-cochain on a sub-cube given by bit tuples."""
    dirs = cube.directions()
    w = vertex(cube.bottom)
    if len(dirs) == 1:
        return int(c[w, dirs[0]])
    if len(dirs) == 2:
        return int(c[w, dirs[0], dirs[1]])
    raise ValueError("only edges and faces carry values here")


def coboundary(c: np.ndarray) -> np.ndarray:
    """CW coboundary over F2 of a 0-, 1- or 2-cochain.

    A 2-cochain maps to a dict keyed by 3-cubes ``(w, x, y, z)``.
    """
    n = c.shape[1] if c.ndim > 1 else (len(c).bit_length() - 1)
    if c.ndim == 1:
        out = zero_cochain(n, 1)
        for v, x in edges(n):
            out[v, x] = c[v] ^ c[v | (1 << x)]
        return out
    if c.ndim == 2:
        out = zero_cochain(n, 2)
        for w, x, y in faces(n):
            out[w, x, y] = c[w, x] ^ c[w, y] ^ c[w | (1 << x), y] ^ c[w | (1 << y), x]
        return out
    out3 = {}
    for w, x, y, z in cubes3(n):
        X, Y, Z = 1 << x, 1 << y, 1 << z
        out3[(w, x, y, z)] = int(c[w, x, y] ^ c[w, x, z] ^ c[w, y, z]
                                 ^ c[w | X, y, z] ^ c[w | Y, x, z] ^ c[w | Z, x, y])
    return out3


def sign_violations(s: np.ndarray) -> list[tuple[int, int, int]]:
    """Faces where the four edge values do not sum to 1."""
    n = s.shape[1]
    ds = coboundary(s)
    return [f for f in faces(n) if ds[f] != 1]


def frame_violations(s: np.ndarray, f: np.ndarray) -> list[tuple[int, int, int, int]]:
    """3-cubes where the compatibility identity fails."""
    n = s.shape[1]
    df = coboundary(f)
    bad = []
    for (w, x, y, z), val in df.items():
        if val != (s[w, x] ^ s[w, y] ^ s[w, z]):
            bad.append((w, x, y, z))
    return bad


def face_quad(s: np.ndarray, w: int, x: int, y: int) -> FaceSignQuad:
    """Sign quad of the face (w, x, y); v1 = w + e_x, v2 = w + e_y."""
    v1, v2 = w | (1 << x), w | (1 << y)
    return FaceSignQuad(int(s[w, x]), int(s[w, y]), int(s[v2, x]), int(s[v1, y]))


def _pattern(old: FaceSignQuad, new: FaceSignQuad) -> tuple[int, int, int, int]:
    diff = (old.a ^ new.a, old.b ^ new.b, old.c ^ new.c, old.d ^ new.d)
    if sum(diff) % 2:
        raise ValueError("odd number of changed edges: invalid sign data")
    return diff


def frame_change(f_old: int, old: FaceSignQuad, new: FaceSignQuad, delta: int, eps: int) -> int:
    """New framing of a face after the signs change from ``old`` to ``new``."""
    a, b, c, d = old.a, old.b, old.c, old.d
    diff = _pattern(old, new)
    if diff == (0, 0, 0, 0):
        ch = 0
    elif diff == (1, 1, 0, 0):
        ch = 1
    elif diff == (0, 0, 1, 1):
        ch = c + d
    elif diff == (1, 0, 0, 1):
        ch = delta + a
    elif diff == (0, 1, 1, 0):
        ch = delta + b
    elif diff == (1, 0, 1, 0):
        ch = delta + eps + b
    elif diff == (0, 1, 0, 1):
        ch = delta + eps + a
    else:
        ch = a + b
    return (f_old + ch) & 1


def alt_frame_change(f_old: int, old: FaceSignQuad, new: FaceSignQuad, eps: int) -> int:
    """The alternative frame-change rule, which never involves delta."""
    c, d = old.c, old.d
    diff = _pattern(old, new)
    if diff == (0, 0, 0, 0):
        ch = 0
    elif diff == (1, 1, 0, 0):
        ch = c + d
    elif diff == (0, 0, 1, 1):
        ch = 0
    elif diff == (1, 0, 0, 1):
        ch = d
    elif diff == (0, 1, 1, 0):
        ch = c
    elif diff == (1, 0, 1, 0):
        ch = eps + d
    elif diff == (0, 1, 0, 1):
        ch = eps + c
    else:
        ch = c + d
    return (f_old + ch) & 1


def change_frame(s: np.ndarray, f: np.ndarray, s_new: np.ndarray, delta: int, eps: int,
                 alt: bool = False) -> np.ndarray:
    """Apply the frame-change rule face by face."""
    n = s.shape[1]
    out = zero_cochain(n, 2)
    for w, x, y in faces(n):
        q_old, q_new = face_quad(s, w, x, y), face_quad(s_new, w, x, y)
        if alt:
            out[w, x, y] = alt_frame_change(int(f[w, x, y]), q_old, q_new, eps)
        else:
            out[w, x, y] = frame_change(int(f[w, x, y]), q_old, q_new, delta, eps)
    return out


def random_cochain(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random k-cochain supported on valid cells."""
    c = zero_cochain(n, k)
    if k == 0:
        c[:] = rng.integers(0, 2, size=c.shape)
    elif k == 1:
        for v, x in edges(n):
            c[v, x] = rng.integers(0, 2)
    else:
        for w, x, y in faces(n):
            c[w, x, y] = rng.integers(0, 2)
    return c


def solve_coboundary(target: np.ndarray, check: bool = True) -> Optional[np.ndarray]:
    """A 1-cochain e with coboundary(e) == target on faces, or None.

    Edges from a vertex whose lower coordinates are all 0 form a spanning
    tree; ``e`` vanishes there and every other edge is forced by one face.
    """
    n = target.shape[1]
    e = zero_cochain(n, 1)
    done = np.zeros((1 << n, n), dtype=bool)
    # process edges so that every face used has its other three edges done
    for x in range(n):
        low = (1 << x) - 1
        for v in sorted(range(1 << n), key=lambda t: popcount(t & low)):
            if (v >> x) & 1:
                continue
            if v & low == 0:
                done[v, x] = True
                continue
            j = (v & low).bit_length() - 1
            w = v & ~(1 << j)
            # face (w, j, x): edges (w,j), (w,x), (w|e_j = v, x), (w|e_x, j)
            assert done[w, x] and done[w, j] and done[w | (1 << x), j]
            e[v, x] = target[w, j, x] ^ e[w, j] ^ e[w, x] ^ e[w | (1 << x), j]
            done[v, x] = True
    if check and (coboundary(e) != target).any():
        return None
    return e
