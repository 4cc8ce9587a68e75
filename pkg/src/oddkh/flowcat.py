"""Framed 1-flow categories covering the cube, built from signed functor data.

Objects are global generator ids of a functor over the cube (a
``KhovanovCube`` or the trivial functor of ``cube_functor``).  A 0-dim
moduli point is a nonzero differential entry; entry ``e`` is a point of
M(e_tgt[e], e_src[e]), going from the higher object down to the lower
one.  An interval of M(a, c) is recorded by its two boundary paths
(B1, A1) and (B2, A2), A in M(a, b) and B in M(b, c), the first passing
through the middle vertex that flips the lower cube coordinate first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import cube
from .cube import FaceSignQuad


class CoverError(RuntimeError):
    """Functor data without a sign-preserving composition bijection."""


@dataclass(frozen=True)
class Interval:
    top: int
    bottom: int
    first: tuple[int, int]      # (B1, A1)
    second: tuple[int, int]     # (B2, A2)
    face: tuple[int, int, int]
    framing: int

    @property
    def key(self) -> tuple[int, int]:
        return self.first


@dataclass
class CubeFunctor:
    """Minimal functor data: one object per vertex, one point per edge."""

    n: int
    N: int
    vert: np.ndarray
    hdeg: np.ndarray
    sort_key: np.ndarray
    e_src: np.ndarray
    e_tgt: np.ndarray
    e_v: np.ndarray
    e_x: np.ndarray
    e_sigma: np.ndarray
    sign: np.ndarray


def cube_functor(n: int, sign: Optional[np.ndarray] = None) -> CubeFunctor:
    """The trivial functor, whose cover is the cube flow category itself."""
    sign = cube.standard_sign(n) if sign is None else sign
    ed = list(cube.edges(n))
    v = np.array([e[0] for e in ed], dtype=np.int64)
    x = np.array([e[1] for e in ed], dtype=np.int64)
    verts = np.arange(1 << n, dtype=np.int64)
    pc = np.array([cube.popcount(u) for u in range(1 << n)], dtype=np.int64)
    return CubeFunctor(n, 1 << n, verts, pc, verts, v, v | (1 << x), v, x,
                       np.zeros(len(ed), dtype=np.int64), sign)


def _csr(keys: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(keys, kind="stable")
    counts = np.bincount(keys, minlength=n)
    ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return ptr, order


class FlowCategory:
    """Signed cover of type (delta, eps) of the framed cube (sign, frame).

    ``variant`` "odd" uses the functor signs; "even" forgets them.  With
    ``alt`` the interval framings come from the alternative frame-change
    rule.
    """

    def __init__(self, functor, variant: str = "odd", frame: Optional[np.ndarray] = None,
                 delta: int = 0, eps: int = 0, alt: bool = False):
        if variant not in ("odd", "even"):
            raise ValueError("variant must be 'odd' or 'even'")
        self.F = F = functor
        self.n = F.n
        self.variant, self.delta, self.eps, self.alt = variant, delta & 1, eps & 1, alt
        self.sign = F.sign
        self.frame = cube.standard_frame(F.n) if frame is None else frame
        self.grading = F.hdeg
        self.pair_sigma = np.asarray(F.e_sigma, dtype=np.int64) & 1
        base = self.sign[F.e_v, F.e_x].astype(np.int64)
        if variant == "odd":
            base = base ^ self.pair_sigma
        self.base_psign = base
        self.psign = base.copy()
        self.framing_override: dict[tuple[int, int], int] = {}
        self.down_ptr, self.down_idx = _csr(np.asarray(F.e_tgt), F.N)
        self.up_ptr, self.up_idx = _csr(np.asarray(F.e_src), F.N)
        self._cache: dict[int, list[Interval]] = {}

    # ------------------------------------------------------------ access

    @property
    def objects(self) -> range:
        return range(self.F.N)

    def down(self, a: int) -> np.ndarray:
        """Points A of M(a, b) for all b."""
        return self.down_idx[self.down_ptr[a]:self.down_ptr[a + 1]]

    def up(self, c: int) -> np.ndarray:
        """Points B of M(b, c) for all b."""
        return self.up_idx[self.up_ptr[c]:self.up_ptr[c + 1]]

    def lower(self, e: int) -> int:
        return int(self.F.e_src[e])

    def upper(self, e: int) -> int:
        return int(self.F.e_tgt[e])

    def points(self, a: int, b: int) -> list[int]:
        return [int(e) for e in self.down(a) if self.F.e_src[e] == b]

    def cube_quad(self, face) -> FaceSignQuad:
        return cube.face_quad(self.sign, *face)

    def induced_quad(self, first, second, signs=None) -> FaceSignQuad:
        s = self.psign if signs is None else signs
        (b1, a1), (b2, a2) = first, second
        return FaceSignQuad(int(s[b1]), int(s[b2]), int(s[a2]), int(s[a1]))

    # --------------------------------------------------------- intervals

    def intervals(self, a: int) -> list[Interval]:
        """All intervals of M(a, c) over all c two degrees below a."""
        got = self._cache.get(a)
        if got is not None:
            return got
        F = self.F
        groups: dict[tuple[int, int], list] = {}
        for A in self.down(a).tolist():
            b = int(F.e_src[A])
            xa = int(F.e_x[A])
            for B in self.down(b).tolist():
                c = int(F.e_src[B])
                xb = int(F.e_x[B])
                sg = int(self.pair_sigma[A] ^ self.pair_sigma[B])
                route = 0 if xb < xa else 1
                groups.setdefault((c, sg), [[], []])[route].append((B, A))
        out = []
        for (c, _), (r1, r2) in sorted(groups.items()):
            if len(r1) != 1 or len(r2) != 1:
                raise CoverError("no sign-preserving composition bijection from %d to %d" % (a, c))
            first, second = r1[0], r2[0]
            w = int(F.vert[c])
            xs = sorted((int(F.e_x[first[0]]), int(F.e_x[first[1]])))
            face = (w, xs[0], xs[1])
            out.append(Interval(a, c, first, second, face, self._framing(first, second, face)))
        self._cache[a] = out
        return out

    def _framing(self, first, second, face) -> int:
        over = self.framing_override.get(first)
        if over is not None:
            return over
        f0 = int(self.frame[face])
        old = self.cube_quad(face)
        new = self.induced_quad(first, second, self.base_psign)
        if self.alt:
            return cube.alt_frame_change(f0, old, new, self.eps)
        return cube.frame_change(f0, old, new, self.delta, self.eps)

    def all_intervals(self) -> list[Interval]:
        return [I for a in self.objects for I in self.intervals(a)]

    # ---------------------------------------------------------- mutation

    def copy(self) -> "FlowCategory":
        new = object.__new__(FlowCategory)
        new.__dict__.update(self.__dict__)
        new.psign = self.psign.copy()
        new.framing_override = dict(self.framing_override)
        new._cache = {}
        return new

    def with_frames(self, changes: dict[tuple[int, int], int]) -> "FlowCategory":
        """Copy with some interval framings replaced (keyed by first boundary path)."""
        new = self.copy()
        new.framing_override.update(changes)
        return new

    def with_point_signs(self, flips) -> "FlowCategory":
        """Copy with point signs flipped, framings untouched."""
        new = self.copy()
        for e in flips:
            new.psign[e] ^= 1
        return new


def sign_change_at(cat: FlowCategory, x: int) -> FlowCategory:
    """Flip every point incident to x and reframe the touched intervals (delta = 0)."""
    F = cat.F
    flips = set(cat.down(x).tolist()) | set(cat.up(x).tolist())
    tops = {x}
    for B in cat.up(x).tolist():
        b = int(F.e_tgt[B])
        tops.add(b)
        tops.update(int(F.e_tgt[A]) for A in cat.up(b).tolist())
    new = cat.copy()
    for e in flips:
        new.psign[e] ^= 1
    changes = {}
    for a in sorted(tops):
        for I in cat.intervals(a):
            pts = I.first + I.second
            if not any(p in flips for p in pts):
                continue
            old = cat.induced_quad(I.first, I.second)
            nq = new.induced_quad(I.first, I.second)
            changes[I.key] = cube.frame_change(I.framing, old, nq, 0, cat.eps)
    new.framing_override.update(changes)
    return new


# ------------------------------------------------------------ validation

@dataclass
class ValidationReport:
    missing_points: list = field(default_factory=list)
    sign_violations: list = field(default_factory=list)
    frame_violations: list = field(default_factory=list)
    non_hexagons: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.missing_points or self.sign_violations
                    or self.frame_violations or self.non_hexagons)


def _boundary_ok(cat: FlowCategory, I: Interval) -> bool:
    F = cat.F
    for B, A in (I.first, I.second):
        if int(F.e_tgt[A]) != I.top or int(F.e_src[B]) != I.bottom:
            return False
        if int(F.e_src[A]) != int(F.e_tgt[B]):
            return False
    return True


def validate(cat: FlowCategory, objects=None) -> ValidationReport:
    """Check boundary data, the sign axiom and the compatibility condition.

    ``objects`` restricts the tops a of the checked intervals and of the
    pairs (a, d) with |a| = |d| + 3.
    """
    rep = ValidationReport()
    F = cat.F
    tops = cat.objects if objects is None else objects
    for a in tops:
        for I in cat.intervals(a):
            if not _boundary_ok(cat, I):
                rep.missing_points.append(I)
                continue
            q = cat.induced_quad(I.first, I.second)
            if (q.a + q.b + q.c + q.d) % 2 != 1:
                rep.sign_violations.append(I)
    for a in tops:
        _check_compat(cat, a, rep)
    return rep


def _check_compat(cat: FlowCategory, a: int, rep: ValidationReport) -> None:
    """Assemble every boundary of M(a, d) into circles and test the framing sum."""
    F = cat.F
    # nodes are chains (A, B, C) with A in M(a,b), B in M(b,c), C in M(c,d)
    ends: list[tuple] = []
    vals: list[int] = []
    inc: dict[tuple, list[int]] = {}

    def link(n1, n2, val):
        k = len(ends)
        ends.append((n1, n2))
        vals.append(val)
        inc.setdefault(n1, []).append(k)
        inc.setdefault(n2, []).append(k)

    # I x {Q}: I in M(b, d), Q = A in M(a, b)
    for A in cat.down(a).tolist():
        for I in cat.intervals(int(F.e_src[A])):
            (c1, b1), (c2, b2) = I.first, I.second
            link((A, b1, c1), (A, b2, c2), I.framing)
    # {P} x J: J in M(a, c), P = C in M(c, d)
    for J in cat.intervals(a):
        (b1, a1), (b2, a2) = J.first, J.second
        for C in cat.down(J.bottom).tolist():
            link((a1, b1, C), (a2, b2, C), (1 + int(cat.psign[C]) + J.framing) & 1)
    used = [False] * len(ends)
    total: dict[int, int] = {}
    for k0 in range(len(ends)):
        if used[k0]:
            continue
        node = ends[k0][0]
        d = int(F.e_src[node[2]])
        length, fsum, k = 0, 0, k0
        while not used[k]:
            used[k] = True
            length += 1
            fsum += vals[k]
            n1, n2 = ends[k]
            node = n2 if n1 == node else n1
            nxt = [j for j in inc[node] if not used[j]]
            if len(inc[node]) != 2:
                rep.non_hexagons.append((a, d, node))
            if not nxt:
                break
            k = nxt[0]
        if length != 6:
            rep.non_hexagons.append((a, d, length))
        total[d] = total.get(d, 0) ^ ((1 + fsum) & 1)
    for d, t in total.items():
        if t:
            rep.frame_violations.append((a, d))


# ------------------------------------------------------------ complexes

def cochain_complex(cat: FlowCategory) -> dict[tuple[int, int], int]:
    """Integral coboundary entries [a:b] keyed by (a, b)."""
    F = cat.F
    out: dict[tuple[int, int], int] = {}
    for e in range(len(F.e_src)):
        k = (int(F.e_tgt[e]), int(F.e_src[e]))
        out[k] = out.get(k, 0) + (1 - 2 * int(cat.psign[e]))
    return {k: v for k, v in out.items() if v}


def random_sign_frame(n: int, rng: np.random.Generator, delta: int = 0,
                      eps: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """A random sign assignment with a compatible frame assignment."""
    s0, f0 = cube.standard_sign(n), cube.standard_frame(n)
    g = cube.random_cochain(n, 0, rng)
    s1 = s0 ^ cube.coboundary(g)
    f1 = cube.change_frame(s0, f0, s1, delta, eps)
    h = cube.random_cochain(n, 1, rng)
    return s1, f1 ^ cube.coboundary(h)
