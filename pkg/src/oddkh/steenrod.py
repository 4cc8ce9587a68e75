"""The cochain sq^phi from boundary matchings and graph structures, Sq^2 and Sq^1.

A cochain over F2 is a set of object ids.  For a cocycle phi in degree k
and an object a in degree k+2, the vertices of the graph are pairs
(B, A) with A in M(a, b) and B in M(b, c), c in phi.  Intervals give the
framed edges; the matching at each b gives the remaining ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .exactla import Echelon, F2Matrix, bits_of
from .flowcat import FlowCategory
from .oddcomplex import KhovanovCube, Slice


class SteenrodError(RuntimeError):
    """Graph-structure axioms violated or a non-cocycle was supplied."""


@dataclass
class BoundaryMatching:
    """Ordered pairs (B1, B2) of points of M(b, phi), per object b."""

    pairs: dict[int, list[tuple[int, int]]] = field(default_factory=dict)

    def partner(self) -> dict[int, tuple[int, int]]:
        """point -> (other point, +1 if this is the first of its pair else -1)."""
        out = {}
        for prs in self.pairs.values():
            for p, q in prs:
                out[p] = (q, 1)
                out[q] = (p, -1)
        return out


@dataclass
class SpecialGraphStructure:
    vertices: list[tuple[int, int]]
    sign: dict[tuple[int, int], int]
    framed: list[tuple[tuple[int, int], tuple[int, int], int]]      # E' with framing
    directed: list[tuple[tuple[int, int], tuple[int, int]]]         # E'' (from, to)
    undirected: list[tuple[tuple[int, int], tuple[int, int]]]
    loops: int = 0

    def check(self) -> None:
        """The axioms of a special graph structure with empty boundary."""
        deg_f: dict = {}
        deg_o: dict = {}
        for v, w, _ in self.framed:
            if self.sign[v] == self.sign[w]:
                raise SteenrodError("framed edge joins equal signs")
            deg_f[v] = deg_f.get(v, 0) + 1
            deg_f[w] = deg_f.get(w, 0) + 1
        for v, w in self.directed:
            if self.sign[v] != self.sign[w]:
                raise SteenrodError("directed edge joins opposite signs")
            deg_o[v] = deg_o.get(v, 0) + 1
            deg_o[w] = deg_o.get(w, 0) + 1
        for v, w in self.undirected:
            if self.sign[v] == self.sign[w]:
                raise SteenrodError("undirected edge joins equal signs")
            deg_o[v] = deg_o.get(v, 0) + 1
            deg_o[w] = deg_o.get(w, 0) + 1
        for v in self.vertices:
            if deg_f.get(v, 0) != 1 or deg_o.get(v, 0) != 1:
                raise SteenrodError("vertex %r is not on one framed and one other edge" % (v,))

    def cycles(self) -> list[list[tuple]]:
        """Circles as alternating edge sequences, each traversed from a fixed start.

        Items are ("f", framing) or ("m", +1/-1/0): +1 if a directed edge is
        walked along its direction, -1 against it, 0 if undirected.
        """
        fe = {}
        for v, w, f in self.framed:
            fe[v] = (w, f)
            fe[w] = (v, f)
        oe = {}
        for v, w in self.directed:
            oe[v] = (w, 1)
            oe[w] = (v, -1)
        for v, w in self.undirected:
            oe[v] = (w, 0)
            oe[w] = (v, 0)
        seen = set()
        out = []
        for v0 in sorted(self.vertices):
            if v0 in seen:
                continue
            cyc = []
            v = v0
            while True:
                seen.add(v)
                w, f = fe[v]
                cyc.append(("f", f))
                seen.add(w)
                u, d = oe[w]
                cyc.append(("m", d))
                v = u
                if v == v0:
                    break
            out.append(cyc)
        return out


def _points_into(cat: FlowCategory, b: int, phi: set) -> list[int]:
    F = cat.F
    return [int(B) for B in cat.down(b).tolist() if int(F.e_src[B]) in phi]


def boundary_matching(cat: FlowCategory, phi: Iterable[int], seed: Optional[int] = None,
                      allowed: Optional[np.ndarray] = None) -> BoundaryMatching:
    """Pair up M(b, phi) for every b; canonical unless ``seed`` is given.

    ``allowed`` (boolean mask over objects) restricts to a full subcategory.
    """
    phi = set(int(c) for c in phi)
    F = cat.F
    rng = np.random.default_rng(seed) if seed is not None else None
    bs = set()
    for c in phi:
        for B in cat.up(c).tolist():
            b = int(F.e_tgt[B])
            if allowed is None or allowed[b]:
                bs.add(b)
    m = BoundaryMatching()
    for b in sorted(bs):
        pts = _points_into(cat, b, phi)
        if len(pts) % 2:
            raise SteenrodError("phi is not a cocycle: odd boundary count at %d" % b)
        pts.sort(key=lambda B: (int(F.sort_key[F.e_src[B]]), B))
        if rng is not None:
            pts = [pts[i] for i in rng.permutation(len(pts))]
        m.pairs[b] = [(pts[i], pts[i + 1]) for i in range(0, len(pts), 2)]
    return m


def graph_structure(cat: FlowCategory, a: int, phi: Iterable[int],
                    m: BoundaryMatching) -> SpecialGraphStructure:
    phi = phi if isinstance(phi, (set, frozenset)) else set(int(c) for c in phi)
    F = cat.F
    s = cat.psign
    verts = []
    sign = {}
    for A in cat.down(a).tolist():
        b = int(F.e_src[A])
        for B in cat.down(b).tolist():
            if int(F.e_src[B]) in phi:
                v = (int(B), int(A))
                verts.append(v)
                sign[v] = int(s[B] ^ s[A])
    framed = []
    for I in cat.intervals(a):
        if I.bottom in phi:
            framed.append((I.first, I.second, I.framing))
    directed, undirected = [], []
    for A in cat.down(a).tolist():
        b = int(F.e_src[A])
        for B1, B2 in m.pairs.get(b, ()):
            v1, v2 = (B1, int(A)), (B2, int(A))
            if s[B1] == s[B2]:
                directed.append((v1, v2))
            else:
                undirected.append((v1, v2))
    return SpecialGraphStructure(verts, sign, framed, directed, undirected, 0)


def sq_value(g: SpecialGraphStructure, reverse: bool = False) -> int:
    """|L| + sum over circles of 1 + F(C) + D(C)."""
    total = g.loops
    for cyc in g.cycles():
        if reverse:
            cyc = cyc[::-1]
        fsum = sum(v for k, v in cyc if k == "f")
        want = -1 if reverse else 1
        dsum = sum(1 for k, v in cyc if k == "m" and v == want)
        total += 1 + fsum + dsum
    return total & 1


def _tops(cat: FlowCategory, phi: set, allowed=None) -> list[int]:
    F = cat.F
    tops = set()
    for c in phi:
        for B in cat.up(c).tolist():
            b = int(F.e_tgt[B])
            if allowed is not None and not allowed[b]:
                continue
            for A in cat.up(b).tolist():
                a = int(F.e_tgt[A])
                if allowed is None or allowed[a]:
                    tops.add(a)
    return sorted(tops)


def sq_cochain(cat: FlowCategory, phi: Iterable[int], m: Optional[BoundaryMatching] = None,
               check: bool = False, allowed: Optional[np.ndarray] = None) -> set[int]:
    """The cochain sq^phi, as the set of objects where it is 1."""
    phi = set(int(c) for c in phi)
    if m is None:
        m = boundary_matching(cat, phi, allowed=allowed)
    out = set()
    for a in _tops(cat, phi, allowed):
        g = graph_structure(cat, a, phi, m)
        if check:
            g.check()
        if sq_value(g):
            out.add(a)
    return out


def _fast_sq(cat: FlowCategory, phi: set, allowed=None) -> set[int]:
    """sq^phi with the canonical matching, without building graph objects."""
    F = cat.F
    s = cat.psign
    e_src = F.e_src
    m = boundary_matching(cat, phi, allowed=allowed)
    partner = m.partner()
    out = set()
    for a in _tops(cat, phi, allowed):
        fe = {}
        for I in cat.intervals(a):
            if I.bottom in phi:
                fe[I.first] = (I.second, I.framing)
                fe[I.second] = (I.first, I.framing)
        seen = set()
        total = 0
        for v0 in fe:
            if v0 in seen:
                continue
            v = v0
            acc = 1
            while True:
                seen.add(v)
                w, f = fe[v]
                seen.add(w)
                acc += f
                B, A = w
                B2, d = partner[B]
                if d == 1 and s[B] == s[B2]:
                    acc += 1
                v = (B2, A)
                if v == v0:
                    break
            total += acc
        if total & 1:
            out.add(a)
    return out


# ------------------------------------------------------------ operations

class SliceOps:
    """Sq^2 and Sq^1 on the F2 cohomology of one q-degree."""

    def __init__(self, kc: KhovanovCube, j: int, cat: Optional[FlowCategory] = None,
                 sq1_variant: str = "odd", objects: Optional[np.ndarray] = None):
        self.kc, self.j, self.cat = kc, j, cat
        self.slice = Slice(kc, j, sq1_variant, objects=objects)
        self.allowed = None
        if objects is not None:
            self.allowed = np.zeros(kc.N, dtype=bool)
            self.allowed[objects] = True

    def dim(self, i: int) -> int:
        if i not in self.slice.gens:
            return 0
        return self.slice.cohomology(i).dim

    def rep_objects(self, i: int, k: int) -> set[int]:
        z = self.slice.cohomology(i).reps[k]
        g = self.slice.gens[i]
        return {int(g[t]) for t in bits_of(z)}

    def to_local(self, i: int, objs: set[int]) -> int:
        v = 0
        for o in objs:
            t = int(self.slice.local[o])
            if t < 0 or int(self.kc.hdeg[o]) != i:
                raise SteenrodError("cochain leaves the slice")
            v |= 1 << t
        return v

    def sq2(self, i: int) -> F2Matrix:
        """Matrix of Sq^2: H^i -> H^{i+2}; row r is the bitmask over source classes."""
        src, tgt = self.dim(i), self.dim(i + 2)
        rows = [0] * tgt
        if src and tgt:
            coh = self.slice.cohomology(i + 2)
            for k in range(src):
                phi = self.rep_objects(i, k)
                img = _fast_sq(self.cat, phi, self.allowed)
                c = coh.coords(self.to_local(i + 2, img))
                for r in bits_of(c):
                    rows[r] |= 1 << k
        return F2Matrix(tgt, src, rows)

    def sq1(self, i: int) -> F2Matrix:
        """Bockstein H^i -> H^{i+1} from the integral differential."""
        src, tgt = self.dim(i), self.dim(i + 1)
        rows = [0] * tgt
        if src and tgt:
            coh = self.slice.cohomology(i + 1)
            for k in range(src):
                z = self.slice.cohomology(i).reps[k]
                img = self.slice.apply_int(i, {t: 1 for t in bits_of(z)})
                y = 0
                for t, a in img.items():
                    if a % 2:
                        raise SteenrodError("representative is not a mod 2 cocycle")
                    if (a // 2) % 2:
                        y |= 1 << t
                for r in bits_of(coh.coords(y)):
                    rows[r] |= 1 << k
        return F2Matrix(tgt, src, rows)

    def coords(self, i: int, objs: set[int]) -> int:
        return self.slice.cohomology(i).coords(self.to_local(i, objs))


def sq2_matrix(cat: FlowCategory, i: int, j: int, objects=None) -> F2Matrix:
    kc = cat.F
    return SliceOps(kc, j, cat, objects=objects).sq2(i)


def sq1_matrix(kc: KhovanovCube, i: int, j: int, variant: str = "odd", objects=None) -> F2Matrix:
    return SliceOps(kc, j, None, variant, objects).sq1(i)


# ------------------------------------------------------------ Chang words

def _rank(vectors) -> int:
    e = Echelon()
    return sum(1 for v in vectors if v and e.add(v) is None)


def _mat_cols(m: F2Matrix) -> list[int]:
    return m.columns() if m.ncols else []


def chang_counts(sq2: F2Matrix, sq1_src: F2Matrix, sq1_mid: F2Matrix) -> dict[str, int]:
    """Multiplicities of the words eta, _2eta, eta2, _2eta2 from three maps.

    sq2: H^i -> H^{i+2}; sq1_src: H^i -> H^{i+1}; sq1_mid: H^{i+1} -> H^{i+2}.
    """
    cols = _mat_cols(sq2)
    n = sq2.ncols
    # kernel of Sq^1 on the source
    e = Echelon()
    ker = []
    for k, v in enumerate(_mat_cols(sq1_src) if sq1_src.ncols else [0] * n):
        dep = e.add(v, 1 << k)
        if dep is not None:
            ker.append(dep)
    if not sq1_src.nrows:
        ker = [1 << k for k in range(n)]

    def image_of(x):
        out = 0
        for k in bits_of(x):
            out ^= cols[k]
        return out

    im1 = [c for c in _mat_cols(sq1_mid)] if sq1_mid.ncols else []
    total = _rank(cols)
    on_ker = _rank(image_of(x) for x in ker)
    r_im = _rank(im1)
    proj = _rank(im1 + cols) - r_im
    proj_ker = _rank(im1 + [image_of(x) for x in ker]) - r_im
    eta = proj_ker
    eta2 = on_ker - proj_ker
    _2eta = proj - proj_ker
    _2eta2 = total - eta - eta2 - _2eta
    return {"eta": eta, "_2eta": _2eta, "eta2": eta2, "_2eta2": _2eta2}


WORDS = {"eta": "η", "_2eta": "_2η", "eta2": "η2", "_2eta2": "_2η2"}


def chang_word(counts: dict[str, int]) -> str:
    total = sum(counts.values())
    if total == 0:
        return "none"
    if total > 1:
        return "wide"
    return WORDS[next(k for k, v in counts.items() if v)]


OPS = {"sq2e0": ("odd", 0, "odd"), "sq2e1": ("odd", 1, "odd"), "sq2even": ("even", 0, "even")}


@dataclass
class SteenrodEntry:
    i: int
    j: int
    op: str
    matrix: F2Matrix

    @property
    def rank(self) -> int:
        return _rank(self.matrix.rows)


def slice_report(kc: KhovanovCube, j: int, op: str, cat: Optional[FlowCategory] = None,
                 objects=None) -> tuple[list[SteenrodEntry], str]:
    """All nonzero-source matrices of one operation in one q-degree, plus the Chang word."""
    if op in ("sq1odd", "sq1even"):
        ops = SliceOps(kc, j, None, op[3:], objects)
        ents = [SteenrodEntry(i, j, op, ops.sq1(i)) for i in ops.slice.degrees
                if ops.dim(i) and ops.dim(i + 1)]
        return ents, ""
    variant, eps, s1v = OPS[op]
    if cat is None:
        cat = FlowCategory(kc, variant, eps=eps)
    ops = SliceOps(kc, j, cat, s1v, objects)
    ents = []
    counts = {k: 0 for k in WORDS}
    for i in ops.slice.degrees:
        if not (ops.dim(i) and ops.dim(i + 2)):
            continue
        m2 = ops.sq2(i)
        ents.append(SteenrodEntry(i, j, op, m2))
        c = chang_counts(m2, ops.sq1(i), ops.sq1(i + 1))
        for k in counts:
            counts[k] += c[k]
    return ents, chang_word(counts)
