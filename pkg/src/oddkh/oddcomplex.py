"""The odd Khovanov cube: exterior-algebra edge maps, edge assignments, complexes.

Generators at a vertex ``u`` are exterior monomials in the circles of the
smoothing.  A monomial is stored as a bitmask over circle positions in
the vertex order; the word is read with the largest position first.
Generator ``offset[u] + mask`` is the global id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from . import cube
from .diagram import DiagramError, LinkDiagram, Resolution, SurgeryEvent, ladybug_pattern, surgery_event
from .exactla import Echelon, IntMatrix, bits_of, elementary_divisors


class ComplexError(RuntimeError):
    """Internal inconsistency while assembling the cube."""


_POP = np.array([bin(i).count("1") for i in range(1 << 16)], dtype=np.int64)


def popcount_arr(a: np.ndarray) -> np.ndarray:
    return _POP[a & 0xFFFF] + _POP[(a >> 16) & 0xFFFF]


@lru_cache(maxsize=None)
def canonical_rank(k: int) -> np.ndarray:
    """Rank of each mask in the order (word length, then words lexicographically).

    Masks are taken over circles sorted by id; words list ids descending.
    """
    words = []
    for m in range(1 << k):
        w = tuple(sorted(bits_of(m), reverse=True))
        words.append((len(w), w, m))
    words.sort()
    r = np.empty(1 << k, dtype=np.int64)
    for i, (_, _, m) in enumerate(words):
        r[m] = i
    return r


@dataclass
class EdgeMap:
    """psi along one edge, without edge-assignment or cube signs.

    Source mask m maps to c1[m] * t1[m] + c2[m] * t2[m]; zero coefficients
    mean no term.
    """

    t1: np.ndarray
    c1: np.ndarray
    t2: np.ndarray
    c2: np.ndarray


def edge_map(kv: int, ev: SurgeryEvent) -> EdgeMap:
    """psi for a surgery event; the arrays are shared between equal events."""
    return _edge_map(kv, ev.kind, ev.s1, ev.s2, ev.s, ev.perm)


@lru_cache(maxsize=4096)
def _edge_map(kv: int, kind: str, s1: int, s2: int, s: int, perm: tuple) -> EdgeMap:
    ev = SurgeryEvent(-1, kind, s1, s2, s, perm)
    m = np.arange(1 << kv, dtype=np.int64)
    img = np.zeros_like(m)
    par = np.zeros_like(m)
    perm = ev.perm
    for q in range(kv):
        img |= ((m >> q) & 1) << perm[q]
    for q in range(kv):
        for r in range(q + 1, kv):
            if perm[q] > perm[r]:
                par ^= (m >> q) & (m >> r) & 1
    zero = np.zeros_like(m)
    if ev.kind == "merge":
        dead = (m >> ev.s1) & (m >> ev.s2) & 1
        c1 = np.where(dead == 1, 0, 1 - 2 * par)
        out = EdgeMap(img, c1.astype(np.int8), zero, zero.astype(np.int8))
        for a in (out.t1, out.c1, out.t2, out.c2):
            a.flags.writeable = False
        return out
    has = (m >> ev.s) & 1
    above1 = ~((1 << (ev.s1 + 1)) - 1)
    above2 = ~((1 << (ev.s2 + 1)) - 1)
    sg1 = (par + popcount_arr(img & above1 & 0xFFFFFFFF)) & 1
    sg2 = (par + 1 + popcount_arr(img & above2 & 0xFFFFFFFF)) & 1
    c1 = np.where(has == 1, 0, 1 - 2 * sg1)
    c2 = 1 - 2 * sg2
    out = EdgeMap(img | (1 << ev.s1), c1.astype(np.int8), img | (1 << ev.s2), c2.astype(np.int8))
    for a in (out.t1, out.c1, out.t2, out.c2):
        a.flags.writeable = False
    return out


def _apply(em: EdgeMap, vec: dict[int, int]) -> dict[int, int]:
    out: dict[int, int] = {}
    for m, a in vec.items():
        for t, c in ((em.t1[m], em.c1[m]), (em.t2[m], em.c2[m])):
            if c:
                t = int(t)
                out[t] = out.get(t, 0) + a * int(c)
    return {t: a for t, a in out.items() if a}


class KhovanovCube:
    """Resolution cube of a diagram with odd Khovanov edge maps.

    ``special`` selects the type of edge assignment ("X" or "Y");
    ``order_seed`` permutes circle orders; ``eps_seed`` adds a random
    coboundary to the edge assignment; ``sign`` overrides the standard
    sign assignment.
    """

    def __init__(self, d: LinkDiagram, special: str = "X", order_seed: Optional[int] = None,
                 eps_seed: Optional[int] = None, sign: Optional[np.ndarray] = None,
                 edge_eps: Optional[np.ndarray] = None):
        self.d = d
        self.n = n = d.n
        self.res = Resolution(d, order_seed)
        self.k = np.array([self.res.ncircles(u) for u in range(1 << n)], dtype=np.int64)
        sizes = 1 << self.k
        self.offset = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        self.N = int(self.offset[-1])
        self.events: dict[tuple[int, int], SurgeryEvent] = {}
        self.maps: dict[tuple[int, int], EdgeMap] = {}
        for v, x in cube.edges(n):
            ev = surgery_event(self.res, v, x)
            self.events[(v, x)] = ev
            self.maps[(v, x)] = edge_map(int(self.k[v]), ev)
        self.special = special
        self.face_type = {f: self.classify_face(*f) for f in cube.faces(n)}
        if edge_eps is None:
            edge_eps = self.solve_edge_assignment(special)
            if edge_eps is None:
                raise ComplexError("face classification invalid: edge assignment system inconsistent")
        if eps_seed is not None:
            g = cube.random_cochain(n, 0, np.random.default_rng(eps_seed))
            edge_eps = edge_eps ^ cube.coboundary(g)
        self.edge_eps = edge_eps
        self.sign = cube.standard_sign(n) if sign is None else sign
        self._gradings()
        self._entries()

    # ------------------------------------------------------------ faces

    def composites(self, w: int, x: int, y: int, masks=None) -> tuple[dict, dict]:
        """psi-composites along both routes of a face, on the given source masks."""
        X, Y = 1 << x, 1 << y
        if masks is None:
            masks = [0]
        r1: dict = {}
        r2: dict = {}
        for m in masks:
            a = _apply(self.maps[(w | X, y)], _apply(self.maps[(w, x)], {m: 1}))
            b = _apply(self.maps[(w | Y, x)], _apply(self.maps[(w, y)], {m: 1}))
            for t, c in a.items():
                r1[(m, t)] = c
            for t, c in b.items():
                r2[(m, t)] = c
        return r1, r2

    def classify_face(self, w: int, x: int, y: int, full: bool = False) -> str:
        """Type A, C, X or Y of a face.

        The empty word has nonzero composites on every non-ladybug face,
        so it decides A against C; ``full`` checks every source monomial.
        """
        masks = range(1 << int(self.k[w])) if full else [0]
        r1, r2 = self.composites(w, x, y, masks)
        if not r1 and not r2:
            if self.k[w | (1 << x) | (1 << y)] != self.k[w]:
                raise ComplexError("vanishing composites on a non-ladybug face")
            return "X" if ladybug_pattern(self.d, w, x, y) == 1 else "Y"
        if not r1 or not r2:
            raise ComplexError("one composite vanishes and the other does not")
        if r1 == r2:
            return "C"
        if r1 == {t: -c for t, c in r2.items()}:
            return "A"
        raise ComplexError("composites neither agree nor differ by a sign")

    def prescribed(self, special: str) -> np.ndarray:
        target = cube.zero_cochain(self.n, 2)
        for f, t in self.face_type.items():
            if t == "A" or t == special:
                target[f] = 1
        return target

    def solve_edge_assignment(self, special: str) -> Optional[np.ndarray]:
        return cube.solve_coboundary(self.prescribed(special))

    # --------------------------------------------------------- gradings

    def _gradings(self):
        n, d = self.n, self.d
        verts = np.repeat(np.arange(1 << n, dtype=np.int64), 1 << self.k)
        masks = np.arange(self.N, dtype=np.int64) - self.offset[verts]
        self.vert = verts
        self.mask = masks
        hv = popcount_arr(verts)
        self.hdeg = hv - d.n_minus
        self.qdeg = self.k[verts] - 2 * popcount_arr(masks) + hv + d.n_plus - 2 * d.n_minus
        # canonical position independent of the circle order
        canon = np.empty(self.N, dtype=np.int64)
        for u in range(1 << n):
            ku = int(self.k[u])
            ids = self.res.circle_ids[u]
            rank_of = np.argsort(np.argsort(ids))
            m = np.arange(1 << ku, dtype=np.int64)
            dm = np.zeros_like(m)
            for p in range(ku):
                dm |= ((m >> p) & 1) << int(rank_of[p])
            canon[self.offset[u]:self.offset[u + 1]] = canonical_rank(ku)[dm]
        self.canon = canon
        self.sort_key = verts * (1 << 20) + canon

    def _entries(self):
        """Flat arrays of differential entries: source, target, psi-coefficient, edge."""
        src, tgt, coef, ev, ex = [], [], [], [], []
        for (v, x), em in self.maps.items():
            u = v | (1 << x)
            base = np.arange(1 << int(self.k[v]), dtype=np.int64)
            for t, c in ((em.t1, em.c1), (em.t2, em.c2)):
                keep = c != 0
                src.append(self.offset[v] + base[keep])
                tgt.append(self.offset[u] + t[keep])
                coef.append(c[keep])
                ev.append(np.full(int(keep.sum()), v, dtype=np.int64))
                ex.append(np.full(int(keep.sum()), x, dtype=np.int64))
        cat = (lambda a, dt: np.concatenate(a).astype(dt) if a else np.zeros(0, dtype=dt))
        self.e_src = cat(src, np.int64)
        self.e_tgt = cat(tgt, np.int64)
        self.e_coef = cat(coef, np.int8)
        self.e_v = cat(ev, np.int64)
        self.e_x = cat(ex, np.int64)
        self.e_eps = self.edge_eps[self.e_v, self.e_x].astype(np.int64)
        self.e_s = self.sign[self.e_v, self.e_x].astype(np.int64)
        # functor sign of each point of a correspondence
        self.e_sigma = (self.e_eps + (self.e_coef < 0)) & 1

    def values(self, variant: str = "odd") -> np.ndarray:
        """Integral differential entries for the odd or even theory."""
        if variant == "odd":
            return (1 - 2 * ((self.e_sigma + self.e_s) & 1)).astype(np.int64)
        if variant == "even":
            return (1 - 2 * self.e_s).astype(np.int64)
        raise ValueError("variant must be 'odd' or 'even'")

    def delta_squared_zero(self, variant: str = "odd") -> bool:
        """Check d o d = 0 over Z by composing sparse entries."""
        val = self.values(variant)
        by_src: dict[int, list[tuple[int, int]]] = {}
        for s, t, a in zip(self.e_src.tolist(), self.e_tgt.tolist(), val.tolist()):
            by_src.setdefault(s, []).append((t, a))
        for s, outs in by_src.items():
            acc: dict[int, int] = {}
            for t, a in outs:
                for t2, b in by_src.get(t, ()):
                    acc[t2] = acc.get(t2, 0) + a * b
            if any(acc.values()):
                return False
        return True

    def vertex_basis(self, u: int) -> list[tuple[int, ...]]:
        """Monomials at u as descending words of circle ids, in canonical order."""
        ids = self.res.circle_ids[u]
        lo, hi = int(self.offset[u]), int(self.offset[u + 1])
        order = sorted(range(lo, hi), key=lambda g: self.canon[g])
        return [tuple(sorted((ids[p] for p in bits_of(int(self.mask[g]))), reverse=True))
                for g in order]

    def qdegrees(self) -> list[int]:
        return sorted(set(self.qdeg.tolist()))


# -------------------------------------------------------------- q-slices

class Slice:
    """The part of the complex in one quantum degree.

    Local indices inside a homological degree follow the canonical order.
    ``cols[i][g]`` is the image of local generator g of degree i as
    {local target: integer coefficient}.
    """

    def __init__(self, kc: KhovanovCube, j: int, variant: str = "odd",
                 objects: Optional[np.ndarray] = None):
        self.kc, self.j, self.variant = kc, j, variant
        sel = kc.qdeg == j
        if objects is not None:
            keep = np.zeros(kc.N, dtype=bool)
            keep[objects] = True
            sel &= keep
        gids = np.nonzero(sel)[0]
        self.degrees = sorted(set(kc.hdeg[gids].tolist()))
        self.gens: dict[int, np.ndarray] = {}
        self.local = np.full(kc.N, -1, dtype=np.int64)
        for i in self.degrees:
            g = gids[kc.hdeg[gids] == i]
            g = g[np.argsort(kc.sort_key[g], kind="stable")]
            self.gens[i] = g
            self.local[g] = np.arange(len(g))
        emask = sel[kc.e_src] & sel[kc.e_tgt]
        self.eidx = np.nonzero(emask)[0]
        val = kc.values(variant)[self.eidx]
        src, tgt = kc.e_src[self.eidx], kc.e_tgt[self.eidx]
        self.cols: dict[int, list[dict[int, int]]] = {i: [dict() for _ in self.gens[i]]
                                                      for i in self.degrees}
        hs = kc.hdeg[src]
        ls, lt = self.local[src], self.local[tgt]
        for i_, s, t, a in zip(hs.tolist(), ls.tolist(), lt.tolist(), val.tolist()):
            self.cols[i_][s][t] = a
        self._f2: dict[int, list[int]] = {}
        self._coh: dict[int, "_Cohomology"] = {}

    def size(self, i: int) -> int:
        return len(self.gens.get(i, ()))

    def f2_cols(self, i: int) -> list[int]:
        """Images of degree-i generators as bitmasks over degree i+1."""
        if i not in self._f2:
            out = []
            for c in self.cols.get(i, []):
                v = 0
                for t, a in c.items():
                    if a & 1:
                        v ^= 1 << t
                out.append(v)
            self._f2[i] = out
        return self._f2[i]

    def rank_f2(self, i: int) -> int:
        e = Echelon()
        r = 0
        for v in self.f2_cols(i):
            if v and e.add(v) is None:
                r += 1
        return r

    def f2_dims(self) -> dict[int, int]:
        ranks = {i: self.rank_f2(i) for i in self.degrees}
        return {i: self.size(i) - ranks[i] - ranks.get(i - 1, 0) for i in self.degrees}

    def integral(self) -> dict[int, tuple[int, list[int]]]:
        """H^i over Z as (free rank, torsion orders)."""
        rk, tors = {}, {}
        for i in self.degrees:
            rk[i], tors[i] = elementary_divisors(self.cols[i], self.size(i + 1))
        return {i: (self.size(i) - rk[i] - rk.get(i - 1, 0), sorted(tors.get(i - 1, [])))
                for i in self.degrees}

    def cohomology(self, i: int) -> "_Cohomology":
        if i not in self._coh:
            self._coh[i] = _Cohomology(self, i)
        return self._coh[i]

    def apply_f2(self, i: int, x: int) -> int:
        """F2 coboundary of a degree-i cochain."""
        cols = self.f2_cols(i)
        out = 0
        for g in bits_of(x):
            out ^= cols[g]
        return out

    def apply_int(self, i: int, x: dict[int, int]) -> dict[int, int]:
        out: dict[int, int] = {}
        cols = self.cols.get(i, [])
        for g, a in x.items():
            for t, b in cols[g].items():
                out[t] = out.get(t, 0) + a * b
        return {t: a for t, a in out.items() if a}


class _Cohomology:
    """F2 cohomology in one degree of a slice: representatives and coordinates."""

    def __init__(self, sl: Slice, i: int):
        self.i = i
        img = Echelon()
        for v in sl.f2_cols(i - 1) if (i - 1) in sl.cols else []:
            if v:
                img.add(v)
        ker = Echelon()
        cocycles = []
        for g, v in enumerate(sl.f2_cols(i) if i in sl.cols else []):
            dep = ker.add(v, 1 << g)
            if dep is not None:
                cocycles.append(dep)
        self.boundaries = img
        reps = []
        for z in cocycles:
            if img.add(z, 1 << len(reps)) is None:
                reps.append(z)
        self.reps = reps
        self.quot = img          # now holds coboundaries (tag 0) and reps
        self.dim = len(reps)

    def coords(self, z: int) -> int:
        """Coordinates (bitmask over reps) of the class of a cocycle."""
        rest, t = self.quot.reduce_lead(z)
        if rest:
            raise ComplexError("cochain is not a cocycle")
        return t


def build_complex(d: LinkDiagram, **kw) -> KhovanovCube:
    kc = KhovanovCube(d, **kw)
    return kc


def homology(kc: KhovanovCube, variant: str = "odd", coefficients: str = "Z") -> dict:
    """{(i, j): group} with groups (rank, torsion) over Z or dimensions over F2."""
    out = {}
    for j in kc.qdegrees():
        sl = Slice(kc, j, variant)
        if coefficients == "Z":
            for i, (r, t) in sl.integral().items():
                if r or t:
                    out[(i, j)] = (r, t)
        else:
            for i, dim in sl.f2_dims().items():
                if dim:
                    out[(i, j)] = dim
    return out


def edge_matrix(kc: KhovanovCube, v: int, x: int, variant: str = "odd") -> IntMatrix:
    """Signed edge map F_v -> F_u, u = v + e_x; rows and columns are monomial masks."""
    u = v | (1 << x)
    if u == v:
        raise ValueError("crossing %d is already 1-smoothed at v" % x)
    sel = np.nonzero((kc.e_v == v) & (kc.e_x == x))[0]
    val = kc.values(variant)[sel]
    ent = {(int(kc.e_tgt[e] - kc.offset[u]), int(kc.e_src[e] - kc.offset[v])): int(a)
           for e, a in zip(sel, val)}
    return IntMatrix(1 << int(kc.k[u]), 1 << int(kc.k[v]), ent)


@dataclass
class SignedCorrespondence:
    """Points of F_{u,v} as tuples of edge ids, with the functor sign of each.

    For a length-two pair ``pairs`` matches each point via the route
    through the lower flipped crossing with the point via the other route.
    """

    v: int
    u: int
    points: list[tuple[int, ...]]
    sign: list[int]
    pairs: list[tuple[tuple[int, ...], tuple[int, ...]]] = field(default_factory=list)


def signed_correspondence(kc: KhovanovCube, v: int, u: int) -> SignedCorrespondence:
    """F_{u,v} for u one or two steps above v, signs ignoring the cube sign assignment."""
    diff = u ^ v
    if u & v != v or bin(diff).count("1") not in (1, 2):
        raise ValueError("u must lie one or two steps above v")
    lo, hi = int(kc.offset[v]), int(kc.offset[v + 1])
    if bin(diff).count("1") == 1:
        x = diff.bit_length() - 1
        sel = np.nonzero((kc.e_v == v) & (kc.e_x == x))[0]
        return SignedCorrespondence(v, u, [(int(e),) for e in sel],
                                    [int(kc.e_sigma[e]) for e in sel])
    out_of: dict[int, list[int]] = {}
    for e in np.nonzero((kc.e_src >= lo) & (kc.e_src < hi))[0]:
        out_of.setdefault(int(kc.e_src[e]), []).append(int(e))
    x, y = bits_of(diff)
    routes = []
    for first in (x, y):
        mid = v | (1 << first)
        groups: dict = {}
        for g in range(lo, hi):
            for a in out_of.get(g, ()):
                if int(kc.e_x[a]) != first:
                    continue
                for b in np.nonzero(kc.e_src == kc.e_tgt[a])[0]:
                    if int(kc.e_v[b]) == mid and int(kc.e_x[b]) == (y if first == x else x):
                        key = (g, int(kc.e_tgt[b]), int(kc.e_sigma[a] + kc.e_sigma[b]) & 1)
                        groups.setdefault(key, []).append((a, int(b)))
        routes.append(groups)
    if {k: len(p) for k, p in routes[0].items()} != {k: len(p) for k, p in routes[1].items()}:
        raise ComplexError("no sign-preserving bijection between the two composites")
    points, sign, pairs = [], [], []
    for key in sorted(routes[0]):
        for p, q in zip(routes[0][key], routes[1][key]):
            points.append(p)
            sign.append(key[2])
            pairs.append((p, q))
    return SignedCorrespondence(v, u, points, sign, pairs)


def reduced_objects(kc: KhovanovCube, arc: Optional[int] = None) -> np.ndarray:
    """Global ids of monomials containing the circle through the basepoint arc."""
    arc = kc.d.basepoint if arc is None else arc
    if arc is None:
        raise ValueError("no basepoint given")
    if not any(arc in c for c in kc.d.crossings) and arc not in kc.d.loop_labels():
        raise DiagramError("basepoint arc %r is not in the diagram" % arc)
    keep = np.zeros(kc.N, dtype=bool)
    for u in range(1 << kc.n):
        p = kc.res.pos(u, arc)
        lo, hi = int(kc.offset[u]), int(kc.offset[u + 1])
        keep[lo:hi] = (kc.mask[lo:hi] >> p) & 1 == 1
    return np.nonzero(keep)[0]


def reduced_homology(kc: KhovanovCube, arc: Optional[int] = None, variant: str = "odd",
                     coefficients: str = "Z") -> dict:
    """Reduced homology; reduced q = unreduced q + 1."""
    objs = reduced_objects(kc, arc)
    out = {}
    for j in sorted(set(kc.qdeg[objs].tolist())):
        sl = Slice(kc, j, variant, objects=objs)
        if coefficients == "Z":
            for i, (r, t) in sl.integral().items():
                if r or t:
                    out[(i, j + 1)] = (r, t)
        else:
            for i, dim in sl.f2_dims().items():
                if dim:
                    out[(i, j + 1)] = dim
    return out


def reduced_split(kc: KhovanovCube, arc: Optional[int] = None) -> tuple[np.ndarray, np.ndarray]:
    """(subcomplex of monomials containing the pointed circle, its complement)."""
    sub = reduced_objects(kc, arc)
    keep = np.zeros(kc.N, dtype=bool)
    keep[sub] = True
    bad = keep[kc.e_src] & ~keep[kc.e_tgt]
    if bad.any():
        raise ComplexError("pointed monomials do not span a subcomplex")
    return sub, np.nonzero(~keep)[0]
