"""Bar-Natan complex over F2, the s-invariant, and its Steenrod refinements.

Generators are those of the Khovanov cube (a set bit is the letter X on
that circle).  The Bar-Natan differential adds m(X, X) = X and the term
1 (x) 1 of the split to the Khovanov maps; both raise q by 2, so the
span of generators with q >= j is a subcomplex F_j.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .diagram import LinkDiagram, mirror
from .exactla import Echelon, F2Matrix, bits_of
from .oddcomplex import KhovanovCube, Slice


class SInvariantError(RuntimeError):
    """Unsupported input or an internal consistency failure."""


STATUS = ("not-half-full", "half-full", "full")


@dataclass
class BNComplex:
    """F2 Bar-Natan complex; ``cols[i][g]`` is the image of local generator g."""

    kc: KhovanovCube
    gens: dict[int, np.ndarray]
    local: np.ndarray
    cols: dict[int, list[int]]
    level: dict[int, np.ndarray]

    def apply(self, i: int, x: int) -> int:
        out = 0
        cols = self.cols[i]
        for g in bits_of(x):
            out ^= cols[g]
        return out


def build_bn_complex(kc: KhovanovCube, degrees: Optional[set] = None) -> BNComplex:
    """Bar-Natan complex of a knot cube; ``degrees`` limits the source degrees built."""
    if kc.d.components != 1:
        raise SInvariantError("the s-invariant is computed for knots only")
    gens, level = {}, {}
    local = np.full(kc.N, -1, dtype=np.int64)
    for i in sorted(set(kc.hdeg.tolist())):
        g = np.nonzero(kc.hdeg == i)[0]
        g = g[np.lexsort((kc.sort_key[g], -kc.qdeg[g]))]
        gens[i] = g
        local[g] = np.arange(len(g))
        level[i] = kc.qdeg[g]
    cols = {i: [0] * len(gens[i]) for i in gens}
    want = set(gens) if degrees is None else set(degrees)
    for (v, x), em in kc.maps.items():
        ev = kc.events[(v, x)]
        i = int(kc.hdeg[kc.offset[v]])
        if i not in want:
            continue
        u = v | (1 << x)
        ov, ou = int(kc.offset[v]), int(kc.offset[u])
        col = cols[i]
        if ev.kind == "merge":
            for m in range(1 << int(kc.k[v])):
                col[local[ov + m]] ^= 1 << int(local[ou + int(em.t1[m])])
        else:
            s1 = 1 << ev.s1
            for m in range(1 << int(kc.k[v])):
                t2 = int(em.t2[m])
                tl = 1 << int(local[ou + t2])
                if (m >> ev.s) & 1:
                    col[local[ov + m]] ^= tl
                else:
                    t1 = int(em.t1[m])
                    col[local[ov + m]] ^= (tl ^ (1 << int(local[ou + t1]))
                                           ^ (1 << int(local[ou + (t1 ^ s1)])))
    return BNComplex(kc, gens, local, cols, level)


def bn_squares_to_zero(bn: BNComplex) -> bool:
    for i in bn.cols:
        if i + 1 not in bn.cols:
            continue
        for v in bn.cols[i]:
            if bn.apply(i + 1, v):
                return False
    return True


def associated_graded_matches(bn: BNComplex) -> bool:
    """The q-preserving part of the Bar-Natan differential is the Khovanov one (mod 2)."""
    kc = bn.kc
    for j in kc.qdegrees():
        sl = Slice(kc, j, "even")
        for i in sl.degrees:
            if i + 1 not in bn.gens:
                continue
            tgt_q = bn.level[i + 1]
            for g_local, gid in enumerate(sl.gens[i]):
                col = bn.cols[i][int(bn.local[gid])]
                part = 0
                for t in bits_of(col):
                    if tgt_q[t] == j:
                        part |= 1 << int(sl.local[bn.gens[i + 1][t]])
                if part != sl.f2_cols(i)[g_local]:
                    return False
    return True


class FilteredH0:
    """H^0 of the filtration pieces and of the whole Bar-Natan complex."""

    def __init__(self, bn: BNComplex):
        self.bn = bn
        lv = bn.level[0]
        cols0 = bn.cols[0]
        # kernel of d^0 restricted to q >= j: insert generators by decreasing q
        e = Echelon()
        self.cycles: list[tuple[int, int]] = []     # (level, cocycle)
        for g in range(len(cols0)):
            dep = e.add(cols0[g], 1 << g)
            if dep is not None:
                self.cycles.append((int(lv[g]), dep))
        self.bound = Echelon()
        for v in bn.cols.get(-1, []):
            if v:
                self.bound.add(v)
        # classes of H^0_BN: cycles independent modulo boundaries
        self.quot = Echelon()
        for v in self.bound.vectors():
            self.quot.add(v)
        self.classes = []
        for _, z in self.cycles:
            if self.quot.add(z, 1 << len(self.classes)) is None:
                self.classes.append(z)
        if len(self.classes) != 2:
            raise SInvariantError("Bar-Natan H^0 has dimension %d, expected 2" % len(self.classes))

    def bn_class(self, z: int) -> int:
        rest, t = self.quot.reduce_lead(z)
        if rest:
            raise SInvariantError("not a cocycle")
        return t

    def cycles_at(self, j: int) -> list[int]:
        return [z for lv, z in self.cycles if lv >= j]

    def image_dim(self, j: int) -> int:
        e = Echelon()
        return sum(1 for z in self.cycles_at(j) if e.add(self.bn_class(z)) is None)

    def s_invariant(self) -> int:
        levels = sorted({lv for lv, _ in self.cycles}, reverse=True)
        full = [j for j in levels if self.image_dim(j) == 2]
        some = [j for j in levels if self.image_dim(j) >= 1]
        s = max(full) + 1
        if max(some) - 1 != s:
            raise SInvariantError("filtration levels inconsistent with a knot")
        return s


def s_f2(bn: BNComplex) -> int:
    return FilteredH0(bn).s_invariant()


def alpha_status(h0: FilteredH0, j: int, alpha: Optional[F2Matrix], sl: Optional[Slice]) -> str:
    """Status of the odd integer j for the operation alpha: Kh^{-2,j} -> Kh^{0,j}.

    ``alpha`` is given in the cohomology bases of ``sl`` (the q = j slice);
    None means the zero map.
    """
    bn = h0.bn
    zs = h0.cycles_at(j)
    if not zs:
        return STATUS[0]
    kh = sl.cohomology(0) if (sl is not None and 0 in sl.gens) else None
    img = Echelon()
    if alpha is not None:
        for r in alpha.columns():
            if r:
                img.add(r)
    lv = bn.level[0]
    gens0 = bn.gens[0]
    width = kh.dim if kh is not None else 0
    e = Echelon()
    for z in zs:
        pv = 0
        if kh is not None:
            part = 0
            for t in bits_of(z):
                if lv[t] == j:
                    part |= 1 << int(sl.local[gens0[t]])
            pv = img.reduce(kh.coords(part))[0]
        e.add(pv | (h0.bn_class(z) << width))
    dim = sum(1 for b in e.piv if b.bit_length() - 1 >= width)
    return STATUS[min(dim, 2)]


@dataclass
class Refinement:
    r_plus: int
    s_plus: int
    r_minus: int = 0
    s_minus: int = 0
    statuses: dict = field(default_factory=dict)

    def tuple(self) -> tuple[int, int, int, int]:
        return (self.r_plus, self.s_plus, self.r_minus, self.s_minus)


def refine_plus(h0: FilteredH0, s: int, status_at: Callable[[int], str]) -> tuple[int, int, dict]:
    """(r_plus, s_plus) from statuses on the window s-3 .. s+3."""
    window = list(range(s - 3, s + 4, 2))
    st = {j: status_at(j) for j in window}
    ranks = [STATUS.index(st[j]) for j in window]
    if any(a < b for a, b in zip(ranks, ranks[1:])):
        raise SInvariantError("statuses not monotone in j: %r" % st)
    if st[s - 3] != "full" or st[s + 3] != "not-half-full":
        raise SInvariantError("statuses outside the expected window: %r" % st)
    half = max(j for j in window if st[j] != "not-half-full")
    full = max(j for j in window if st[j] == "full")
    return half + 1, full + 3, st


SQ2_KINDS = {"sq2e0": ("odd", 0), "sq2e1": ("odd", 1), "sq2even": ("even", 0)}


def _plus_side(kc: KhovanovCube, ops: list[str]) -> tuple[int, dict]:
    from .flowcat import FlowCategory
    from .steenrod import SliceOps

    bn = build_bn_complex(kc, degrees={-1, 0})
    h0 = FilteredH0(bn)
    s = h0.s_invariant()
    out = {}
    for op in ops:
        cache = {}

        def status_at(j, op=op):
            sl = Slice(kc, j, "even")
            if not (sl.size(-2) and sl.size(0)):
                return alpha_status(h0, j, None, sl if sl.size(0) else None)
            if op in ("sq1odd", "sq1even"):
                raise SInvariantError("first squares land in degree -1")
            variant, eps = SQ2_KINDS[op]
            if op not in cache:
                cache[op] = FlowCategory(kc, variant, eps=eps)
            so = SliceOps(kc, j, cache[op])
            return alpha_status(h0, j, so.sq2(-2), so.slice)

        r, sp, st = refine_plus(h0, s, status_at)
        out[op] = (r, sp, st)
    return s, out


def refine(d: LinkDiagram, ops=("sq2even", "sq2e0", "sq2e1"), **kw) -> tuple[int, dict]:
    """s_F2 and the tuples (r+, s+, r-, s-) for each operation."""
    kp = KhovanovCube(d, **kw)
    km = KhovanovCube(mirror(d), **kw)
    s, plus = _plus_side(kp, list(ops))
    sm, minus = _plus_side(km, list(ops))
    if sm != -s:
        raise SInvariantError("s of the mirror is not -s")
    res = {}
    for op in ops:
        rp, spl, st = plus[op]
        rm, smn, stm = minus[op]
        res[op] = Refinement(rp, spl, -rm, -smn, {"plus": st, "minus": stm})
    return s, res
