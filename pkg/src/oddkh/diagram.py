"""Link diagrams in PD notation and the geometry of their resolution cube.

A crossing ``X[a,b,c,d]`` lists its four arcs counterclockwise, starting
with the incoming under-strand.  Position 0 is drawn at the bottom,
1 on the right, 2 on top and 3 on the left.  The 0-smoothing joins
positions (0,1) and (2,3), the 1-smoothing joins (3,0) and (1,2).

Each crossing carries a surgery arrow on its 0-smoothing.  By default it
points from the (0,1) strand to the (2,3) strand; ``arrows[x] = True``
reverses it.  Rotating the arrow a quarter turn counterclockwise, it
points to the (3,0) strand of the 1-smoothing (reversed: the (1,2)
strand); the circle through that strand is ``s2`` of a split.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class DiagramError(ValueError):
    """Malformed or inconsistent planar diagram input."""


# strands of the two smoothings, as pairs of crossing positions
_STRANDS = (((0, 1), (2, 3)), ((3, 0), (1, 2)))
_PARTNER = ((1, 0, 3, 2), (3, 2, 1, 0))

_TOKEN = re.compile(r"X\s*\[\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*\]")


@dataclass(frozen=True)
class LinkDiagram:
    """An ordered planar diagram with orientation-derived crossing signs."""

    crossings: tuple[tuple[int, int, int, int], ...]
    free_loops: int = 0
    basepoint: Optional[int] = None
    arrows: tuple[bool, ...] = ()
    signs: tuple[int, ...] = field(default=(), compare=False)
    components: int = field(default=0, compare=False)

    @property
    def n(self) -> int:
        return len(self.crossings)

    @property
    def n_plus(self) -> int:
        return sum(1 for e in self.signs if e > 0)

    @property
    def n_minus(self) -> int:
        return sum(1 for e in self.signs if e < 0)

    def loop_labels(self) -> list[int]:
        """Synthetic arc labels for crossing-free unknot components."""
        top = max((a for c in self.crossings for a in c), default=0)
        return [top + 1 + k for k in range(self.free_loops)]

    def with_arrows(self, arrows: Sequence[bool]) -> "LinkDiagram":
        return make_diagram(self.crossings, self.free_loops, self.basepoint, arrows)

    def with_basepoint(self, arc: Optional[int]) -> "LinkDiagram":
        return make_diagram(self.crossings, self.free_loops, arc, self.arrows)

    def to_pd(self) -> str:
        toks = ["X[%d,%d,%d,%d]" % c for c in self.crossings]
        toks += ["U"] * self.free_loops
        if self.basepoint is not None:
            toks += ["*", str(self.basepoint)]
        return " ".join(toks)


def _slots(crossings) -> dict[int, list[tuple[int, int]]]:
    where: dict[int, list[tuple[int, int]]] = {}
    for x, c in enumerate(crossings):
        for p, a in enumerate(c):
            where.setdefault(a, []).append((x, p))
    return where


def _other_slot(where, label, slot):
    a, b = where[label]
    return b if a == slot else a


def _orient(crossings) -> tuple[list[int], int]:
    """Crossing signs (+1/-1) from tracing components, and the component count."""
    where = _slots(crossings)
    n = len(crossings)
    sign = [0] * n
    seen: set[tuple[int, int]] = set()
    ncomp = 0
    # every under-strand fixes the direction of its component
    starts = [(x, 0) for x in range(n)]
    # over-only components: fall back to increasing arc labels
    for label in sorted(where):
        for slot in where[label]:
            if slot[1] in (1, 3):
                starts.append(slot)
    for start in starts:
        if start in seen:
            continue
        if start[1] in (1, 3):
            x, p = start
            # enter through the slot whose outgoing arc label is larger
            q = (p + 2) % 4
            a_in, a_out = crossings[x][p], crossings[x][q]
            if a_out < a_in and not (a_in - a_out > 1):
                start = (x, q)
            if start in seen:
                continue
        ncomp += 1
        slot = start
        while True:
            x, p = slot
            if slot in seen:
                raise DiagramError("inconsistent orientation at crossing %d" % x)
            q = (p + 2) % 4
            seen.add(slot)
            seen.add((x, q))
            if p == 2:
                raise DiagramError(
                    "under-strand of crossing %d traversed against its orientation" % x)
            if p == 1:
                sign[x] = -1
            elif p == 3:
                sign[x] = 1
            slot = _other_slot(where, crossings[x][q], (x, q))
            if slot == start:
                break
    return sign, ncomp


def make_diagram(crossings, free_loops: int = 0, basepoint: Optional[int] = None,
                 arrows: Optional[Sequence[bool]] = None) -> LinkDiagram:
    """Validate PD data and build a LinkDiagram."""
    crossings = tuple(tuple(int(a) for a in c) for c in crossings)
    for x, c in enumerate(crossings):
        if len(c) != 4:
            raise DiagramError("crossing %d does not have four arcs" % x)
    where = _slots(crossings)
    for label, slots in where.items():
        if len(slots) != 2:
            raise DiagramError("arc %d occurs %d times, expected 2" % (label, len(slots)))
    signs, ncomp = _orient(crossings) if crossings else ([], 0)
    if arrows is None:
        arrows = (False,) * len(crossings)
    arrows = tuple(bool(a) for a in arrows)
    if len(arrows) != len(crossings):
        raise DiagramError("one arrow flag per crossing expected")
    d = LinkDiagram(crossings, int(free_loops), basepoint, arrows, tuple(signs),
                    ncomp + int(free_loops))
    if basepoint is not None and basepoint not in where and basepoint not in d.loop_labels():
        raise DiagramError("basepoint arc %r does not occur in the diagram" % basepoint)
    return d


def parse_pd(text: str) -> LinkDiagram:
    """Parse ``X[a,b,c,d]`` tokens, optional ``U`` loops and ``* arc`` basepoint."""
    crossings = []
    loops = 0
    basepoint = None
    pos = 0
    text = text.strip()
    if text.startswith("PD[") and text.endswith("]"):
        text = text[3:-1]
    while pos < len(text):
        ch = text[pos]
        if ch.isspace() or ch == ",":
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m:
            crossings.append(tuple(int(g) for g in m.groups()))
            pos = m.end()
            continue
        if ch == "U":
            loops += 1
            pos += 1
            continue
        if ch == "*":
            m = re.compile(r"\*\s*(-?\d+)").match(text, pos)
            if not m:
                raise DiagramError("basepoint marker without arc label at position %d" % pos)
            basepoint = int(m.group(1))
            pos = m.end()
            continue
        raise DiagramError("unexpected input at position %d: %r" % (pos, text[pos:pos + 12]))
    if not crossings and not loops:
        loops = 1
    return make_diagram(crossings, loops, basepoint)


def mirror(d: LinkDiagram) -> LinkDiagram:
    """Mirror image: every crossing switches over and under."""
    flipped = [(c[1], c[2], c[3], c[0]) if s < 0 else (c[3], c[0], c[1], c[2])
               for c, s in zip(d.crossings, d.signs)]
    return make_diagram(flipped, d.free_loops, d.basepoint)


def disjoint_union(d1: LinkDiagram, d2: LinkDiagram) -> LinkDiagram:
    """Split union, relabelling the arcs of the second diagram."""
    shift = max((a for c in d1.crossings for a in c), default=0)
    cr = list(d1.crossings) + [tuple(a + shift for a in c) for c in d2.crossings]
    return make_diagram(cr, d1.free_loops + d2.free_loops)


# ---------------------------------------------------------------- smoothings

@dataclass
class Smoothing:
    """Circles of the resolution at one cube vertex."""

    vertex: int
    circle_of: dict[int, int]   # arc label -> circle id (its minimal arc label)
    circles: list[int]          # circle ids in the chosen order


class Resolution:
    """Circle data for every vertex of the cube of resolutions.

    Vertices are integers; bit ``x`` is the smoothing at crossing ``x``.
    ``order`` optionally maps a vertex to a permutation of its circle ids.
    """

    def __init__(self, d: LinkDiagram, order_seed: Optional[int] = None):
        self.d = d
        self.n = d.n
        self.labels = sorted({a for c in d.crossings for a in c})
        self.loops = d.loop_labels()
        self._index = {a: i for i, a in enumerate(self.labels)}
        self.circle_ids: list[list[int]] = []
        self.label_pos: list[np.ndarray] = []
        rng = np.random.default_rng(order_seed) if order_seed is not None else None
        for u in range(1 << self.n):
            circ = self._trace(u)
            ids = sorted(set(circ.values()))
            if rng is not None:
                ids = [ids[i] for i in rng.permutation(len(ids))]
            self.circle_ids.append(ids)
            pos_of = {c: i for i, c in enumerate(ids)}
            self.label_pos.append(np.array([pos_of[circ[a]] for a in self.labels + self.loops],
                                           dtype=np.int64))

    def _trace(self, u: int) -> dict[int, int]:
        parent = {a: a for a in self.labels}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for x, c in enumerate(self.d.crossings):
            for p, q in _STRANDS[(u >> x) & 1]:
                ra, rb = find(c[p]), find(c[q])
                if ra != rb:
                    if ra < rb:
                        parent[rb] = ra
                    else:
                        parent[ra] = rb
        circ = {a: find(a) for a in self.labels}
        for a in self.loops:
            circ[a] = a
        return circ

    def ncircles(self, u: int) -> int:
        return len(self.circle_ids[u])

    def pos(self, u: int, label: int) -> int:
        """Position (in the vertex order) of the circle through an arc."""
        if label in self._index:
            return int(self.label_pos[u][self._index[label]])
        return int(self.label_pos[u][len(self.labels) + self.loops.index(label)])

    def smoothing(self, u: int) -> Smoothing:
        ids = self.circle_ids[u]
        circle_of = {a: ids[self.pos(u, a)] for a in self.labels + self.loops}
        return Smoothing(u, circle_of, list(ids))


def resolve(d: LinkDiagram, u: Sequence[int]) -> Smoothing:
    """Smoothing at the vertex with bit sequence ``u``."""
    if len(u) != d.n:
        raise DiagramError("vertex length does not match the crossing count")
    v = sum(int(b) << x for x, b in enumerate(u))
    circ = Resolution.__new__(Resolution)
    circ.d, circ.n = d, d.n
    circ.labels = sorted({a for c in d.crossings for a in c})
    circ.loops = d.loop_labels()
    table = circ._trace(v)
    ids = sorted(set(table.values()))
    return Smoothing(v, table, ids)


@dataclass(frozen=True)
class SurgeryEvent:
    """Merge (s1, s2 -> s) or split (s -> s1, s2) along the edge v -> u.

    Circles are given by positions in the vertex orders.
    """

    crossing: int
    kind: str
    s1: int
    s2: int
    s: int
    perm: tuple[int, ...]   # v-position -> u-position (s -> s1 for a split)


def surgery_event(res: Resolution, v: int, x: int) -> SurgeryEvent:
    """Surgery at crossing ``x`` from vertex ``v`` (bit x clear) to ``v | 1<<x``."""
    d = res.d
    u = v | (1 << x)
    c = d.crossings[x]
    kv, ku = res.ncircles(v), res.ncircles(u)
    ids_v, ids_u = res.circle_ids[v], res.circle_ids[u]
    upos = {cid: i for i, cid in enumerate(ids_u)}
    perm = [upos.get(cid, -1) for cid in ids_v]
    if ku == kv - 1:
        p1, p2 = res.pos(v, c[0]), res.pos(v, c[2])
        s = res.pos(u, c[0])
        perm[p1] = s
        perm[p2] = s
        return SurgeryEvent(x, "merge", p1, p2, s, tuple(perm))
    if ku != kv + 1:
        raise DiagramError("surgery changed the circle count by %d" % (ku - kv))
    sw, ne = res.pos(u, c[0]), res.pos(u, c[1])
    s2, s1 = (ne, sw) if d.arrows[x] else (sw, ne)
    s = res.pos(v, c[0])
    perm[s] = s1
    assert -1 not in perm
    return SurgeryEvent(x, "split", s1, s2, s, tuple(perm))


def ladybug_pattern(d: LinkDiagram, w: int, i: int, j: int) -> int:
    """X/Y pattern of two interleaved surgery arcs on one circle of vertex ``w``.

    Walk the circle with the arc of the left-hand side (call it a) as
    reference.  Returns 1 if the endpoints read (tail_a, tail_b, head_a,
    head_b) cyclically, 2 if they read (tail_a, head_b, head_a, tail_b).
    """
    where = _slots(d.crossings)
    cr = d.crossings
    start_label = cr[i][0]
    slot = where[start_label][0]
    events = []
    first = slot
    while True:
        x, p = slot
        q = _PARTNER[(w >> x) & 1][p]
        if x in (i, j):
            se = p in (0, 1)
            head = se == d.arrows[x]
            left = (p, q) in ((0, 1), (2, 3))
            events.append((x, head, left))
        slot = _other_slot(where, cr[x][q], (x, q))
        if slot == first:
            break
    if len(events) != 4:
        raise DiagramError("arcs %d and %d do not lie on one circle" % (i, j))
    sides = {}
    for x, _, left in events:
        if sides.setdefault(x, left) != left:
            raise DiagramError("surgery arc meets both sides of a circle")
    if sides[i] == sides[j]:
        raise DiagramError("surgery arcs on the same side cannot interleave")
    a = i if sides[i] else j
    k = next(t for t, e in enumerate(events) if e[0] == a and not e[1])
    seq = events[k:] + events[:k]
    if seq[2][0] != a or seq[1][0] == a:
        raise DiagramError("surgery arcs do not interleave")
    return 2 if seq[1][1] else 1
