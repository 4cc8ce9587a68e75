"""Exact linear algebra over F2 (bitset rows) and over the integers.

F2 vectors are Python integers; bit ``i`` is coordinate ``i``.  Pivots
are lowest set bits, so "leftmost pivot" means the smallest column index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence


# ------------------------------------------------------------------ F2 side

def lowbit(v: int) -> int:
    return (v & -v).bit_length() - 1


def bits_of(v: int) -> list[int]:
    out = []
    while v:
        b = v & -v
        out.append(b.bit_length() - 1)
        v ^= b
    return out


def vec(indices: Iterable[int]) -> int:
    v = 0
    for i in indices:
        v ^= 1 << i
    return v


@dataclass
class F2Matrix:
    """Row-major F2 matrix; each row is an int bitmask over the columns."""

    nrows: int
    ncols: int
    rows: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.rows:
            self.rows = [0] * self.nrows
        if len(self.rows) != self.nrows:
            raise ValueError("row count mismatch")
        lim = 1 << self.ncols
        if any(r < 0 or r >= lim for r in self.rows):
            raise ValueError("entry outside the column range")

    @classmethod
    def from_dense(cls, data: Sequence[Sequence[int]]) -> "F2Matrix":
        nrows = len(data)
        ncols = len(data[0]) if nrows else 0
        rows = [vec(j for j, a in enumerate(r) if a % 2) for r in data]
        return cls(nrows, ncols, rows)

    @classmethod
    def from_entries(cls, nrows: int, ncols: int, entries: Iterable[tuple[int, int]]) -> "F2Matrix":
        rows = [0] * nrows
        for i, j in entries:
            rows[i] ^= 1 << j
        return cls(nrows, ncols, rows)

    def to_dense(self) -> list[list[int]]:
        return [[(r >> j) & 1 for j in range(self.ncols)] for r in self.rows]

    def entries(self) -> set[tuple[int, int]]:
        return {(i, j) for i, r in enumerate(self.rows) for j in bits_of(r)}

    def transpose(self) -> "F2Matrix":
        cols = [0] * self.ncols
        for i, r in enumerate(self.rows):
            for j in bits_of(r):
                cols[j] |= 1 << i
        return F2Matrix(self.ncols, self.nrows, cols)

    def columns(self) -> list[int]:
        return self.transpose().rows

    def apply(self, x: int) -> int:
        """Matrix times column vector x."""
        out = 0
        for i, r in enumerate(self.rows):
            if bin(r & x).count("1") & 1:
                out |= 1 << i
        return out

    def __eq__(self, other) -> bool:
        return (isinstance(other, F2Matrix) and self.nrows == other.nrows
                and self.ncols == other.ncols and self.rows == other.rows)


class Echelon:
    """Incrementally built echelon basis with optional tag tracking.

    Each stored vector has a distinct lowest set bit.  Tags record which
    inserted vectors were combined, so that dependencies and coordinates
    can be read off.
    """

    __slots__ = ("piv", "tag")

    def __init__(self):
        self.piv: dict[int, int] = {}
        self.tag: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self.piv)

    def reduce(self, v: int, t: int = 0) -> tuple[int, int]:
        """Clear every pivot position of v; return (remainder, tag)."""
        piv, tag = self.piv, self.tag
        rest = 0
        while v:
            b = v & -v
            p = piv.get(b)
            if p is None:
                rest |= b
                v ^= b
            else:
                v ^= p
                t ^= tag[b]
        return rest, t

    def reduce_lead(self, v: int, t: int = 0) -> tuple[int, int]:
        """Reduce until the lowest bit is not a pivot (cheaper than reduce)."""
        piv, tag = self.piv, self.tag
        while v:
            b = v & -v
            p = piv.get(b)
            if p is None:
                break
            v ^= p
            t ^= tag[b]
        return v, t

    def add(self, v: int, t: int = 0) -> Optional[int]:
        """Insert v; return None if independent, else the dependency tag."""
        v, t = self.reduce_lead(v, t)
        if v == 0:
            return t
        b = v & -v
        self.piv[b] = v
        self.tag[b] = t
        return None

    def contains(self, v: int) -> bool:
        return self.reduce_lead(v)[0] == 0

    def coordinates(self, v: int) -> int:
        """Tag of a vector in the span; raises if it is not in the span."""
        v, t = self.reduce_lead(v)
        if v:
            raise ValueError("vector not in span")
        return t

    def vectors(self) -> list[int]:
        return [self.piv[b] for b in sorted(self.piv)]


def rank_f2(vectors: Iterable[int]) -> int:
    e = Echelon()
    r = 0
    for v in vectors:
        if e.add(v) is None:
            r += 1
    return r


def rref(m: F2Matrix) -> tuple[F2Matrix, list[int]]:
    """Reduced row echelon form (leftmost pivot, topmost row first)."""
    rows = list(m.rows)
    pivots = []
    r = 0
    for j in range(m.ncols):
        b = 1 << j
        k = next((i for i in range(r, len(rows)) if rows[i] & b), None)
        if k is None:
            continue
        rows[r], rows[k] = rows[k], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i] & b:
                rows[i] ^= rows[r]
        pivots.append(j)
        r += 1
    return F2Matrix(m.nrows, m.ncols, rows), pivots


@dataclass
class Subspace:
    """Subspace of F2^dim with a reduced echelon basis."""

    dim: int
    basis: list[int]

    @classmethod
    def span(cls, dim: int, vectors: Iterable[int]) -> "Subspace":
        vs = list(vectors)
        red, piv = rref(F2Matrix(len(vs), dim, vs))
        return cls(dim, red.rows[:len(piv)])

    def __len__(self) -> int:
        return len(self.basis)

    def contains(self, v: int) -> bool:
        e = Echelon()
        for b in self.basis:
            e.add(b)
        return e.contains(v)


def kernel_basis(a: F2Matrix) -> Subspace:
    """Kernel of x -> A x, as a subspace of F2^cols."""
    e = Echelon()
    ker = []
    for j, col in enumerate(a.columns()):
        dep = e.add(col, 1 << j)
        if dep is not None:
            ker.append(dep)
    return Subspace.span(a.ncols, ker)


def image_basis(a: F2Matrix) -> Subspace:
    """Column space of A, as a subspace of F2^rows."""
    return Subspace.span(a.nrows, a.columns())


def solve_f2(a: F2Matrix, b: int) -> Optional[int]:
    """Some x with A x = b, or None."""
    if b >> a.nrows:
        raise ValueError("right-hand side longer than the row count")
    e = Echelon()
    for j, col in enumerate(a.columns()):
        e.add(col, 1 << j)
    rest, t = e.reduce_lead(b)
    return t if rest == 0 else None


def quotient_reps(v: Subspace, w: Subspace) -> list[int]:
    """Vectors of V projecting to a basis of V/W (requires W inside V)."""
    e = Echelon()
    for x in w.basis:
        e.add(x)
    vs = Echelon()
    for x in v.basis:
        vs.add(x)
    for x in w.basis:
        if not vs.contains(x):
            raise ValueError("W is not contained in V")
    reps = []
    for x in v.basis:
        if e.add(x) is None:
            reps.append(x)
    return reps


# ------------------------------------------------------------ integer side

@dataclass
class IntMatrix:
    """Sparse integer matrix."""

    nrows: int
    ncols: int
    entries: dict[tuple[int, int], int] = field(default_factory=dict)

    @classmethod
    def from_dense(cls, data: Sequence[Sequence[int]]) -> "IntMatrix":
        nrows = len(data)
        ncols = len(data[0]) if nrows else 0
        ent = {(i, j): int(a) for i, r in enumerate(data) for j, a in enumerate(r) if a}
        return cls(nrows, ncols, ent)

    def to_dense(self) -> list[list[int]]:
        out = [[0] * self.ncols for _ in range(self.nrows)]
        for (i, j), a in self.entries.items():
            out[i][j] = a
        return out


def _matmul(a, b):
    n, m = len(a), len(b[0]) if b else 0
    k = len(b)
    return [[sum(a[i][t] * b[t][j] for t in range(k)) for j in range(m)] for i in range(n)]


def _identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(a: IntMatrix) -> tuple[list[int], list[list[int]], list[list[int]]]:
    """Diagonal d_1 | d_2 | ... and unimodular U, V with U A V = diag.

    Dense, exact, for small matrices.  The returned diagonal has length
    min(rows, cols) with trailing zeros.
    """
    m = a.to_dense()
    nr, nc = a.nrows, a.ncols
    u, v = _identity(nr), _identity(nc)
    t = 0
    while t < min(nr, nc):
        nz = [(abs(m[i][j]), i, j) for i in range(t, nr) for j in range(t, nc) if m[i][j]]
        if not nz:
            break
        _, pi, pj = min(nz)
        m[t], m[pi] = m[pi], m[t]
        u[t], u[pi] = u[pi], u[t]
        for row in m:
            row[t], row[pj] = row[pj], row[t]
        for row in v:
            row[t], row[pj] = row[pj], row[t]
        while True:
            p = m[t][t]
            done = True
            for i in range(t + 1, nr):
                if m[i][t]:
                    q = m[i][t] // p
                    m[i] = [x - q * y for x, y in zip(m[i], m[t])]
                    u[i] = [x - q * y for x, y in zip(u[i], u[t])]
                    if m[i][t]:
                        done = False
            for j in range(t + 1, nc):
                if m[t][j]:
                    q = m[t][j] // p
                    for row in m:
                        row[j] -= q * row[t]
                    for row in v:
                        row[j] -= q * row[t]
                    if m[t][j]:
                        done = False
            if not done:
                # move the smallest remaining entry of row/column t to the pivot
                cand = [(abs(m[i][t]), i, t) for i in range(t, nr) if m[i][t]]
                cand += [(abs(m[t][j]), t, j) for j in range(t, nc) if m[t][j]]
                _, pi, pj = min(cand)
                m[t], m[pi] = m[pi], m[t]
                u[t], u[pi] = u[pi], u[t]
                for row in m:
                    row[t], row[pj] = row[pj], row[t]
                for row in v:
                    row[t], row[pj] = row[pj], row[t]
                continue
            # divisibility: the pivot must divide every remaining entry
            bad = next(((i, j) for i in range(t + 1, nr) for j in range(t + 1, nc)
                        if m[i][j] % p), None)
            if bad is None:
                break
            i, _ = bad
            m[t] = [x + y for x, y in zip(m[t], m[i])]
            u[t] = [x + y for x, y in zip(u[t], u[i])]
        if m[t][t] < 0:
            m[t] = [-x for x in m[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    diag = [m[i][i] for i in range(min(nr, nc))]
    return diag, u, v


def elementary_divisors(cols: Sequence[dict[int, int]], nrows: int) -> tuple[int, list[int]]:
    """Rank and the invariant factors > 1 of a sparse integer matrix.

    ``cols[j]`` maps row index to entry.  Unit pivots are eliminated
    sparsely first; the small leftover block goes through dense SNF.
    """
    colmap: dict[int, dict[int, int]] = {j: dict(c) for j, c in enumerate(cols) if c}
    rowmap: dict[int, dict[int, int]] = {}
    for j, c in colmap.items():
        for i, a in c.items():
            rowmap.setdefault(i, {})[j] = a
    rank = 0
    progress = True
    while progress:
        progress = False
        for j in sorted(colmap, key=lambda j: len(colmap[j])):
            col = colmap.get(j)
            if not col:
                continue
            best = None
            for i, a in col.items():
                if a == 1 or a == -1:
                    ln = len(rowmap[i])
                    if best is None or ln < best[0]:
                        best = (ln, i)
            if best is None:
                continue
            i = best[1]
            prow = rowmap[i]
            pa = col[i]
            for r, ar in list(col.items()):
                if r == i:
                    continue
                f = ar * pa          # pa = +-1, so ar / pa = ar * pa
                row_r = rowmap[r]
                for c2, a2 in prow.items():
                    nv = row_r.get(c2, 0) - f * a2
                    if nv:
                        row_r[c2] = nv
                        colmap[c2][r] = nv
                    else:
                        row_r.pop(c2, None)
                        colmap[c2].pop(r, None)
                if not row_r:
                    del rowmap[r]
            for c2 in prow:
                colmap[c2].pop(i, None)
            del rowmap[i]
            colmap.pop(j, None)
            rank += 1
            progress = True
    rest_cols = [j for j, c in colmap.items() if c]
    rest_rows = sorted(rowmap)
    if not rest_cols:
        return rank, []
    ri = {r: k for k, r in enumerate(rest_rows)}
    ent = {}
    for k, j in enumerate(rest_cols):
        for r, a in colmap[j].items():
            ent[(ri[r], k)] = a
    diag, _, _ = smith_normal_form(IntMatrix(len(rest_rows), len(rest_cols), ent))
    nz = [x for x in diag if x]
    return rank + len(nz), [x for x in nz if x > 1]
