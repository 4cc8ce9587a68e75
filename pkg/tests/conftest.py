import re
from functools import lru_cache
from pathlib import Path

import pytest

from oddkh.cli import read_table
from oddkh.diagram import mirror, parse_pd
from oddkh.oddcomplex import KhovanovCube

DATA = Path(__file__).parent / "data"

RIGHT_TREFOIL = "X[1,5,2,4] X[3,1,4,6] X[5,3,6,2]"
LEFT_TREFOIL = "X[1,4,2,5] X[3,6,4,1] X[5,2,6,3]"
FIGURE_EIGHT = "X[4,2,5,1] X[8,6,1,5] X[6,3,7,4] X[2,7,3,8]"


def primary(tors):
    """Torsion coefficients split into prime powers, sorted."""
    out = []
    for t in tors:
        p = 2
        while t > 1:
            if t % p == 0:
                q = 1
                while t % p == 0:
                    t //= p
                    q *= p
                out.append(q)
            p += 1
    return sorted(out)


def parse_poly(s):
    """KnotInfo Khovanov polynomial -> {(i, j): (rank, torsion)}."""
    out = {}
    s = s.replace(" ", "")
    if not s:
        return out
    for term in s.split("+"):
        if not term:
            continue
        m = re.match(r"^(\d+)?\*?(.*)$", term)
        c = int(m.group(1)) if m.group(1) else 1
        i = j = tor = 0
        for var, e in re.findall(r"([tqT])(?:\^\((-?\d+)\))?", m.group(2)):
            e = int(e) if e else 1
            if var == "t":
                i = e
            elif var == "q":
                j = e
            else:
                tor = e
        r, ts = out.get((i, j), (0, []))
        if tor:
            out[(i, j)] = (r, primary(ts + [tor] * c))
        else:
            out[(i, j)] = (r + c, ts)
    return out


def normalized(h):
    return {k: (r, primary(t)) for k, (r, t) in h.items()}


@lru_cache(maxsize=None)
def knotinfo():
    rows = {}
    for line in (DATA / "knotinfo.tsv").read_text().splitlines():
        if line.startswith("#") or not line.strip():
            continue
        name, s, odd, even = line.split("\t")
        rows[name] = (int(s), parse_poly(odd), parse_poly(even))
    return rows


@lru_cache(maxsize=None)
def table():
    return dict(read_table())


def crossings_of(name):
    return int(name.split("_")[0].rstrip("an"))


def prime_knots(max_crossings, min_crossings=3):
    return [n for n in table() if "_" in n and n[0].isdigit()
            and min_crossings <= crossings_of(n) <= max_crossings]


def diagram(name, mirrored=False, basepoint=None):
    d = parse_pd(table()[name])
    if mirrored:
        d = mirror(d)
    if basepoint is not None:
        d = d.with_basepoint(basepoint)
    return d


@lru_cache(maxsize=None)
def cube_of(name, mirrored=False):
    return KhovanovCube(diagram(name, mirrored))


@pytest.fixture
def trefoil():
    return KhovanovCube(parse_pd(RIGHT_TREFOIL))


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
