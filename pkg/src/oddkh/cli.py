"""Command-line front end: homology, Steenrod squares, s-invariants, validation."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .diagram import DiagramError, LinkDiagram, mirror, parse_pd
from .exactla import F2Matrix
from .flowcat import CoverError, FlowCategory, random_sign_frame, validate
from .oddcomplex import ComplexError, KhovanovCube, Slice, homology, reduced_homology
from .sinvariant import SInvariantError, refine
from .steenrod import SliceOps, SteenrodError, slice_report

SCHEMA = 1
OPS = ("homology", "sq2e0", "sq2e1", "sq2even", "sq1odd", "sq1even", "chang", "sinv",
       "validate", "duality-report")


class InputError(ValueError):
    """Bad command-line input: unknown knot, unreadable table, malformed PD."""


@dataclass
class JobConfig:
    pd: Optional[str] = None
    knot: Optional[str] = None
    table: Optional[str] = None
    op: str = "homology"
    epsilon: Optional[int] = None
    delta: int = 0
    seed: Optional[int] = None
    mirror: bool = False
    basepoint: Optional[int] = None
    json: bool = True
    jobs: int = 1
    inject: Optional[str] = None


# ------------------------------------------------------------------ input

def read_table(path: Optional[str] = None) -> list[tuple[str, str]]:
    """Records "name<TAB>pd" of a table file, or of the bundled table."""
    if path is None:
        text = resources.files("oddkh").joinpath("data/knots.tsv").read_text()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise InputError("cannot read table %s: %s" % (path, exc)) from exc
    rows = []
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t", 1)
        if len(parts) != 2:
            raise InputError("table line %d is not name<TAB>pd" % ln)
        rows.append((parts[0].strip(), parts[1].strip()))
    return rows


def lookup(name: str) -> str:
    for n, pd in read_table():
        if n == name:
            return pd
    raise InputError("unknown knot %r" % name)


def inputs(cfg: JobConfig) -> list[tuple[str, LinkDiagram]]:
    if sum(x is not None for x in (cfg.pd, cfg.knot, cfg.table)) != 1:
        raise InputError("give exactly one of --pd, --knot, --table")
    if cfg.pd is not None:
        recs = [("pd", cfg.pd)]
    elif cfg.knot is not None:
        recs = [(cfg.knot, lookup(cfg.knot))]
    else:
        recs = read_table(cfg.table)
    out = []
    for name, text in recs:
        try:
            d = parse_pd(text)
        except DiagramError as exc:
            raise InputError("%s: %s" % (name, exc)) from exc
        if cfg.mirror:
            d = mirror(d)
        if cfg.basepoint is not None:
            try:
                d = d.with_basepoint(cfg.basepoint)
            except DiagramError as exc:
                raise InputError("%s: %s" % (name, exc)) from exc
        out.append((name, d))
    return out


def build(d: LinkDiagram, seed: Optional[int], delta: int = 0):
    """Cube and a frame chooser eps -> frame; a seed re-rolls every auxiliary choice."""
    if seed is None:
        return KhovanovCube(d), lambda eps: None
    rng = np.random.default_rng(seed)
    frame_seed = int(rng.integers(1 << 30))
    arrows = [bool(b) for b in rng.integers(0, 2, d.n)]
    s, _ = random_sign_frame(d.n, np.random.default_rng(frame_seed), delta, 0)
    kc = KhovanovCube(d.with_arrows(arrows), special="XY"[int(rng.integers(2))],
                      order_seed=int(rng.integers(1 << 30)), eps_seed=int(rng.integers(1 << 30)),
                      sign=s)

    def frame(eps):
        return random_sign_frame(d.n, np.random.default_rng(frame_seed), delta, eps)[1]

    return kc, frame


# ------------------------------------------------------------ operations

def _groups(h: dict) -> list[dict]:
    out = []
    for (i, j), g in sorted(h.items()):
        if isinstance(g, tuple):
            out.append({"i": i, "j": j, "rank": g[0], "torsion": g[1]})
        else:
            out.append({"i": i, "j": j, "dim": g})
    return out


def cmd_homology(cfg: JobConfig, name: str, d: LinkDiagram) -> dict:
    kc, _ = build(d, cfg.seed)
    rep = {"knot": name, "odd": _groups(homology(kc)), "odd_f2": _groups(homology(kc, coefficients="F2")),
           "even": _groups(homology(kc, "even"))}
    if d.basepoint is not None:
        rep["odd_reduced"] = _groups(reduced_homology(kc))
    return rep


def _matrix(m: F2Matrix) -> list[list[int]]:
    return m.to_dense()


def _cat(kc: KhovanovCube, op: str, frame, delta: int):
    variant, eps = {"sq2e0": ("odd", 0), "sq2e1": ("odd", 1), "sq2even": ("even", 0)}[op]
    return FlowCategory(kc, variant, frame=frame(eps), delta=delta, eps=eps)


def cmd_steenrod(cfg: JobConfig, name: str, d: LinkDiagram) -> dict:
    kc, frame = build(d, cfg.seed, cfg.delta)
    ops = [cfg.op]
    if cfg.op in ("sq2e0", "sq2e1") and cfg.epsilon is not None:
        ops = ["sq2e%d" % cfg.epsilon]
    entries = []
    for op in ops:
        cat = None if op.startswith("sq1") else _cat(kc, op, frame, cfg.delta)
        for j in kc.qdegrees():
            ents, word = slice_report(kc, j, op, cat)
            for e in ents:
                entries.append({"i": e.i, "j": e.j, "rank": e.rank, "matrix": _matrix(e.matrix),
                                "chang_word": word if op.startswith("sq2") else None})
    return {"knot": name, "variant": ops[0], "entries": entries}


def cmd_chang(cfg: JobConfig, name: str, d: LinkDiagram) -> dict:
    kc, frame = build(d, cfg.seed, cfg.delta)
    rows = []
    cats = {op: _cat(kc, op, frame, cfg.delta) for op in ("sq2even", "sq2e0", "sq2e1")}
    for j in kc.qdegrees():
        sl = Slice(kc, j, "even")
        dims = sl.f2_dims()
        if not any(dims.get(i) and dims.get(i + 2) for i in dims):
            continue
        words = {op: slice_report(kc, j, op, cats[op])[1] for op in cats}
        rows.append({"j": j, "sq2": words["sq2even"], "sq2e0": words["sq2e0"], "sq2e1": words["sq2e1"]})
    return {"knot": name, "rows": rows}


def cmd_sinv(cfg: JobConfig, name: str, d: LinkDiagram) -> dict:
    s, res = refine(d)
    return {"knot": name, "s_f2": s,
            "refinements": {"sq2": list(res["sq2even"].tuple()), "sq2e0": list(res["sq2e0"].tuple()),
                            "sq2e1": list(res["sq2e1"].tuple())}}


def _sq2_all(kc, frame, delta):
    h = homology(kc, coefficients="F2")
    out = {}
    for op in ("sq2even", "sq2e0", "sq2e1"):
        cat = _cat(kc, op, frame, delta)
        for (i, j) in sorted(h):
            if (i + 2, j) in h:
                out["%s:%d:%d" % (op, i, j)] = SliceOps(kc, j, cat).sq2(i).rows
    return out


def cmd_validate(cfg: JobConfig, name: str, d: LinkDiagram) -> dict:
    """Cover axioms for both variants and both eps, and choice independence."""
    problems = []
    kc = KhovanovCube(d)
    for variant in ("odd", "even"):
        if not kc.delta_squared_zero(variant):
            problems.append("d^2 != 0 (%s)" % variant)
    for variant in ("odd", "even"):
        for eps in (0, 1):
            cat = FlowCategory(kc, variant, delta=cfg.delta, eps=eps)
            if cfg.inject:
                cat = _inject(cat, cfg.inject)
            rep = validate(cat)
            if not rep.ok:
                problems.append({"variant": variant, "eps": eps,
                                 "missing": [[I.top, I.bottom] for I in rep.missing_points],
                                 "sign": [[I.top, I.bottom] for I in rep.sign_violations],
                                 "frame": [list(x) for x in rep.frame_violations],
                                 "shape": [list(x) for x in rep.non_hexagons]})
    base = _sq2_all(kc, lambda eps: None, 0)
    seeds = [cfg.seed] if cfg.seed is not None else [0, 1, 2]
    for sd in seeds:
        kc2, f2 = build(d, sd, sd % 2)
        if _sq2_all(kc2, f2, sd % 2) != base:
            problems.append("Sq^2 changed under re-roll with seed %d" % sd)
    return {"knot": name, "ok": not problems, "problems": problems}


def _inject(cat: FlowCategory, what: str) -> FlowCategory:
    ivs = [I for a in cat.objects for I in cat.intervals(a)]
    if not ivs:
        return cat
    I = ivs[len(ivs) // 2]
    if what == "frame":
        return cat.with_frames({I.key: 1 - I.framing})
    if what == "sign":
        return cat.with_point_signs([I.first[0]])
    raise InputError("unknown fault %r" % what)


def dual_index(kc: KhovanovCube, km: KhovanovCube) -> np.ndarray:
    """Generator of the mirror cube paired with each generator of ``kc``."""
    full = (1 << kc.n) - 1
    out = np.empty(kc.N, dtype=np.int64)
    for u in range(1 << kc.n):
        ub = full ^ u
        if kc.res.circle_ids[u] != km.res.circle_ids[ub]:
            raise ComplexError("mirror cube does not match the complementary vertex")
        k = int(kc.k[u])
        m = np.arange(1 << k, dtype=np.int64)
        out[kc.offset[u]:kc.offset[u + 1]] = km.offset[ub] + (((1 << k) - 1) ^ m)
    return out


def _pairing(ops, opm, i, dual) -> list[int]:
    """Rows: classes of H^i(L); bits: classes of H^{-i}(mirror)."""
    a, b = ops.dim(i), opm.dim(-i)
    rows = []
    for x in range(a):
        zx = {int(dual[g]) for g in ops.rep_objects(i, x)}
        r = 0
        for y in range(b):
            if len(zx & opm.rep_objects(-i, y)) % 2:
                r |= 1 << y
        rows.append(r)
    return rows


def cmd_duality(cfg: JobConfig, name: str, d: LinkDiagram) -> dict:
    """Compare Sq^2_e on L with the dual of Sq^2_{e'} on the mirror, for e' = 1+e and e' = e."""
    kc, km = KhovanovCube(d), KhovanovCube(mirror(d))
    dual = dual_index(kc, km)
    h = homology(kc, coefficients="F2")
    rows = []
    for (i, j) in sorted(h):
        if (i + 2, j) not in h:
            continue
        for eps in (0, 1):
            ops = SliceOps(kc, j, FlowCategory(kc, "odd", eps=eps))
            s_l = ops.sq2(i)
            res = {"i": i, "j": j, "epsilon": eps}
            for tag, e2 in (("dual_1_plus_eps", 1 - eps), ("dual_same_eps", eps)):
                opm = SliceOps(km, -j, FlowCategory(km, "odd", eps=e2))
                s_m = opm.sq2(-i - 2)
                p_lo, p_hi = _pairing(ops, opm, i, dual), _pairing(ops, opm, i + 2, dual)
                ok = True
                for x in range(ops.dim(i)):
                    img = 0
                    for r in range(s_l.nrows):
                        if (s_l.rows[r] >> x) & 1:
                            img ^= p_hi[r]
                    for y in range(opm.dim(-i - 2)):
                        lhs = (img >> y) & 1
                        col = 0
                        for r in range(s_m.nrows):
                            if (s_m.rows[r] >> y) & 1:
                                col ^= 1 << r
                        rhs = bin(p_lo[x] & col).count("1") & 1
                        ok &= lhs == rhs
                res[tag] = bool(ok)
            rows.append(res)
    return {"knot": name, "rows": rows}


COMMANDS = {"homology": cmd_homology, "sq2e0": cmd_steenrod, "sq2e1": cmd_steenrod,
            "sq2even": cmd_steenrod, "sq1odd": cmd_steenrod, "sq1even": cmd_steenrod,
            "chang": cmd_chang, "sinv": cmd_sinv, "validate": cmd_validate,
            "duality-report": cmd_duality}


def _run_one(args):
    cfg, name, d = args
    return COMMANDS[cfg.op](cfg, name, d)


# ------------------------------------------------------------ reporting

def _text(rep: dict) -> str:
    lines = []
    for r in rep["results"]:
        head = r.get("knot", "?")
        for k, v in r.items():
            if k == "knot":
                continue
            if isinstance(v, list):
                lines.append("%s %s:" % (head, k))
                for item in v:
                    lines.append("  " + (json.dumps(item, sort_keys=True, ensure_ascii=False)
                                         if not isinstance(item, str) else item))
            else:
                lines.append("%s %s: %s" % (head, k, json.dumps(v, sort_keys=True, ensure_ascii=False)))
    return "\n".join(lines)


def parse_args(argv) -> JobConfig:
    p = argparse.ArgumentParser(prog="oddkh", description=__doc__)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--pd", help="PD code, e.g. 'X[1,5,2,4] X[3,1,4,6] X[5,3,6,2]'")
    src.add_argument("--knot", help="name in the bundled table, e.g. 8_19")
    src.add_argument("--table", help="file of name<TAB>pd records")
    p.add_argument("--op", choices=OPS, default="homology")
    p.add_argument("--epsilon", type=int, choices=(0, 1))
    p.add_argument("--delta", type=int, choices=(0, 1), default=0)
    p.add_argument("--seed", type=int)
    p.add_argument("--mirror", action="store_true")
    p.add_argument("--basepoint", type=int)
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="json", action="store_true", default=True)
    fmt.add_argument("--text", dest="json", action="store_false")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--inject", choices=("frame", "sign"), help=argparse.SUPPRESS)
    a = p.parse_args(argv)
    return JobConfig(a.pd, a.knot, a.table, a.op, a.epsilon, a.delta, a.seed, a.mirror,
                     a.basepoint, a.json, max(1, a.jobs), a.inject)


def run(cfg: JobConfig) -> tuple[dict, int]:
    items = inputs(cfg)
    jobs = [(cfg, name, d) for name, d in items]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(cfg.jobs) as ex:
            results = list(ex.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    status = 0
    if cfg.op == "validate" and not all(r["ok"] for r in results):
        status = 1
    return {"schema": SCHEMA, "op": cfg.op, "results": results}, status


def main(argv=None) -> int:
    try:
        cfg = parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        rep, status = run(cfg)
    except (InputError, DiagramError) as exc:
        print("input error: %s" % exc, file=sys.stderr)
        return 2
    except (ComplexError, CoverError, SteenrodError, SInvariantError) as exc:
        print("computation failed: %s" % exc, file=sys.stderr)
        return 1
    if cfg.json:
        print(json.dumps(rep, sort_keys=True, ensure_ascii=False))
    else:
        print(_text(rep))
    return status


if __name__ == "__main__":
    sys.exit(main())
