"""Regenerate the bundled knot table and the frozen KnotInfo oracle file.

Needs the ``database_knotinfo`` package, which the library itself does not use.
"""

import ast
from pathlib import Path

from database_knotinfo import link_list

ROOT = Path(__file__).resolve().parents[1]
TABLE = ROOT / "src" / "oddkh" / "data" / "knots.tsv"
ORACLE = ROOT / "tests" / "data" / "knotinfo.tsv"
MAX_CROSSINGS = 11


def pd_text(pd):
    return " ".join("X[%d,%d,%d,%d]" % tuple(c) for c in pd)


def main():
    rows, oracle = [], []
    for k in link_list()[1:]:
        if not k["pd_notation"] or not k["crossing_number"]:
            continue
        if int(k["crossing_number"]) > MAX_CROSSINGS:
            continue
        pd = pd_text(ast.literal_eval(k["pd_notation"]))
        rows.append((k["name"], pd))
        oracle.append((k["name"], k["rasmussen_invariant"],
                       k["khovanov_odd_integral_polynomial"].replace(" ", ""),
                       k["khovanov_unreduced_integral_polynomial"].replace(" ", "")))
    fixtures = [
        ("unknot", "U"),
        ("unknot_kink", "X[1,1,2,2]"),
        ("right_trefoil", "X[1,5,2,4] X[3,1,4,6] X[5,3,6,2]"),
        ("left_trefoil", "X[1,4,2,5] X[3,6,4,1] X[5,2,6,3]"),
        ("T23_T23", "X[1,5,2,4] X[3,1,4,6] X[5,3,6,2] X[7,11,8,10] X[9,7,10,12] X[11,9,12,8]"),
    ]
    with TABLE.open("w") as fh:
        fh.write("# name\tpd\n")
        for name, pd in fixtures + rows:
            fh.write("%s\t%s\n" % (name, pd))
    with ORACLE.open("w") as fh:
        fh.write("# name\ts\todd_reduced\teven_unreduced\n")
        for r in oracle:
            fh.write("\t".join(r) + "\n")


if __name__ == "__main__":
    main()
