#!/usr/bin/env python3
"""Solve an SDPA sparse (.dat-s) file with SCS.

Usage: sdpa_scs.py INPUT OUTPUT [--time-limit SECONDS] [--eps EPS]

First-order alternative to sdpa_clarabel.py for relaxations whose PSD blocks
are too large for an interior-point method in memory. Writes the same
SDPA-style result lines.
"""

import argparse
import math
import sys

import numpy as np
import scipy.sparse as sp
import scs

from sdpa_clarabel import read_sdpa


def build(m, sizes, entries):
    """Rows of A and b with s = b - A x in SCS's cone order (l, then s)."""
    order = [k for k, s in enumerate(sizes) if s < 0] + [k for k, s in enumerate(sizes) if s > 0]
    offsets, dim = {}, 0
    for k in order:
        offsets[k] = dim
        s = sizes[k]
        dim += -s if s < 0 else s * (s + 1) // 2

    def index(blk, i, j):
        s = sizes[blk]
        if s < 0:
            return offsets[blk] + i, 1.0
        i, j = max(i, j), min(i, j)
        # lower triangle stored column by column
        pos = j * s - j * (j - 1) // 2 + (i - j)
        return offsets[blk] + pos, (1.0 if i == j else math.sqrt(2.0))

    rows, cols, vals = [], [], []
    b = np.zeros(dim)
    for mat, blk, i, j, v in entries:
        blk -= 1
        if sizes[blk] < 0 and i != j:
            continue
        r, scale = index(blk, i - 1, j - 1)
        if mat == 0:
            b[r] -= scale * v
        else:
            rows.append(r)
            cols.append(mat - 1)
            vals.append(-scale * v)
    a = sp.csc_matrix((vals, (rows, cols)), shape=(dim, m))
    cone = {"l": sum(-s for s in sizes if s < 0), "s": [s for s in sizes if s > 0]}
    return a, b, cone


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("input")
    ap.add_argument("output")
    ap.add_argument("--time-limit", type=float, default=None)
    ap.add_argument("--eps", type=float, default=1e-7)
    args = ap.parse_args()

    m, sizes, c, entries = read_sdpa(args.input)
    a, b, cone = build(m, sizes, entries)
    settings = dict(verbose=False, eps_abs=args.eps, eps_rel=args.eps, max_iters=200000)
    if args.time_limit is not None:
        settings["time_limit_secs"] = args.time_limit
    sol = scs.SCS({"A": a, "b": b, "c": c}, cone, **settings).solve()
    info = sol["info"]
    status = info["status"]
    if status in ("solved", "solved_inaccurate"):
        phase = "pdOPT"
    elif status.startswith("infeasible"):
        phase = "pINF"
    elif status.startswith("unbounded"):
        phase = "dINF"
    else:
        phase = "noINFO"
    primal = float(info["pobj"]) if phase == "pdOPT" else float("nan")
    dual = float(info["dobj"]) if phase == "pdOPT" else float("nan")
    text = (
        f"phase.value = {phase}\n"
        f"objValPrimal = {primal:.16e}\n"
        f"objValDual = {dual:.16e}\n"
        f"status = {status}\n"
        f"time = {(info['setup_time'] + info['solve_time']) / 1000.0:.6f}\n"
    )
    with open(args.output, "w") as fh:
        fh.write(text)
    sys.stdout.write(text)


if __name__ == "__main__":
    main()
