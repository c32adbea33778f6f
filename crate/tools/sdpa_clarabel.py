#!/usr/bin/env python3
"""Solve an SDPA sparse (.dat-s) file with Clarabel.

Usage: sdpa_clarabel.py INPUT OUTPUT [--time-limit SECONDS]

Solves  min c.x  s.t.  sum_i F_i x_i - F_0 >= 0  and writes an SDPA-style
result (phase.value, objValPrimal, objValDual) to OUTPUT and stdout.
"""

import argparse
import math
import re
import sys

import numpy as np
import scipy.sparse as sp

import clarabel


def read_sdpa(path):
    with open(path) as fh:
        lines = [l for l in fh if l.strip() and l.lstrip()[0] not in '"*']
    tokens = lambda s: [t for t in re.split(r"[\s,{}()]+", s.strip()) if t]
    m = int(tokens(lines[0])[0])
    nblocks = int(tokens(lines[1])[0])
    sizes = [int(t) for t in tokens(lines[2])[:nblocks]]
    rest = lines[3:]
    c = []
    while len(c) < m:
        c.extend(float(t) for t in tokens(rest.pop(0)))
    entries = []
    for line in rest:
        t = tokens(line)
        if len(t) >= 5:
            entries.append((int(t[0]), int(t[1]), int(t[2]), int(t[3]), float(t[4])))
    return m, sizes, np.array(c[:m]), entries


def build(m, sizes, entries):
    """Rows of A and b so that s = b - A x lies in the product cone."""
    offsets, cones, dim = [], [], 0
    for s in sizes:
        offsets.append(dim)
        if s < 0:
            dim += -s
            cones.append(clarabel.NonnegativeConeT(-s))
        else:
            dim += s * (s + 1) // 2
            cones.append(clarabel.PSDTriangleConeT(s))

    def index(blk, i, j):
        s = sizes[blk]
        if s < 0:
            return offsets[blk] + i, 1.0
        i, j = min(i, j), max(i, j)
        # upper triangle stored column by column
        pos = j * (j + 1) // 2 + i
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
    return a, b, cones


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("input")
    ap.add_argument("output")
    ap.add_argument("--time-limit", type=float, default=None)
    args = ap.parse_args()

    m, sizes, c, entries = read_sdpa(args.input)
    a, b, cones = build(m, sizes, entries)
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.tol_gap_abs = 1e-9
    settings.tol_gap_rel = 1e-9
    settings.tol_feas = 1e-9
    if args.time_limit is not None:
        settings.time_limit = args.time_limit
    p = sp.csc_matrix((m, m))
    solver = clarabel.DefaultSolver(p, c, a, b, cones, settings)
    sol = solver.solve()
    status = str(sol.status)
    if status.endswith("AlmostSolved") or status.endswith("Solved"):
        phase = "pdOPT"
    elif "PrimalInfeasible" in status:
        phase = "pINF"
    elif "DualInfeasible" in status:
        phase = "dINF"
    else:
        phase = "noINFO"
    x = np.array(sol.x)
    primal = float(c @ x) if phase == "pdOPT" else float("nan")
    dual = float(sol.obj_val_dual) if phase == "pdOPT" else float("nan")
    text = (
        f"phase.value = {phase}\n"
        f"objValPrimal = {primal:.16e}\n"
        f"objValDual = {dual:.16e}\n"
        f"status = {status}\n"
        f"time = {sol.solve_time:.6f}\n"
    )
    with open(args.output, "w") as fh:
        fh.write(text)
    sys.stdout.write(text)


if __name__ == "__main__":
    main()
