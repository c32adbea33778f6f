#!/usr/bin/env python3
"""Solve a merge subproblem LP file with scipy's MILP solver (HiGHS).

Usage: milp_scipy.py MODEL.lp SOLUTION.txt

Reads the subset of CPLEX LP written by rtssos (single-line constraints,
`w >= k` bound, Binary and General sections) and writes `name value` lines.
"""

import re
import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

TERM = re.compile(r"([+-])?\s*(\d+(?:\.\d*)?)?\s*([A-Za-z_][A-Za-z0-9_]*)")


def parse_expr(text):
    terms = []
    for sign, coef, name in TERM.findall(text):
        c = float(coef) if coef else 1.0
        terms.append((name, -c if sign == "-" else c))
    return terms


def parse(path):
    section = None
    objective, rows, lower, integers = [], [], {}, set()
    names = []

    def var(name):
        if name not in names:
            names.append(name)
        return names.index(name)

    for raw in open(path):
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        low = line.lower()
        if low in ("minimize", "subject to", "bounds", "binary", "binaries", "general", "generals", "end"):
            section = low
            continue
        if section == "minimize":
            objective += parse_expr(line.split(":", 1)[-1])
        elif section == "subject to":
            body = line.split(":", 1)[-1]
            m = re.match(r"(.*?)(<=|>=|=)\s*(-?\d+(?:\.\d*)?)\s*$", body)
            lhs, sense, rhs = m.group(1), m.group(2), float(m.group(3))
            rows.append(([(var(n), c) for n, c in parse_expr(lhs)], sense, rhs))
        elif section == "bounds":
            m = re.match(r"([A-Za-z_][A-Za-z0-9_]*)\s*>=\s*(-?\d+(?:\.\d*)?)", line)
            lower[var(m.group(1))] = float(m.group(2))
        elif section in ("binary", "binaries"):
            for n in line.split():
                integers.add(var(n))
                lower.setdefault(var(n), 0.0)
                lower[("ub", var(n))] = 1.0
        elif section in ("general", "generals"):
            for n in line.split():
                integers.add(var(n))
    for n, _ in objective:
        var(n)
    return names, objective, rows, lower, integers


def main():
    model, out = sys.argv[1], sys.argv[2]
    names, objective, rows, lower, integers = parse(model)
    k = len(names)
    c = np.zeros(k)
    for n, v in objective:
        c[names.index(n)] += v
    lb = np.zeros(k)
    ub = np.full(k, np.inf)
    for key, v in lower.items():
        if isinstance(key, tuple):
            ub[key[1]] = v
        else:
            lb[key] = v
    cons = []
    if rows:
        a = np.zeros((len(rows), k))
        lo = np.full(len(rows), -np.inf)
        hi = np.full(len(rows), np.inf)
        for r, (terms, sense, rhs) in enumerate(rows):
            for j, v in terms:
                a[r, j] += v
            if sense in ("<=", "="):
                hi[r] = rhs
            if sense in (">=", "="):
                lo[r] = rhs
        cons.append(LinearConstraint(a, lo, hi))
    integrality = np.array([1 if j in integers else 0 for j in range(k)])
    res = milp(c, constraints=cons, integrality=integrality, bounds=Bounds(lb, ub))
    if res.x is None:
        sys.stderr.write(f"milp failed: {res.message}\n")
        sys.exit(1)
    with open(out, "w") as fh:
        for n, v in zip(names, res.x):
            fh.write(f"{n} {round(v)}\n")


if __name__ == "__main__":
    main()
