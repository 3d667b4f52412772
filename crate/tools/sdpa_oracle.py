#!/usr/bin/env python3
"""Solve SDPA sparse files with cvxpy (Clarabel, then SCS) and print one JSON line each.

Usage: sdpa_oracle.py FILE [FILE ...]

Each line is {"file": ..., "solver": ..., "status": ..., "objective": c.x}. The reader is
independent of the Rust parser: it only understands the plain layout
(comment lines starting with '*' or '"', then mDIM, nBLOCK, block sizes,
costs and `matno blk i j value` entries).
"""
import json
import re
import sys

import cvxpy as cp
import numpy as np
import scipy.sparse as sp


def read_sdpa(path):
    tokens = []
    header = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line[0] in '*"':
                continue
            parts = [t for t in re.split(r"[\s{}(),=]+", line) if t]
            if len(header) < 2:
                header.append(parts[0])
            else:
                tokens.extend(parts)
    m, nblock = int(header[0]), int(header[1])
    sizes = [int(t) for t in tokens[:nblock]]
    costs = np.array([float(t) for t in tokens[nblock:nblock + m]])
    rest = tokens[nblock + m:]
    entries = [
        (int(rest[i]), int(rest[i + 1]) - 1, int(rest[i + 2]) - 1, int(rest[i + 3]) - 1, float(rest[i + 4]))
        for i in range(0, len(rest), 5)
    ]
    return m, sizes, costs, entries


def build(path):
    m, sizes, costs, entries = read_sdpa(path)
    x = cp.Variable(m)
    per_block = [dict(rows=[], cols=[], vals=[], const={}) for _ in sizes]
    for matno, blk, i, j, v in entries:
        n = abs(sizes[blk])
        b = per_block[blk]
        cells = {(i, j), (j, i)}
        for (r, s) in cells:
            if matno == 0:
                b["const"][r * n + s] = b["const"].get(r * n + s, 0.0) + v
            else:
                b["rows"].append(r * n + s)
                b["cols"].append(matno - 1)
                b["vals"].append(v)
    constraints = []
    for size, b in zip(sizes, per_block):
        n = abs(size)
        coef = sp.csr_matrix((b["vals"], (b["rows"], b["cols"])), shape=(n * n, m))
        f0 = np.zeros(n * n)
        for k, v in b["const"].items():
            f0[k] = v
        flat = coef @ x - f0
        if size > 0:
            mat = cp.reshape(flat, (n, n), order="C")
            constraints.append(0.5 * (mat + mat.T) >> 0)
        else:
            diag = [r * n + r for r in range(n)]
            constraints.append(flat[diag] >= 0)
    return cp.Problem(cp.Minimize(costs @ x), constraints)


ATTEMPTS = (
    ("CLARABEL", {"tol_gap_abs": 1e-10, "tol_gap_rel": 1e-10, "tol_feas": 1e-10}),
    ("CLARABEL", {}),
    ("SCS", {"eps": 1e-9, "max_iters": 500000}),
)


def solve(path):
    # Tightest first. Each attempt gets a fresh problem so no solver state
    # carries over.
    for solver, settings in ATTEMPTS:
        problem = build(path)
        problem.solve(solver=solver, **settings)
        if problem.status == "optimal":
            break
    return {"file": path, "solver": solver, "status": problem.status, "objective": float(problem.value)}


def main(paths):
    if not paths:
        print(__doc__, file=sys.stderr)
        return 2
    for p in paths:
        print(json.dumps(solve(p)), flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
