#!/usr/bin/env python3
"""Bracket the steering robustness of a real qubit assemblage by linear programming.

Usage: lhs_lp_oracle.py ASSEMBLAGE.json [N]

For real symmetric 2x2 assemblages the hidden states can be taken real, and
positivity of [[t+z, x], [x, t-z]] is the disc t >= |(x, z)|. Replacing each
disc by an inscribed / circumscribed N-gon and solving

    1 + SR = min sum_l tr(rho_l)
             s.t. sum_l D(a|x,l) rho_l - sigma_{a|x} >= 0,  rho_l >= 0

over the deterministic strategies gives an upper / lower bound on SR.
Prints {"lower": ..., "upper": ...}.
"""
import itertools
import json
import sys

import numpy as np
from scipy.optimize import linprog


def load(path):
    doc = json.load(open(path))
    sigma = np.array(doc["sigma"], dtype=float)
    if np.abs(sigma[..., 1]).max() > 1e-12 or doc["dim"] != 2:
        raise SystemExit("only real qubit assemblages are supported")
    return sigma[..., 0]


def bound(sigma, n, inner):
    m, k = sigma.shape[:2]
    strategies = list(itertools.product(range(k), repeat=m))
    L = len(strategies)
    # variables: (t, x, z) per strategy
    angles = 2 * np.pi * np.arange(n) / n
    shrink = np.cos(np.pi / n) if inner else 1.0
    rows, rhs = [], []

    def disc(coeffs_t, coeffs_x, coeffs_z, const_t, const_x, const_z):
        # x cos + z sin <= shrink * t, with affine (t, x, z)
        for th in angles:
            c, s = np.cos(th), np.sin(th)
            row = c * coeffs_x + s * coeffs_z - shrink * coeffs_t
            rows.append(row)
            rhs.append(-(c * const_x + s * const_z - shrink * const_t))

    zero = np.zeros(3 * L)
    for l in range(L):
        et, ex, ez = zero.copy(), zero.copy(), zero.copy()
        et[3 * l], ex[3 * l + 1], ez[3 * l + 2] = 1, 1, 1
        disc(et, ex, ez, 0.0, 0.0, 0.0)
    for x in range(m):
        for a in range(k):
            et, ex, ez = zero.copy(), zero.copy(), zero.copy()
            for l, lam in enumerate(strategies):
                if lam[x] == a:
                    et[3 * l], ex[3 * l + 1], ez[3 * l + 2] = 1, 1, 1
            s = sigma[x, a]
            st, sx, sz = (s[0, 0] + s[1, 1]) / 2, s[0, 1], (s[0, 0] - s[1, 1]) / 2
            disc(et, ex, ez, -st, -sx, -sz)
    cost = np.zeros(3 * L)
    cost[0::3] = 2.0
    res = linprog(cost, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=[(None, None)] * (3 * L), method="highs")
    if res.status != 0:
        raise SystemExit(f"LP failed: {res.message}")
    return res.fun - 1.0


def main(argv):
    if not argv:
        print(__doc__, file=sys.stderr)
        return 2
    sigma = load(argv[0])
    n = int(argv[1]) if len(argv) > 1 else 4096
    lower = bound(sigma, n, inner=False)
    upper = bound(sigma, n, inner=True)
    print(json.dumps({"lower": max(lower, 0.0), "upper": max(upper, 0.0)}))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
