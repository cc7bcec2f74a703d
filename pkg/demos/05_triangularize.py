"""Simultaneous triangularization of two SL(2, C) matrices.

One conjugation puts M0 in upper and M1 in lower triangular form with
prescribed diagonal entries.  The case depends on which eigenvectors of the
two matrices coincide.
"""

import numpy as np

from isolab.triangularizer import classify, constructed_pair, random_pair, solve, verify

rng = np.random.default_rng(1)
p = random_pair(rng)
sol = solve(p)
k, ki = sol.K, np.linalg.inv(sol.K)
print("K M0 K^-1 =\n", np.array2string(k @ p.M0 @ ki, precision=6, suppress_small=True))
print("K M1 K^-1 =\n", np.array2string(k @ p.M1 @ ki, precision=6, suppress_small=True))
print(f"f0 f1 = {sol.f_product:.8f}, residuals {verify(p, sol)['max']:.1e}")

print("\ncase analysis on constructed pairs:")
for kind in ("commuting", "f1-zero", "f0-zero", "p-zero", "unsolvable"):
    q = constructed_pair(rng, kind)
    case = classify(q)
    detail = "no solution" if case == "unsolvable" else f"residual {verify(q, solve(q, case=case))['max']:.1e}"
    print(f"  built as {kind:<10s} classified as {case:<10s} {detail}")
