"""Painleve VI degenerating to Painleve V along a Schlesinger ladder.

Repeated steps L[1, inf](-1, +1) push theta1 to -infinity in integer units
while the monodromy group stays the same up to sign.  Each even level is
evaluated at t6 = eps_n t5; its rescaled data tend to a P5 state as
eps_n -> 0, with error of order eps_n.
"""

import numpy as np

from isolab import limits as L
from isolab.fuchsian import monodromy_point_p6
from isolab.painleve6 import assemble, make_thetas, state_with_sigma
from isolab.schlesinger import build_ladder

base = state_with_sigma(0.05, make_thetas(0.31, 0.47, 0.29, -0.93), 0.3, 0.2 + 0.3j)
m6 = monodromy_point_p6(assemble(base), tol=1e-12, thetas=base.thetas)
mapping = L.limit1_map(m6, thetas=base.thetas)
ladder = build_ladder(base, "first-limit", 16, 1.2, tol=1e-12)
ext = L.extract_p5_from_ladder(ladder, "1a", scale=mapping.d0)
p5 = ext.limit_state
print(f"limiting P5 state at t5 = 1.2: z5 = {p5.z:.8f}, y5 = {p5.y:.8f}")

print(f"\n{'quantity':>14s} {'slope':>7s}   errors at n = 6, 11, 16")
for r in L.convergence_reports(ladder, ext):
    picks = [r.errors[r.ns.index(n)] for n in (6, 11, 16)]
    print(f"{r.quantity:>14s} {r.slope:7.3f}   " + "  ".join(f"{e:.2e}" for e in picks))

print("\npredicted Stokes multipliers from the P6 monodromy:",
      f"s0 = {mapping.stokes.s0:.6f}, s1 = {mapping.stokes.s1:.6f}")
print("cyclic residual of the mapped P5 monodromy:", f"{mapping.point.residuals['cyclic']:.2e}")
