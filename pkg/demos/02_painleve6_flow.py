"""A Painleve VI trajectory from the Schlesinger flow.

A constrained state of the 2x2 Fuchsian system with poles 0, t, 1, inf is
moved in t.  Along the way the first integrals stay fixed, the monodromy
matrices do not move, and y6 solves the sixth Painleve equation.
"""

import numpy as np

from isolab.fuchsian import monodromy_point_p6
from isolab.painleve6 import (
    assemble,
    first_integrals,
    make_thetas,
    p6_residual,
    schlesinger_flow,
    state_with_sigma,
    y6_of,
)

th = make_thetas(0.31 + 0.1j, 0.47 - 0.2j, 0.23 + 0.15j, 0.62 + 0.05j)
start = state_with_sigma(0.3, th, 0.2 + 0.1j, 0.3 - 0.2j)
grid = [0.3, 0.35, 0.4, 0.45, 0.5]
states = schlesinger_flow(start, grid[-1], 1e-12, samples=grid)

print(f"{'t':>6s} {'y6':>28s} {'P6 residual':>12s} {'first integrals':>16s}")
for s in states:
    fi = max(first_integrals(s).values())
    print(f"{s.t.real:6.3f} {y6_of(s):28.12f} {p6_residual(s):12.2e} {fi:16.2e}")

m_start = monodromy_point_p6(assemble(start), tol=1e-12, thetas=th)
m_end = monodromy_point_p6(assemble(states[-1]), tol=1e-12, thetas=th)
drift = max(np.max(np.abs(m_start[k] - m_end[k])) for k in ("0", "t", "1", "inf"))
print(f"\nmonodromy change between t = 0.3 and t = 0.5: {drift:.2e}")
print(f"cyclic residual M_inf M_1 M_t M_0 - 1: {m_start.residuals['cyclic']:.2e}")
