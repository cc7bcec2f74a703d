"""Hypergeometric system: closed-form local monodromy against a numerical loop.

Y(x) is built from 2F1 at |x| > 1.  Its monodromy around 0 and 1 follows from
Gamma-function connection matrices; here the same matrices are measured by
integrating the system once around each pole.
"""

import numpy as np

from isolab.fuchsian import LinearSystem, loop_monodromy
from isolab.special import HyperParams, y_bundle, y_matrix

p = HyperParams(0.31 + 0.12j, -0.27 + 0.2j, 0.64 - 0.1j)
b = y_bundle(p)
print("exponents: theta0 =", p.theta0, " theta1 =", p.theta1, " theta_inf =", p.theta_inf)

sys = LinearSystem(((0j, b.A0), (1 + 0j, b.A1)), theta_inf=p.theta_inf, labels=("0", "1"))
for nu, base in (("0", -0.6 + 0.9j), ("1", 1.5 + 0.2j)):
    closed = b.local_monodromy(int(nu))
    loop = loop_monodromy(sys, y_matrix(p, base), base, nu, tol=1e-13)
    print(f"\nM{nu} from the connection matrices:\n{np.array2string(closed, precision=8)}")
    print(f"max entry difference to the numerical loop: {np.max(np.abs(closed - loop)):.2e}")
    print(f"det C{nu}: closed form {b.det_C(int(nu)):.10f}, numerical "
          f"{np.linalg.det(b.C0 if nu == '0' else b.C1):.10f}")
