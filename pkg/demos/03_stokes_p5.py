"""Stokes data of the fifth Painleve linear system.

The pole at infinity is irregular.  Canonical solutions in neighbouring
sectors differ by unipotent Stokes matrices; their product with the formal
exponential must equal the monodromy around a large circle.
"""

import numpy as np

from isolab.painleve5 import IrregularSystem, circle_monodromy, idm5_flow, random_state5, stokes_of, theta5

th = theta5(0.3 + 0.1j, 0.45 - 0.1j, 0.6 + 0.2j)
state = random_state5(np.random.default_rng(707), th, 1.2)
isys = IrregularSystem.from_state(state)
sd = stokes_of(isys)
print(f"s0 = {sd.s0:.10f}\ns1 = {sd.s1:.10f}")
print(f"deviation of the measured Stokes matrices from unipotent form: "
      f"{sd.raw['S0_residual']:.1e}, {sd.raw['S1_residual']:.1e}")
print(f"S0 S1 exp(pi i theta sigma3) against the circle monodromy: "
      f"{np.max(np.abs(sd.m_inf() - circle_monodromy(isys))):.2e}")

moved = idm5_flow(state, 1.4, 1e-12)
sd2 = stokes_of(IrregularSystem.from_state(moved))
print(f"after the isomonodromic flow to t5 = 1.4 the multipliers moved by "
      f"{max(abs(sd2.s0 - sd.s0), abs(sd2.s1 - sd.s1)):.2e}")
