"""Elementary discrete Schlesinger transformations and GSD ladders.

A transformation ``L[nu, nu'](s, s')`` shifts the formal monodromy exponent
at ``nu`` by ``s`` and the one at ``nu'`` by ``s'`` (``s, s' = +-1``) while
keeping every monodromy matrix up to sign.  Only the residues are
transformed; the dressing matrix is never evaluated at a finite point.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DeltaZero, ExistenceViolation, LadderBlocked, NumericalError, SingularMatrix
from .linalg import I2, SIGMA3, SIGMA_MINUS, SIGMA_PLUS, det, inv, mat_to_json
from .painleve6 import (
    LABELS,
    P6State,
    first_integrals,
    flow_residues,
    solve_z,
    state_from_residues,
)

DELTA_MIN = 1e-12
POSITIONS = {"0": 0j, "1": 1 + 0j}


def _pos(state, label):
    return state.t if label == "t" else POSITIONS[label]


@dataclass(frozen=True)
class ElementaryStep:
    nu: str
    nu_prime: str
    signs: tuple = (1, 1)

    def __post_init__(self):
        if self.nu == self.nu_prime:
            raise ValueError("an elementary step needs two distinct singularities")
        if self.nu == "inf":
            raise ValueError("put infinity in the second slot")
        if any(s not in (1, -1) for s in self.signs):
            raise ValueError("signs must be +1 or -1")

    @property
    def shifts(self):
        return {self.nu: self.signs[0], self.nu_prime: self.signs[1]}

    def inverse(self):
        return ElementaryStep(self.nu, self.nu_prime, (-self.signs[0], -self.signs[1]))

    @property
    def name(self):
        sg = "".join("+" if s > 0 else "-" for s in self.signs)
        return f"L{sg}[{self.nu},{self.nu_prime}]"


def eigencolumn(state, label, sign):
    """Column of the diagonalizer for the eigenvalue ``sign * theta / 2``."""
    return state.diagonalizer(label)[:, 0 if sign > 0 else 1]


def ab_pair(state, label, sign):
    """The ``(a, b)`` pair with ``R = [[b+, b-], [-a+, -a-]]``."""
    r = eigencolumn(state, label, sign)
    return -r[1], r[0]


def j_projectors(state, step):
    """``(J[nu, nu'], J[nu', nu], Delta[nu', nu])`` for a finite pair.

    ``J[nu', nu]`` projects onto the shifted eigenvector at ``nu`` along the
    one at ``nu'``; the two projectors add up to the identity.
    """
    s, s2 = step.signs
    a1, b1 = ab_pair(state, step.nu, s)
    a2, b2 = ab_pair(state, step.nu_prime, s2)
    delta = a2 * b1 - a1 * b2
    if abs(delta) <= DELTA_MIN:
        raise DeltaZero(f"Delta = {abs(delta):.3e} for {step.name}")
    j_back = np.array([[b1], [-a1]], dtype=complex) @ np.array([[a2, b2]], dtype=complex) / delta
    return I2 - j_back, j_back, complex(delta)


def psi1_entries(state):
    """Off-diagonal entries of the first coefficient of the expansion at infinity."""
    a = state.residues()
    th = state.thetas["inf"]
    b2 = a["1"] + state.t * a["t"]
    return -b2[1, 0] / (1 + th), b2[0, 1] / (th - 1)


def j_infinity(state, step):
    """Rank-one matrix ``J[nu, inf]`` of the dressing at infinity."""
    s, s_inf = step.signs
    a, b = ab_pair(state, step.nu, s)
    p21, p12 = psi1_entries(state)
    row = np.array([[a, b]], dtype=complex)
    if s_inf > 0:
        if abs(a) <= DELTA_MIN:
            raise ExistenceViolation(f"a = {abs(a):.3e} for {step.name}")
        return np.array([[1], [-p21]], dtype=complex) @ row / a
    if abs(b) <= DELTA_MIN:
        raise ExistenceViolation(f"b = {abs(b):.3e} for {step.name}")
    return np.array([[-p12], [1]], dtype=complex) @ row / b


def _regular_part(residues, positions, label):
    p = positions[label]
    return sum(residues[k] / (p - positions[k]) for k in LABELS if k != label)


def transformed_residues(state, step):
    """Residues after the step, keyed by ``"0"``, ``"1"``, ``"t"``."""
    a = state.residues()
    pos = {k: _pos(state, k) for k in LABELS}
    th_inf = state.thetas["inf"]
    out = {}
    if step.nu_prime != "inf":
        nu, nup = step.nu, step.nu_prime
        j1, j2, _ = j_projectors(state, step)
        for mu in LABELS:
            if mu in (nu, nup):
                continue
            c = (pos[mu] - pos[nup]) / (pos[mu] - pos[nu])
            out[mu] = (j2 + c * j1) @ a[mu] @ (j2 + j1 / c)
        b_nu = _regular_part(a, pos, nu)
        b_nup = _regular_part(a, pos, nup)
        out[nu] = (j1 @ a[nu] @ j1 + j2 @ a[nu] @ j2
                   + (pos[nu] - pos[nup]) * j1 @ b_nu @ j2 - (j1 - j2) / 2)
        out[nup] = (j1 @ a[nup] @ j1 + j2 @ a[nup] @ j2
                    + (pos[nup] - pos[nu]) * j2 @ b_nup @ j1 + (j1 - j2) / 2)
        return out
    nu = step.nu
    s_inf = step.signs[1]
    j = j_infinity(state, step)
    sig = SIGMA_PLUS if s_inf > 0 else SIGMA_MINUS
    for mu in LABELS:
        if mu == nu:
            continue
        g = sig + j / (pos[mu] - pos[nu])
        out[mu] = g @ a[mu] @ inv(g)
    new_inf = th_inf + s_inf
    out[nu] = -new_inf / 2 * SIGMA3 - sum(out[mu] for mu in LABELS if mu != nu)
    return out


def project(state):
    """Restore the three linear constraints by re-solving for ``z`` at fixed ``u``.

    Iterated steps amplify any violation of the sum rule by roughly a factor
    of two per step, so ladders project after every step.
    """
    return P6State(state.t, solve_z(state.t, state.u, state.thetas), state.u, state.thetas,
                   state.s)


def apply_step(state, step, reproject=True):
    """New state with shifted exponents and transformed residues."""
    res = transformed_residues(state, step)
    thetas = state.thetas.shifted(step.shifts)
    new = state_from_residues(state.t, res, thetas, keep=state)
    return project(new) if reproject else new


def monodromy_signs(step):
    """Signs relating new to old monodromy matrices for each label."""
    return {k: (-1 if k in (step.nu, step.nu_prime) else 1) for k in LABELS + ("inf",)}


def dressed_coefficient(state, step, lam):
    """Coefficient ``L A L^-1 + L' L^-1`` of the dressed system at ``lam``.

    Independent of the closed-form residues above: it is what a residue
    computed by contour integration must reproduce.
    """
    a = state.residues()
    pos = {k: _pos(state, k) for k in LABELS}
    coef = sum(a[k] / (lam - pos[k]) for k in LABELS)
    if step.nu_prime != "inf":
        j1, j2, _ = j_projectors(state, step)
        p, q = pos[step.nu], pos[step.nu_prime]
        f2 = (lam - q) / (lam - p)
        el = np.sqrt(f2) * j1 + j2 / np.sqrt(f2)
        dlog = 0.5 * (1 / (lam - q) - 1 / (lam - p))
        d_el = dlog * (np.sqrt(f2) * j1 - j2 / np.sqrt(f2))
    else:
        j = j_infinity(state, step)
        sig = SIGMA_PLUS if step.signs[1] > 0 else SIGMA_MINUS
        g = np.sqrt(lam - pos[step.nu])
        el = g * sig + j / g
        d_el = (sig - j / g ** 2) / (2 * g)
    el_inv = np.linalg.inv(el)
    return el @ coef @ el_inv + d_el @ el_inv


# -- ladders -------------------------------------------------------------------------

PATTERNS = {
    "first-limit": ElementaryStep("1", "inf", (-1, 1)),
    "second-limit": ElementaryStep("0", "t", (1, -1)),
}
LADDER_THETA = {"first-limit": "1", "second-limit": "t"}


def epsilon_n(theta6, n):
    """Discrete small parameter with ``theta6 - 2 n = -1 / eps_n``."""
    return 1 / (2 * n - theta6)


def evaluation_index(level):
    """``n`` used for the evaluation time of a ladder level (levels 2n, 2n+1)."""
    return max(1, level // 2)


@dataclass
class LadderLevel:
    level: int
    shift: dict
    t6: complex
    state: P6State
    epsilon: complex
    diagnostics: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "level": self.level,
            "theta_shift": self.shift,
            "thetas": self.state.thetas.to_json(),
            "t6": [self.t6.real, self.t6.imag],
            "epsilon": [complex(self.epsilon).real, complex(self.epsilon).imag],
            "residues": {k: mat_to_json(self.state.residue(k)) for k in LABELS},
            "diagnostics": self.diagnostics,
        }


@dataclass
class GsdLadder:
    base: P6State
    pattern: str
    t5: complex
    levels: list

    @property
    def step(self):
        return PATTERNS[self.pattern]

    @property
    def theta6(self):
        return self.base.thetas[LADDER_THETA[self.pattern]]

    def even(self):
        return [lv for lv in self.levels if lv.level % 2 == 0 and lv.level > 0]

    def dumps(self):
        return json.dumps({"pattern": self.pattern, "t5": [self.t5.real, self.t5.imag],
                           "base_t6": [self.base.t.real, self.base.t.imag],
                           "levels": [lv.to_json() for lv in self.levels]}, indent=1)


def apply_steps(state, step, count, base_thetas=None, start_shift=None):
    """Apply ``step`` repeatedly; exponents come from integer offsets of the base."""
    base_thetas = base_thetas or state.thetas
    shift = dict(start_shift or {})
    for _ in range(count):
        state = apply_step(state, step)
        for k, v in step.shifts.items():
            shift[k] = shift.get(k, 0) + v
        state = P6State(state.t, state.z, state.u, base_thetas.shifted(shift), state.s)
    return state, shift


def build_ladder(base, pattern, n_max, t5, tol=1e-10):
    """Levels ``0 .. 2 n_max``; level ``k >= 1`` sits at ``eps_n t5`` with
    ``n = max(1, k // 2)`` and is obtained by flowing the base state there and
    applying ``k`` elementary steps."""
    step = PATTERNS[pattern]
    t5 = complex(t5)
    theta6 = base.thetas[LADDER_THETA[pattern]]
    levels = [LadderLevel(0, {}, base.t, base, epsilon_n(theta6, 0))]
    if n_max <= 0:
        return GsdLadder(base, pattern, t5, levels)
    ns = list(range(1, n_max + 1))
    times = [epsilon_n(theta6, n) * t5 for n in ns]
    # the evaluation times lie on one ray through the origin: flow to the
    # outermost one, then inwards through the rest
    order = sorted(range(len(ns)), key=lambda j: -abs(times[j]))
    a = base.residues()
    (a0, a1), = flow_residues(base.t, a["0"], a["1"], base.thetas["inf"], [times[order[0]]], tol)
    flowed = flow_residues(times[order[0]], a0, a1, base.thetas["inf"],
                           [times[j] for j in order], tol)
    at_time = {}
    for j, (a0, a1) in zip(order, flowed):
        at = -base.thetas["inf"] / 2 * SIGMA3 - a0 - a1
        at_time[ns[j]] = state_from_residues(times[j], {"0": a0, "1": a1, "t": at},
                                             base.thetas, keep=base)
    for n in ns:
        state, shift = at_time[n], {}
        done = 0
        wanted = ([1] if n == 1 else []) + [2 * n] + ([2 * n + 1] if n < n_max else [])
        for level in wanted:
            try:
                state, shift = apply_steps(state, step, level - done, base.thetas, shift)
            except (NumericalError, ZeroDivisionError) as exc:
                raise LadderBlocked(level, str(exc)) from exc
            done = level
            diag = {"first_integral_max": float(max(first_integrals(state).values()))}
            levels.append(LadderLevel(level, dict(shift), state.t, state,
                                      epsilon_n(theta6, n), diag))
    levels.sort(key=lambda lv: lv.level)
    return GsdLadder(base, pattern, t5, levels)
