"""Fifth Painleve side: parametrized residues, isomonodromy flow in t5,
canonical solutions at the irregular point, Stokes data and tau5.

The linear system is

    dPsi/dlam = ((t5/2) sigma3 + A0/lam + A1/(lam - 1)) Psi

with ``diag(A0 + A1) = -(theta_inf/2) sigma3``.  Canonical solutions
``Psi^k`` are fixed by their asymptotics in the sector
``-3pi/2 + pi k < arg(lam t5) < pi/2 + pi k``.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    AnchorTooClose,
    ConstraintViolation,
    IndeterminateTau,
    NonUnipotentResidual,
    SectorViolation,
    SingularTime,
    StepUnderflow,
)
from .fuchsian import (
    Arc,
    LinearSystem,
    MonodromyPoint,
    Path,
    Segment,
    ThetaTuple,
    loop_around,
    propagate,
    transfer,
    validate,
)
from .linalg import I2, SIGMA3, det, inv, mat, trace

LABELS5 = ("0", "1")
MIN_ANCHOR = 30.0
STOKES_BUDGET = 1e-3


def theta5(theta0, theta1, thetainf):
    return ThetaTuple({"0": complex(theta0), "1": complex(theta1), "inf": complex(thetainf)})


@dataclass(frozen=True)
class P5State:
    t: complex
    u: complex
    z: complex
    y: complex
    thetas: ThetaTuple

    def residue(self, label):
        th0, th1, thi = self.thetas["0"], self.thetas["1"], self.thetas["inf"]
        z, u, y = self.z, self.u, self.y
        if label == "0":
            return mat(z + th0 / 2, -u * (z + th0), z / u, -z - th0 / 2)
        return mat(
            -z - (th0 + thi) / 2,
            u * y * (z + (th0 - th1 + thi) / 2),
            -(z + (th0 + th1 + thi) / 2) / (u * y),
            z + (th0 + thi) / 2,
        )

    def residues(self):
        return {k: self.residue(k) for k in LABELS5}


def random_state5(rng, thetas, t, spread=0.5):
    def c():
        return complex(rng.normal(), rng.normal()) * spread

    while True:
        u, y = 1 + c(), 1 + c()
        if abs(u) > 0.2 and abs(y) > 0.2 and abs(y - 1) > 0.1:
            return P5State(complex(t), u, c(), y, thetas)


def state5_from_residues(t, a0, a1, thetas):
    th0, th1, thi = thetas["0"], thetas["1"], thetas["inf"]
    z = a0[0, 0] - th0 / 2
    u = -a0[0, 1] / (z + th0) if abs(z + th0) >= abs(z) else z / a0[1, 0]
    p = z + (th0 - th1 + thi) / 2
    q = z + (th0 + th1 + thi) / 2
    y = a1[0, 1] / (u * p) if abs(p) >= abs(q) else -q / (u * a1[1, 0])
    return P5State(complex(t), complex(u), complex(z), complex(y), thetas)


def assemble5(state, tol=1e-10):
    if state.u == 0 or state.y == 0:
        raise ConstraintViolation("u5 and y5 must be nonzero")
    a = state.residues()
    th = state.thetas
    diag = abs((a["0"] + a["1"])[0, 0] + th["inf"] / 2)
    if diag > tol * (1 + abs(state.z)):
        raise ConstraintViolation(f"diagonal sum rule violated by {diag:.3e}")
    for k in LABELS5:
        d = abs(det(a[k]) + th[k] ** 2 / 4)
        if d > tol * (1 + abs(state.z)) ** 2:
            raise ConstraintViolation(f"det A{k} differs from -theta^2/4 by {d:.3e}")
    return LinearSystem(((0j, a["0"]), (1 + 0j, a["1"])), poly_part=state.t / 2 * SIGMA3,
                        theta_inf=th["inf"], labels=LABELS5)


def system5(t, a0, a1, theta_inf):
    return LinearSystem(((0j, a0), (1 + 0j, a1)), poly_part=complex(t) / 2 * SIGMA3,
                        theta_inf=complex(theta_inf), labels=LABELS5)


# -- isomonodromy flow ------------------------------------------------------------------


def idm5_rhs(t, a0, a1, theta_inf):
    g = (theta_inf / 2 * SIGMA3 + a0 + a1) / t
    g1 = g + SIGMA3 / 2
    return g @ a0 - a0 @ g, g1 @ a1 - a1 @ g1


def idm5_flow(state, t_target, tol=1e-10, samples=None):
    """Move a state along the isomonodromic flow on the segment to ``t_target``."""
    t0 = complex(state.t)
    targets = [complex(t_target)] if samples is None else [complex(x) for x in samples]
    d = targets[-1] - t0
    if d != 0:
        u = min(1.0, max(0.0, (-t0 * d.conjugate()).real / abs(d) ** 2))
        if abs(t0 + u * d) <= 1e-6:
            raise SingularTime("time path passes too close to t5 = 0")
    elif abs(t0) <= 1e-6:
        raise SingularTime("t5 = 0")
    a = state.residues()
    th = state.thetas
    if d == 0:
        out = [state] * len(targets)
        return out[0] if samples is None else out

    def rhs(s, yv):
        t = t0 + s * d
        b0, b1 = idm5_rhs(t, yv[:4].reshape(2, 2), yv[4:].reshape(2, 2), th["inf"])
        return np.concatenate([b0.reshape(4), b1.reshape(4)]) * d

    y0 = np.concatenate([a["0"].reshape(4), a["1"].reshape(4)])
    s_eval = [((x - t0) / d).real for x in targets]
    sol = solve_ivp(rhs, (0.0, 1.0), y0, method="DOP853", rtol=tol, atol=tol,
                    t_eval=s_eval, first_step=1 / 64)
    if sol.status != 0:
        raise StepUnderflow(sol.message)
    out = [state5_from_residues(x, sol.y[:4, j].reshape(2, 2), sol.y[4:, j].reshape(2, 2), th)
           for j, x in enumerate(targets)]
    return out[0] if samples is None else out


def p5_coefficients(thetas):
    th0, th1, thi = thetas["0"], thetas["1"], thetas["inf"]
    return (
        0.5 * ((th0 - th1 + thi) / 2) ** 2,
        -0.5 * ((th0 - th1 - thi) / 2) ** 2,
        1 - th0 - th1,
        -0.5,
    )


def p5_second_derivative(t, y, dy, thetas):
    al, be, ga, de = p5_coefficients(thetas)
    return (
        (1 / (2 * y) + 1 / (y - 1)) * dy ** 2
        - dy / t
        + ((y - 1) / t) ** 2 * (al * y + be / y)
        + ga * y / t
        + de * y * (y + 1) / (y - 1)
    )


def p5_residual_from_samples(ts, ys, thetas):
    """Residual of the fifth Painleve equation at the middle of five equally spaced samples."""
    h = ts[1] - ts[0]
    d1 = (ys[0] - 8 * ys[1] + 8 * ys[3] - ys[4]) / (12 * h)
    d2 = (-ys[0] + 16 * ys[1] - 30 * ys[2] + 16 * ys[3] - ys[4]) / (12 * h * h)
    return abs(d2 - p5_second_derivative(ts[2], ys[2], d1, thetas))


def p5_residual(state, h=1e-3, tol=1e-12):
    t = state.t
    grid = [t + k * h for k in (-2, -1, 0, 1, 2)]
    ys = [idm5_flow(state, x, tol).y if x != t else state.y for x in grid]
    return p5_residual_from_samples(grid, ys, state.thetas)


# -- tau5 and sigma5 ---------------------------------------------------------------------


def tau5_logderiv_scalar(state):
    th0, th1, thi = state.thetas["0"], state.thetas["1"], state.thetas["inf"]
    t, z, y = state.t, state.z, state.y
    if y == 0 or t == 0:
        raise IndeterminateTau("y5 and t5 must be nonzero")
    return (
        -z - (th0 + thi) / 2
        - (z - (z + (th0 + th1 + thi) / 2) / y) * (z + th0 - y * (z + (th0 - th1 + thi) / 2)) / t
    )


def tau5_logderiv_matrix(state):
    th = state.thetas
    a = state.residues()
    t = state.t
    if t == 0:
        raise IndeterminateTau("t5 must be nonzero")
    return ((th["0"] / 2) ** 2 + (th["1"] / 2) ** 2 - (th["inf"] / 2) ** 2) / t + trace(
        (a["0"] / t + SIGMA3 / 2) @ a["1"])


def tau5_logderiv(state, tol=1e-9):
    s = tau5_logderiv_scalar(state)
    m = tau5_logderiv_matrix(state)
    if abs(s - m) > tol * max(1.0, abs(s)):
        raise IndeterminateTau(f"scalar and matrix forms differ by {abs(s - m):.3e}")
    return s


def sigma5(state):
    th = state.thetas
    return (th["0"] + th["inf"]) / 2 * state.t + state.t * tau5_logderiv(state)


# -- formal solution at the irregular point --------------------------------------------


def irregular_series(t, a0, a1, theta_inf, n_terms):
    """Coefficients ``Y_k`` of ``(sum Y_k lam^-k) exp((lam t/2 - (theta/2) ln lam) sigma3)``."""
    t = complex(t)
    th = complex(theta_inf)
    b1 = a0 + a1

    def bm(m):
        return b1 if m == 1 else a1

    ys = [I2.copy()]
    for k in range(1, n_terms + 1):
        e = (k - 1) * ys[k - 1] + th / 2 * ys[k - 1] @ SIGMA3
        for m in range(1, k + 1):
            e = e + bm(m) @ ys[k - m]
        yk = np.zeros((2, 2), complex)
        yk[0, 1] = -e[0, 1] / t
        yk[1, 0] = e[1, 0] / t
        acc = np.zeros((2, 2), complex)
        for m in range(2, k + 2):
            acc = acc + bm(m) @ ys[k + 1 - m]
        yk[0, 0] = -(b1[0, 1] * yk[1, 0] + acc[0, 0]) / k
        yk[1, 1] = -(b1[1, 0] * yk[0, 1] + acc[1, 1]) / k
        ys.append(yk)
    return ys


def psi1_irregular(state):
    a = state.residues()
    return irregular_series(state.t, a["0"], a["1"], state.thetas["inf"], 1)[1]


def tau5_from_psi1(state):
    return -0.5 * trace(psi1_irregular(state) @ SIGMA3)


def sector_bounds(k):
    return -1.5 * math.pi + math.pi * k, 0.5 * math.pi + math.pi * k


def anchor_angle(k, column):
    """Angle ``arg(lam t5)`` of the ray where a column of ``Psi^k`` is recessive."""
    lo, hi = sector_bounds(k)
    base = math.pi if column == 0 else 0.0
    m = math.ceil((lo - base) / (2 * math.pi))
    phi = base + 2 * math.pi * m
    if not lo < phi < hi:
        phi += 2 * math.pi
    return phi


@dataclass
class IrregularSystem:
    """P5-type linear system with the data needed for sector continuation."""

    t: complex
    a0: np.ndarray
    a1: np.ndarray
    theta_inf: complex
    n_terms: int = 14
    r_circle: float = 2.5
    anchor_radius: float = None
    tol: float = 1e-12
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = complex(self.t)
        if self.anchor_radius is None:
            self.anchor_radius = MIN_ANCHOR / abs(self.t)
        if self.anchor_radius * abs(self.t) < MIN_ANCHOR - 1e-9:
            raise AnchorTooClose(f"|t5| R = {self.anchor_radius * abs(self.t):.3g} < {MIN_ANCHOR:g}")
        self.system = system5(self.t, self.a0, self.a1, self.theta_inf)
        self.coeffs = irregular_series(self.t, self.a0, self.a1, self.theta_inf, self.n_terms)

    @classmethod
    def from_state(cls, state, **kw):
        a = state.residues()
        return cls(state.t, a["0"], a["1"], state.thetas["inf"], **kw)

    def point(self, phi, r):
        """``lam`` with ``|lam| = r`` and ``arg(lam t5) = phi``."""
        return r * cmath.exp(1j * (phi - cmath.phase(self.t)))

    def log_lam(self, phi, r):
        return math.log(r) + 1j * (phi - cmath.phase(self.t))

    def formal(self, phi, r):
        lam = self.point(phi, r)
        s = np.zeros((2, 2), complex)
        w = 1 + 0j
        for c in self.coeffs:
            s = s + c * w
            w /= lam
        ex = lam * self.t / 2 - self.theta_inf / 2 * self.log_lam(phi, r)
        return s @ np.diag([cmath.exp(ex), cmath.exp(-ex)])

    def column(self, k, column, phi, r=None, anchor_offset=0.0, radius=None):
        """Column ``column`` of ``Psi^k`` at the point ``(phi, r)``."""
        lo, hi = sector_bounds(k)
        if not lo < phi < hi:
            raise SectorViolation(f"arg(lam t5) = {phi:.4f} outside sector {k}")
        r = self.r_circle if r is None else r
        big = self.anchor_radius if radius is None else radius
        if big * abs(self.t) < MIN_ANCHOR - 1e-9:
            raise AnchorTooClose(f"|t5| R = {big * abs(self.t):.3g} < {MIN_ANCHOR:g}")
        pa = anchor_angle(k, column) + anchor_offset
        if not lo < pa < hi:
            raise SectorViolation("anchor ray leaves the sector")
        start = np.zeros((2, 2), complex)
        start[:, 0] = self.formal(pa, big)[:, column]
        pieces = [Segment(self.point(pa, big), self.point(pa, self.r_circle))]
        rot = cmath.phase(self.t)
        if phi != pa:
            pieces.append(Arc(0j, self.r_circle, pa - rot, phi - rot))
        if r != self.r_circle:
            pieces.append(Segment(self.point(phi, self.r_circle), self.point(phi, r)))
        return propagate(self.system, Path(tuple(pieces)), start, self.tol)[:, 0]

    def frame(self, k, phi, r=None, **kw):
        return np.column_stack([self.column(k, 0, phi, r, **kw), self.column(k, 1, phi, r, **kw)])


# -- Stokes data -------------------------------------------------------------------------


@dataclass
class StokesData:
    s0: complex
    s1: complex
    theta_inf: complex
    raw: dict = field(default_factory=dict)

    @property
    def S0(self):
        return mat(1, 0, self.s0, 1)

    @property
    def S1(self):
        return mat(1, self.s1, 0, 1)

    def S(self, k):
        """``S_k`` for any integer ``k`` via the shift-by-two relation."""
        m, r = divmod(k, 2)
        base = self.S0 if r == 0 else self.S1
        e = np.diag([cmath.exp(1j * math.pi * self.theta_inf * m),
                     cmath.exp(-1j * math.pi * self.theta_inf * m)])
        return e @ base @ inv(e)

    def formal_exponential(self):
        return np.diag([cmath.exp(1j * math.pi * self.theta_inf),
                        cmath.exp(-1j * math.pi * self.theta_inf)])

    def m_inf(self, k=0):
        return self.S(k) @ self.S(k + 1) @ self.formal_exponential()

    def trace_residual(self):
        th = self.theta_inf
        want = 2 * cmath.cos(math.pi * th) + cmath.exp(-1j * math.pi * th) * self.s0 * self.s1
        return abs(trace(self.m_inf()) - want)

    def to_json(self):
        return {"s0": [self.s0.real, self.s0.imag], "s1": [self.s1.real, self.s1.imag],
                "theta_inf": [complex(self.theta_inf).real, complex(self.theta_inf).imag],
                "raw": {k: float(v) if isinstance(v, float) else v for k, v in self.raw.items()}}


def _unipotent(m, lower, budget):
    off = m[0, 1] if lower else m[1, 0]
    res = max(abs(off), abs(m[0, 0] - 1), abs(m[1, 1] - 1))
    if res > budget:
        raise NonUnipotentResidual(f"Stokes matrix deviates from unipotent form by {res:.3e}")
    return (m[1, 0] if lower else m[0, 1]), res


def stokes_of(isys, budget=STOKES_BUDGET):
    """Stokes multipliers ``s0, s1`` from canonical frames for ``k = 0, 1, 2``."""
    f0 = isys.frame(0, 0.0)
    f1 = isys.frame(1, 0.0)
    s0m = np.linalg.solve(f0, f1)
    g1 = isys.frame(1, math.pi)
    g2 = isys.frame(2, math.pi)
    s1m = np.linalg.solve(g1, g2)
    s0, r0 = _unipotent(s0m, True, budget)
    s1, r1 = _unipotent(s1m, False, budget)
    raw = {"S0_residual": float(r0), "S1_residual": float(r1),
           "anchor_radius": isys.anchor_radius, "r_circle": isys.r_circle,
           "n_terms": isys.n_terms, "tol": isys.tol}
    return StokesData(complex(s0), complex(s1), complex(isys.theta_inf), raw)


def circle_monodromy(isys, k=0, phi=None):
    """``M_{k,inf}`` from clockwise continuation of ``Psi^k`` around a large circle."""
    lo, hi = sector_bounds(k)
    phi = (lo + hi) / 2 if phi is None else phi
    psi = isys.frame(k, phi)
    rot = cmath.phase(isys.t)
    path = Path((Arc(0j, isys.r_circle, phi - rot, phi - rot - 2 * math.pi),))
    return np.linalg.solve(psi, transfer(isys.system, path, isys.tol) @ psi)


# -- monodromy data ------------------------------------------------------------------------

BASE_BELOW = 0.5 - 1.0j
BASE_ABOVE = -0.5 + 1.0j


def _sector_angle(isys, lam, k=0):
    lo, hi = sector_bounds(k)
    phi = cmath.phase(lam) + cmath.phase(isys.t)
    while phi >= hi:
        phi -= 2 * math.pi
    while phi <= lo:
        phi += 2 * math.pi
    return phi


def frame_at(isys, lam, k=0):
    """``Psi^k`` at an arbitrary point of its cut plane."""
    return isys.frame(k, _sector_angle(isys, lam, k), abs(lam))


def loop_monodromies(isys, base, k=0):
    psi = frame_at(isys, base, k)
    out = {}
    for label, pos in (("0", 0j), ("1", 1 + 0j)):
        radius = min(0.3, abs(base - pos) / 2)
        t = transfer(isys.system, loop_around(base, pos, radius), isys.tol)
        out[label] = np.linalg.solve(psi, t @ psi)
    return out


def m5_point(isys, thetas=None, numeric_tilde=True):
    """Monodromy data in both presentations.

    Returns ``(P5 point, P5-tilde point, StokesData)``.  ``M_inf`` comes from
    the Stokes multipliers; ``M_0``, ``M_1`` from loops based below the real
    axis.  The tilde presentation is built from the conversion relations, and
    with ``numeric_tilde`` it is also measured from a base above the axis.
    """
    st = stokes_of(isys)
    loops = loop_monodromies(isys, BASE_BELOW)
    m_inf = st.m_inf()
    if thetas is None:
        thetas = ThetaTuple({
            "0": 2 * cmath.sqrt(-det(isys.a0)),
            "1": 2 * cmath.sqrt(-det(isys.a1)),
            "inf": complex(isys.theta_inf),
        })
    meta = {"s0s1": st.s0 * st.s1, "anchor_radius": isys.anchor_radius, "base": BASE_BELOW,
            "sector": 0, "tol": isys.tol}
    mp = MonodromyPoint({"0": loops["0"], "1": loops["1"], "inf": m_inf}, thetas, "P5", meta=meta)
    mp.residuals = validate(mp)
    m0 = loops["0"]
    tilde = {"0": m0, "1": m0 @ loops["1"] @ inv(m0), "inf": m_inf}
    mt = MonodromyPoint(tilde, thetas, "P5-tilde", meta=dict(meta))
    mt.residuals = validate(mt)
    if numeric_tilde:
        above = loop_monodromies(isys, BASE_ABOVE)
        mt.residuals["conversion"] = float(max(np.max(np.abs(above[k] - tilde[k])) for k in ("0", "1")))
        mt.meta["numeric"] = {"0": above["0"], "1": above["1"]}
    return mp, mt, st
