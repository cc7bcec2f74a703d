"""Sixth Painleve side: parametrized residues, Schlesinger flow, y6, tau6.

State coordinates follow the Jimbo-Miwa chart: for each finite pole
``nu in {0, 1, t}``

    A_nu = [[z + theta/2, -u z], [(z + theta)/u, -z - theta/2]]

subject to three linear constraints that make the residues sum to
``-(theta_inf/2) sigma3``.
"""

import cmath
import csv
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    ConstraintViolation,
    GridTooCoarse,
    IndeterminateY,
    ReflectionSingular,
    SingularTime,
    StepUnderflow,
)
from .fuchsian import LinearSystem, ThetaTuple, theta6
from .linalg import SIGMA1, SIGMA3, c_to_csv, det, inv, mat, trace

LABELS = ("0", "1", "t")


@dataclass(frozen=True)
class P6State:
    t: complex
    z: dict
    u: dict
    thetas: ThetaTuple
    s: dict = field(default_factory=lambda: {"0": 1 + 0j, "1": 1 + 0j, "t": 1 + 0j})

    def position(self, label):
        return {"0": 0j, "1": 1 + 0j, "t": complex(self.t)}[label]

    def residue(self, label):
        th = self.thetas[label]
        z, u = self.z[label], self.u[label]
        return mat(z + th / 2, -u * z, (z + th) / u, -z - th / 2)

    def residues(self):
        return {k: self.residue(k) for k in LABELS}

    def diagonalizer(self, label):
        th = self.thetas[label]
        z, u, s = self.z[label], self.u[label], self.s[label]
        return mat(1 / (th * s), u * z * s, 1 / (th * u * s), (z + th) * s)


def constraint_residuals(state):
    th = state.thetas
    zsum = sum(state.z[k] for k in LABELS)
    total = sum(th[k] for k in LABELS) + th["inf"]
    return {
        "z_sum": abs(zsum + total / 2),
        "uz_sum": abs(sum(state.u[k] * state.z[k] for k in LABELS)),
        "zu_sum": abs(sum((state.z[k] + th[k]) / state.u[k] for k in LABELS)),
    }


def first_integrals(state):
    """Deviations of the five first integrals from their theta values."""
    a = state.residues()
    th = state.thetas
    out = {f"tr_{k}": abs(trace(a[k])) for k in LABELS}
    for k in LABELS:
        out[f"det_{k}"] = abs(det(a[k]) + th[k] ** 2 / 4)
    out["det_inf"] = abs(det(th["inf"] / 2 * SIGMA3 + a["0"] + a["1"]) + th["t"] ** 2 / 4)
    return out


def solve_z(t, u, thetas):
    """The three constraints are linear in ``z`` once ``u`` is fixed."""
    th = thetas
    m = np.array([[1, 1, 1], [u["0"], u["1"], u["t"]], [1 / u["0"], 1 / u["1"], 1 / u["t"]]],
                 dtype=complex)
    total = sum(th[k] for k in LABELS) + th["inf"]
    rhs = np.array([-total / 2, 0, -sum(th[k] / u[k] for k in LABELS)], dtype=complex)
    z = np.linalg.solve(m, rhs)
    return dict(zip(LABELS, (complex(v) for v in z)))


def random_state(rng, thetas, t, spread=1.0):
    """Constrained state with ``u`` drawn from a complex Gaussian around 1."""
    while True:
        u = {k: complex(1 + spread * rng.normal(), spread * rng.normal()) for k in LABELS}
        if min(abs(v) for v in u.values()) < 0.2:
            continue
        z = solve_z(t, u, thetas)
        st = P6State(complex(t), z, u, thetas)
        if min(abs(v) for v in z.values()) > 1e-3:
            return st


def assemble(state, tol=1e-9):
    """Linear system with poles at 0, 1, t and the state's residues."""
    for name, v in constraint_residuals(state).items():
        scale = 1 + max(abs(x) for x in state.z.values())
        if v > tol * scale:
            raise ConstraintViolation(f"{name} relation violated by {v:.3e}")
    for k in LABELS:
        if state.u[k] == 0 or state.s[k] == 0:
            raise ConstraintViolation(f"u or s vanishes at {k}")
    poles = tuple((state.position(k), state.residue(k)) for k in LABELS)
    return LinearSystem(poles, theta_inf=state.thetas["inf"], labels=LABELS)


def state_from_residues(t, residues, thetas, s=None, keep=None):
    """Read ``(z, u)`` back from residue matrices."""
    z, u = {}, {}
    for k in LABELS:
        a = residues[k]
        th = thetas[k]
        zk = a[0, 0] - th / 2
        if abs(zk) > abs(zk + th) * 1e-3 and abs(a[0, 1]) > 0:
            uk = -a[0, 1] / zk
        else:
            uk = (zk + th) / a[1, 0]
        z[k], u[k] = complex(zk), complex(uk)
    if s is None:
        s = keep.s if keep is not None else {k: 1 + 0j for k in LABELS}
    return P6State(complex(t), z, u, thetas, dict(s))


# -- Schlesinger flow ------------------------------------------------------------


def schlesinger_rhs(t, a0, a1, theta_inf):
    at = -theta_inf / 2 * SIGMA3 - a0 - a1
    return (at @ a0 - a0 @ at) / t, (at @ a1 - a1 @ at) / (t - 1)


def _check_time_path(t0, t1, margin=1e-6):
    d = t1 - t0
    for p in (0.0, 1.0):
        if d == 0:
            dist = abs(t0 - p)
        else:
            u = min(1.0, max(0.0, ((p - t0) * d.conjugate()).real / abs(d) ** 2))
            dist = abs(t0 + u * d - p)
        if dist <= margin:
            raise SingularTime(f"time path passes within {margin:g} of {p}")


def flow_residues(t0, a0, a1, theta_inf, t_targets, tol=1e-10):
    """Integrate the Schlesinger system along the straight segment from ``t0``
    through the ordered ``t_targets`` (which must lie on one ray from ``t0``)."""
    t0 = complex(t0)
    t_targets = [complex(x) for x in t_targets]
    t_end = t_targets[-1]
    _check_time_path(t0, t_end)
    d = t_end - t0
    if d == 0:
        return [(a0.copy(), a1.copy()) for _ in t_targets]
    s_eval = [((x - t0) / d).real for x in t_targets]

    def rhs(s, y):
        t = t0 + s * d
        b0, b1 = schlesinger_rhs(t, y[:4].reshape(2, 2), y[4:].reshape(2, 2), theta_inf)
        return np.concatenate([b0.reshape(4), b1.reshape(4)]) * d

    y0 = np.concatenate([a0.reshape(4), a1.reshape(4)]).astype(complex)
    sol = solve_ivp(rhs, (0.0, 1.0), y0, method="DOP853", rtol=tol, atol=tol,
                    t_eval=s_eval, first_step=1 / 64)
    if sol.status != 0:
        raise StepUnderflow(sol.message)
    return [(sol.y[:4, j].reshape(2, 2), sol.y[4:, j].reshape(2, 2)) for j in range(len(s_eval))]


def schlesinger_flow(state, t_target, tol=1e-10, samples=None):
    """Move a state along the isomonodromic flow to ``t_target``.

    With ``samples`` (times on the segment, increasing distance from the start)
    a list of states at those times is returned instead.
    """
    targets = [complex(t_target)] if samples is None else list(samples)
    a = state.residues()
    out = []
    for t, (a0, a1) in zip(targets, flow_residues(state.t, a["0"], a["1"], state.thetas["inf"],
                                                  targets, tol)):
        at = -state.thetas["inf"] / 2 * SIGMA3 - a0 - a1
        out.append(state_from_residues(t, {"0": a0, "1": a1, "t": at}, state.thetas, keep=state))
    return out[0] if samples is None else out


# -- y6, tau6, sigma6 ---------------------------------------------------------------


def y6_forms(state):
    t = state.t
    w = {k: state.u[k] * state.z[k] for k in LABELS}
    den1 = (t + 1) * w["0"] + t * w["1"] + w["t"]
    if abs(w["0"]) < 1e-300 or abs(den1) < 1e-12:
        raise IndeterminateY("vanishing denominator in y6")
    f1 = t * w["0"] / den1
    d2 = 1 + (1 - 1 / t) * w["1"] / w["0"]
    d3 = 1 + (1 - t) * w["t"] / w["0"]
    if abs(d2) < 1e-12 or abs(d3) < 1e-12:
        raise IndeterminateY("vanishing denominator in y6")
    return f1, 1 / d2, t / d3


def y6_of(state, tol=1e-9):
    forms = y6_forms(state)
    scale = max(1.0, abs(forms[0]))
    spread = max(abs(forms[0] - forms[1]), abs(forms[0] - forms[2]))
    if spread > tol * scale:
        raise IndeterminateY(f"the three expressions for y6 disagree by {spread:.3e}")
    return forms[0]


def p6_coefficients(thetas):
    return (
        (thetas["inf"] - 1) ** 2 / 2,
        -thetas["0"] ** 2 / 2,
        thetas["1"] ** 2 / 2,
        (1 - thetas["t"] ** 2) / 2,
    )


def p6_second_derivative(t, y, dy, thetas):
    al, be, ga, de = p6_coefficients(thetas)
    return (
        0.5 * (1 / y + 1 / (y - 1) + 1 / (y - t)) * dy ** 2
        - (1 / t + 1 / (t - 1) + 1 / (y - t)) * dy
        + y * (y - 1) * (y - t) / (t ** 2 * (t - 1) ** 2)
        * (al + be * t / y ** 2 + ga * (t - 1) / (y - 1) ** 2 + de * t * (t - 1) / (y - t) ** 2)
    )


def five_point(values, h):
    """First and second derivatives at the centre of five equally spaced samples."""
    f = values
    d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
    return d1, d2


def p6_residual(state, h=1e-3, tol=1e-12):
    """Finite-difference residual of the sixth Painleve equation at ``state.t``."""
    t = state.t
    grid = [t + k * h for k in (-2, -1, 0, 1, 2)]
    ys = []
    for tt in grid:
        ys.append(y6_of(schlesinger_flow(state, tt, tol)) if tt != t else y6_of(state))
    d1, d2 = five_point(ys, h)
    return abs(d2 - p6_second_derivative(t, ys[2], d1, state.thetas))


def tau6_logderiv(state):
    a = state.residues()
    t = state.t
    return trace((a["0"] / t + a["1"] / (t - 1)) @ a["t"])


def sigma6(state):
    return state.t * (state.t - 1) * tau6_logderiv(state)


def sigma6_prime(state):
    at = state.residue("t")
    return -trace(state.thetas["inf"] / 2 * SIGMA3 @ at) - trace(at @ at)


@dataclass
class TauSamples:
    t: list
    logderiv: list
    sigma: list
    sigma_prime: list
    sigma_prime_fd: list


def tau6_sigma6(states, tol=1e-7):
    """log-derivative of tau6, sigma6 and two estimates of d sigma6 / dt.

    ``states`` is a trajectory on an equally spaced grid.  The formula value
    of the derivative is compared with a finite-difference estimate on the
    interior points; ``GridTooCoarse`` signals disagreement above ``tol``.
    """
    ts = [s.t for s in states]
    ld = [tau6_logderiv(s) for s in states]
    sg = [t * (t - 1) * v for t, v in zip(ts, ld)]
    sp = [sigma6_prime(s) for s in states]
    fd = [None] * len(states)
    if len(states) >= 5:
        h = ts[1] - ts[0]
        for j in range(2, len(states) - 2):
            fd[j] = (sg[j - 2] - 8 * sg[j - 1] + 8 * sg[j + 1] - sg[j + 2]) / (12 * h)
            if abs(fd[j] - sp[j]) > tol * max(1.0, abs(sp[j])):
                raise GridTooCoarse(f"sigma6' mismatch {abs(fd[j] - sp[j]):.3e} at t = {ts[j]}")
    return TauSamples(ts, ld, sg, sp, fd)


# -- reflection at infinity -----------------------------------------------------------


def reflect_infinity(state, signs=(-1, -1, -1)):
    """Conjugate all residues by sigma1 and flip ``theta_inf``.

    ``signs`` chooses the new exponent ``theta~ = sign * theta`` at 0, 1, t.
    """
    th = state.thetas
    new_th = {"inf": -th["inf"]}
    z, u = {}, {}
    for k, sg in zip(LABELS, signs):
        t_old, t_new = th[k], sg * th[k]
        new_th[k] = t_new
        den = state.z[k] + (t_new + t_old) / 2
        if abs(den) < 1e-12:
            raise ReflectionSingular(f"z + (theta~ + theta)/2 vanishes at {k}")
        z[k] = -den
        u[k] = (state.z[k] + t_old) / (state.u[k] * den)
    return P6State(state.t, z, u, ThetaTuple(new_th), dict(state.s))


def reflect_residues(residues):
    return {k: SIGMA1 @ a @ SIGMA1 for k, a in residues.items()}


# -- trajectory dumps -------------------------------------------------------------------


TRAJECTORY_COLUMNS = (
    ["t_re", "t_im"]
    + [f"{q}{k}_{p}" for k in LABELS for q in ("z", "u") for p in ("re", "im")]
    + ["y6", "sigma6", "first_integral_max"]
)


def trajectory_csv(states):
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(TRAJECTORY_COLUMNS)
    for s in states:
        row = [repr(complex(s.t).real), repr(complex(s.t).imag)]
        for k in LABELS:
            for v in (s.z[k], s.u[k]):
                row += [repr(complex(v).real), repr(complex(v).imag)]
        try:
            y = c_to_csv(y6_of(s))
        except IndeterminateY:
            y = ""
        row += [y, c_to_csv(sigma6(s)), f"{max(first_integrals(s).values()):.3e}"]
        w.writerow(row)
    return buf.getvalue()


def make_thetas(theta0, theta1, thetat, thetainf):
    return theta6(theta0, theta1, thetat, thetainf)


def with_time(state, t):
    return replace(state, t=complex(t))


# -- special constructions --------------------------------------------------------------


def state_with_sigma(t, thetas, sigma, x, u1=1.0):
    """Constrained state with ``A_0 + A_t`` having eigenvalues ``+-sigma/2``.

    Equivalently ``A_1 + (theta_inf/2) sigma3`` has exponents ``+-sigma/2``.
    As ``t -> 0`` this gives ``tr(M_0 M_t) -> 2 cos(pi sigma)``; at finite
    ``t`` the trace differs.  ``x`` sets ``z_0`` and ``u1`` the scale at 1.
    Small ``|Im sigma|`` gives well conditioned monodromy matrices.
    """
    th = thetas
    a = (th["1"] + th["inf"]) / 2
    z1 = (sigma ** 2 / 4 - a ** 2) / th["inf"]
    s = -(sum(th[k] for k in LABELS) + th["inf"]) / 2 - z1
    c = -u1 * z1
    d = -(z1 + th["1"]) / u1
    qa = d * x
    qb = -(x + th["0"]) * x + (s - x + th["t"]) * (s - x) - d * c
    qc = (x + th["0"]) * c
    if abs(qa) < 1e-14 or abs(s - x) < 1e-14:
        raise ConstraintViolation("degenerate seed for the sigma construction")
    v = (-qb + cmath.sqrt(qb * qb - 4 * qa * qc)) / (2 * qa)
    z = {"0": complex(x), "1": complex(z1), "t": complex(s - x)}
    u = {"0": complex(v), "1": complex(u1), "t": complex((c - v * x) / (s - x))}
    return P6State(complex(t), z, u, th)


def invert_positions(state):
    """The state after ``lam -> t / lam``.

    Poles 0 and infinity trade places, as do 1 and t.  The residues are
    conjugated by the diagonalizer of ``A_0`` so that infinity stays
    normalized; the new exponents are
    ``(theta_inf, theta_t, theta_1, theta_0)`` at ``(0, 1, t, inf)``.
    """
    th = state.thetas
    a = state.residues()
    r = state.diagonalizer("0")
    ri = inv(r)
    new_th = ThetaTuple({"0": th["inf"], "1": th["t"], "t": th["1"], "inf": th["0"]})
    res = {"0": ri @ (th["inf"] / 2 * SIGMA3) @ r, "1": ri @ a["t"] @ r, "t": ri @ a["1"] @ r}
    return state_from_residues(state.t, res, new_th)
