"""Linear 2x2 systems in the spectral variable and their monodromy.

A :class:`LinearSystem` is ``dPsi/dlam = (P + sum_k A_k / (lam - a_k)) Psi``
with a constant polynomial part ``P``.  Transfer matrices along piecewise
straight/circular paths are computed with an adaptive embedded Runge-Kutta
integrator; monodromy matrices follow from loops based at a common point and a
frame normalized at infinity.
"""

import cmath
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import CyclicViolation, PoleProximity, ResonantExponent, StepUnderflow
from .linalg import I2, SIGMA3, det, eig2, inv, mat_to_json, c_to_json, trace

DEFAULT_TOL = 1e-10
INTEGRATOR = "DOP853"


@dataclass(frozen=True)
class ThetaTuple:
    """Formal monodromy exponents keyed by singularity label."""

    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def replace(self, changes):
        v = dict(self.values)
        v.update({k: complex(x) for k, x in changes.items()})
        return ThetaTuple(v)

    def shifted(self, shifts):
        """Add integer offsets to selected exponents."""
        return self.replace({k: self.values[k] + n for k, n in shifts.items()})

    def to_json(self):
        return {k: c_to_json(v) for k, v in self.values.items()}


def theta6(theta0, theta1, thetat, thetainf):
    return ThetaTuple({"0": complex(theta0), "1": complex(theta1), "t": complex(thetat),
                       "inf": complex(thetainf)})


def dist_to_int(z):
    z = complex(z)
    return abs(z - round(z.real))


@dataclass(frozen=True)
class LinearSystem:
    poles: tuple  # ((position, residue), ...)
    poly_part: np.ndarray = field(default_factory=lambda: np.zeros((2, 2), complex))
    theta_inf: complex = 0j
    labels: tuple = ()

    def coefficient(self, lam):
        a = self.poly_part.copy()
        for pos, res in self.poles:
            a = a + res / (lam - pos)
        return a

    @property
    def positions(self):
        return [complex(p) for p, _ in self.poles]

    def residue(self, label):
        return self.poles[self.labels.index(label)][1]

    def position(self, label):
        return complex(self.poles[self.labels.index(label)][0])

    @property
    def scale(self):
        return max([1.0] + [abs(p) for p in self.positions])

    def check(self, tol=1e-10):
        """Residues traceless; for a regular point at infinity the residue sum
        equals ``-(theta_inf/2) sigma3``."""
        out = {"trace": max((abs(trace(r)) for _, r in self.poles), default=0.0)}
        s = sum((r for _, r in self.poles), np.zeros((2, 2), complex))
        if not np.any(self.poly_part):
            out["sum"] = float(np.max(np.abs(s + self.theta_inf / 2 * SIGMA3)))
        else:
            out["sum_diag"] = float(abs(s[0, 0] + self.theta_inf / 2))
        return out


# -- paths -----------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    start: complex
    end: complex

    def point(self, s):
        return self.start + s * (self.end - self.start)

    def velocity(self, s):
        return self.end - self.start

    @property
    def length(self):
        return abs(self.end - self.start)

    def distance_to(self, p):
        d = self.end - self.start
        if d == 0:
            return abs(p - self.start)
        u = ((p - self.start) * d.conjugate()).real / abs(d) ** 2
        u = min(1.0, max(0.0, u))
        return abs(self.point(u) - p)


@dataclass(frozen=True)
class Arc:
    center: complex
    radius: float
    angle0: float
    angle1: float  # positive sweep is counterclockwise

    def point(self, s):
        return self.center + self.radius * cmath.exp(1j * (self.angle0 + s * (self.angle1 - self.angle0)))

    def velocity(self, s):
        w = self.angle1 - self.angle0
        return 1j * w * self.radius * cmath.exp(1j * (self.angle0 + s * w))

    @property
    def start(self):
        return self.point(0.0)

    @property
    def end(self):
        return self.point(1.0)

    @property
    def length(self):
        return abs(self.angle1 - self.angle0) * self.radius

    def distance_to(self, p):
        # sample densely; arcs are only used at moderate sweep
        n = max(16, int(abs(self.angle1 - self.angle0) * 32))
        return min(abs(self.point(k / n) - p) for k in range(n + 1))


@dataclass(frozen=True)
class Path:
    pieces: tuple

    @property
    def start(self):
        return self.pieces[0].start

    @property
    def end(self):
        return self.pieces[-1].end

    def __add__(self, other):
        return Path(tuple(self.pieces) + tuple(other.pieces))

    def reversed(self):
        out = []
        for p in reversed(self.pieces):
            if isinstance(p, Segment):
                out.append(Segment(p.end, p.start))
            else:
                out.append(Arc(p.center, p.radius, p.angle1, p.angle0))
        return Path(tuple(out))

    @property
    def is_closed(self):
        return abs(self.start - self.end) <= 1e-12 * max(1.0, abs(self.start))


def segment(a, b):
    return Path((Segment(complex(a), complex(b)),))


def polyline(*points):
    pts = [complex(p) for p in points]
    return Path(tuple(Segment(a, b) for a, b in zip(pts[:-1], pts[1:])))


def loop_around(base, center, radius):
    """Spoke from ``base`` to the circle, one counterclockwise turn, spoke back."""
    base, center = complex(base), complex(center)
    phi = cmath.phase(base - center)
    entry = center + radius * cmath.exp(1j * phi)
    return Path((Segment(base, entry), Arc(center, radius, phi, phi + 2 * math.pi),
                 Segment(entry, base)))


def check_path(sys, path, min_dist=None):
    if min_dist is None:
        min_dist = 1e-3 * sys.scale
    for piece in path.pieces:
        for p in sys.positions:
            if piece.distance_to(p) <= min_dist:
                raise PoleProximity(f"path passes within {min_dist:g} of the pole {p}")


def _rhs_factory(sys, piece):
    poles = [(complex(p), r.astype(complex)) for p, r in sys.poles]
    poly = sys.poly_part.astype(complex)
    has_poly = bool(np.any(poly))

    def rhs(s, y):
        lam = piece.point(s)
        a = poly.copy() if has_poly else np.zeros((2, 2), complex)
        for p, r in poles:
            a += r / (lam - p)
        a *= piece.velocity(s)
        y = y.reshape(2, 2)
        return (a @ y).reshape(4)

    return rhs


def transfer(sys, path, tol=DEFAULT_TOL, method=None, check=True):
    """Transfer matrix ``T`` with ``Psi(end) = T Psi(start)`` along ``path``."""
    if check:
        check_path(sys, path)
    t = I2.copy()
    for piece in path.pieces:
        if piece.length == 0:
            continue
        sol = solve_ivp(
            _rhs_factory(sys, piece), (0.0, 1.0), I2.reshape(4), method=method or INTEGRATOR,
            rtol=tol, atol=tol, first_step=1.0 / 64,
        )
        if sol.status != 0:
            raise StepUnderflow(sol.message)
        t = sol.y[:, -1].reshape(2, 2) @ t
    return t


def propagate(sys, path, frame, tol=DEFAULT_TOL, check=True):
    """Continue a solution ``frame`` (2x2, columns may be zero) given at ``path.start``.

    Unlike ``transfer(...) @ frame`` this integrates the columns themselves, so
    the error control follows the size of the solution actually carried.
    """
    if check:
        check_path(sys, path)
    y = np.asarray(frame, dtype=complex).reshape(4)
    for piece in path.pieces:
        if piece.length == 0:
            continue
        sol = solve_ivp(_rhs_factory(sys, piece), (0.0, 1.0), y, method=INTEGRATOR,
                        rtol=tol, atol=tol * 1e-6 * max(1e-300, float(np.max(np.abs(y)))),
                        first_step=1.0 / 64)
        if sol.status != 0:
            raise StepUnderflow(sol.message)
        y = sol.y[:, -1]
    return y.reshape(2, 2)


# -- local analysis -------------------------------------------------------------


def infinity_series(sys, n_terms=40):
    """Coefficients ``Psi_k`` of ``Psi = (sum_k Psi_k lam^-k) lam^{-(theta/2) sigma3}``.

    Only for systems with a regular point at infinity (no polynomial part).
    """
    theta = complex(sys.theta_inf)
    b = [None]
    for m in range(1, n_terms + 2):
        acc = np.zeros((2, 2), complex)
        for p, r in sys.poles:
            acc = acc + complex(p) ** (m - 1) * r
        b.append(acc)
    coeffs = [I2.copy()]
    for k in range(1, n_terms + 1):
        rhs = np.zeros((2, 2), complex)
        for m in range(2, k + 2):
            rhs = rhs + b[m] @ coeffs[k + 1 - m]
        c = np.empty((2, 2), complex)
        c[0, 0] = -rhs[0, 0] / k
        c[1, 1] = -rhs[1, 1] / k
        c[0, 1] = rhs[0, 1] / (theta - k)
        c[1, 0] = -rhs[1, 0] / (theta + k)
        coeffs.append(c)
    return coeffs


def infinity_frame(sys, lam, n_terms=None):
    """Normalized solution ``(I + O(1/lam)) lam^{-(theta_inf/2) sigma3}`` at ``lam``."""
    lam = complex(lam)
    ratio = sys.scale / abs(lam)
    if n_terms is None:
        n_terms = max(2, min(80, int(math.ceil(-17 / math.log10(ratio))) + 2)) if ratio < 1 else 80
    coeffs = infinity_series(sys, n_terms)
    s = np.zeros((2, 2), complex)
    w = 1 + 0j
    for c in coeffs:
        s = s + c * w
        w /= lam
    e = cmath.exp(-complex(sys.theta_inf) / 2 * cmath.log(lam))
    return s @ np.array([[e, 0], [0, 1 / e]])


def psi1_infinity(sys):
    """First correction ``Psi_1`` of the normalized expansion at infinity."""
    return infinity_series(sys, 1)[1]


def diagonalizer(residue, theta):
    """Unit-determinant ``R`` with ``R^{-1} residue R = (theta/2) sigma3``."""
    ep = eig2(residue, first=complex(theta) / 2, det_normalize=True)
    return ep.vectors


def local_series(sys, label, frame0=None, theta=None, n_terms=30):
    """Series ``Psi = frame0 (I + sum g_k w^k) w^{(theta/2) sigma3}``, ``w = lam - a``.

    Returns ``(frame0, theta, [g_0, g_1, ...])``.
    """
    a = sys.position(label)
    res = sys.residue(label)
    if theta is None:
        theta = 2 * cmath.sqrt(-det(res))
    if dist_to_int(theta) <= 1e-6:
        raise ResonantExponent(f"exponent {theta} at {label} is too close to an integer")
    if frame0 is None:
        frame0 = diagonalizer(res, theta)
    fi = inv(frame0)
    lam_diag = (theta / 2, -theta / 2)
    others = [(complex(p), fi @ r @ frame0) for p, r in sys.poles if complex(p) != a]
    poly = fi @ sys.poly_part @ frame0
    abar = []
    for m in range(n_terms):
        acc = poly.copy() if m == 0 else np.zeros((2, 2), complex)
        for p, r in others:
            acc = acc - r / (p - a) ** (m + 1)
        abar.append(acc)
    g = [I2.copy()]
    for k in range(1, n_terms + 1):
        rhs = np.zeros((2, 2), complex)
        for m in range(0, k):
            rhs = rhs + abar[m] @ g[k - 1 - m]
        c = np.empty((2, 2), complex)
        for i in range(2):
            for j in range(2):
                c[i, j] = rhs[i, j] / (k + lam_diag[j] - lam_diag[i])
        g.append(c)
    return frame0, theta, g


def local_frame(sys, label, radius=None):
    """Frame ``Psi_0`` at a regular pole and its exponent ``theta``.

    ``Psi ~ Psi_0 (I + O(lam - a)) (lam - a)^{(theta/2) sigma3}``.
    """
    frame0, theta, _ = local_series(sys, label, n_terms=1)
    return frame0, theta


def local_solution(sys, label, lam, frame0=None, theta=None, n_terms=40):
    a = sys.position(label)
    frame0, theta, g = local_series(sys, label, frame0, theta, n_terms)
    w = complex(lam) - a
    s = np.zeros((2, 2), complex)
    p = 1 + 0j
    for c in g:
        s = s + c * p
        p *= w
    e = cmath.exp(theta / 2 * cmath.log(w))
    return frame0 @ s @ np.array([[e, 0], [0, 1 / e]])


# -- monodromy -------------------------------------------------------------------


@dataclass
class MonodromyPoint:
    matrices: dict
    thetas: ThetaTuple
    kind: str
    residuals: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.matrices[key]

    def to_json(self):
        return {
            "kind": self.kind,
            "matrices": {k: mat_to_json(v) for k, v in self.matrices.items()},
            "thetas": self.thetas.to_json(),
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "meta": _jsonable(self.meta),
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=2)


def _jsonable(x):
    if isinstance(x, complex):
        return c_to_json(x)
    if isinstance(x, np.ndarray):
        return mat_to_json(x) if x.shape == (2, 2) else [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


CYCLIC_ORDER = {
    "P6": ("inf", "1", "t", "0"),
    "P5": ("0", "1", "inf"),
    "P5-tilde": ("inf", "1", "0"),
}


def validate(mp, tol=None):
    """Determinant, cyclic-product and trace residuals of a monodromy point."""
    res = {}
    res["det"] = max(abs(det(m) - 1) for m in mp.matrices.values())
    order = CYCLIC_ORDER.get(mp.kind)
    if order and all(k in mp.matrices for k in order):
        prod = I2.copy()
        for k in order:
            prod = prod @ mp.matrices[k]
        res["cyclic"] = float(np.max(np.abs(prod - I2)))
    irregular = mp.kind in ("P5", "P5-tilde")
    tr = 0.0
    for k, m in mp.matrices.items():
        if k in mp.thetas.values and not (irregular and k == "inf"):
            tr = max(tr, abs(trace(m) - 2 * cmath.cos(math.pi * mp.thetas[k])))
    if irregular and "s0s1" in mp.meta:
        th = mp.thetas["inf"]
        want = 2 * cmath.cos(math.pi * th) + cmath.exp(-1j * math.pi * th) * mp.meta["s0s1"]
        tr = max(tr, abs(trace(mp.matrices["inf"]) - want))
    res["trace"] = tr
    res = {k: float(v) for k, v in res.items()}
    if tol is not None:
        res["pass"] = all(v <= tol for v in res.values())
    return res


def loop_radius(sys, base):
    pos = sys.positions
    gaps = [abs(p - q) for i, p in enumerate(pos) for q in pos[i + 1:]]
    r = min(gaps) / 3 if gaps else 0.5
    return min(r, min(abs(base - p) for p in pos) / 2)


def default_base_p6(t):
    t = complex(t)
    return (t + 1) / 2 + 1j * max(1.0, abs(t) + 1)


def anchor_point(sys, radius_factor=1e3):
    return radius_factor * sys.scale * cmath.exp(1j * (math.pi / 2 - 0.1))


def normalized_frame_at(sys, base, tol=DEFAULT_TOL, radius_factor=1e3):
    """The solution normalized at infinity, continued to ``base`` from the far anchor."""
    anchor = anchor_point(sys, radius_factor)
    frame = infinity_frame(sys, anchor)
    return transfer(sys, segment(anchor, base), tol) @ frame


def loop_monodromy(sys, frame, base, label, tol=DEFAULT_TOL, radius=None):
    """Monodromy ``M`` with ``Psi -> Psi M`` along a counterclockwise loop."""
    if radius is None:
        radius = loop_radius(sys, base)
    t = transfer(sys, loop_around(base, sys.position(label), radius), tol)
    return np.linalg.solve(frame, t @ frame)


def monodromy_fuchsian(sys, base, tol=DEFAULT_TOL, kind="P6", radius_factor=1e3):
    """Loop monodromies of every finite pole plus ``exp(pi i theta_inf sigma3)``."""
    base = complex(base)
    frame = normalized_frame_at(sys, base, tol, radius_factor)
    radius = loop_radius(sys, base)
    mats = {}
    for label in sys.labels:
        mats[label] = loop_monodromy(sys, frame, base, label, tol, radius)
    mats["inf"] = np.diag([cmath.exp(1j * math.pi * sys.theta_inf),
                           cmath.exp(-1j * math.pi * sys.theta_inf)])
    thetas = {}
    for label in sys.labels:
        thetas[label] = 2 * cmath.sqrt(-det(sys.residue(label)))
    thetas["inf"] = complex(sys.theta_inf)
    meta = {"base": base, "loop_radius": radius, "tol": tol,
            "anchor": anchor_point(sys, radius_factor)}
    return MonodromyPoint(mats, ThetaTuple(thetas), kind, meta=meta), frame


def monodromy_point_p6(sys, base=None, tol=DEFAULT_TOL, thetas=None, cyclic_tol=1e-5):
    """Monodromy data of a P6-type system with poles labelled ``0``, ``1``, ``t``."""
    if base is None:
        base = default_base_p6(sys.position("t"))
    mp, _ = monodromy_fuchsian(sys, base, tol, "P6")
    if thetas is not None:
        mp.thetas = thetas
    mp.residuals = validate(mp)
    if mp.residuals["cyclic"] > cyclic_tol:
        raise CyclicViolation(f"cyclic residual {mp.residuals['cyclic']:.3e}")
    return mp


def connection_matrix(sys, label, base, frame, tol=DEFAULT_TOL, frame0=None, theta=None):
    """``C`` with ``Psi = Psi_local C`` where ``Psi_local`` is the local series at the pole.

    The global solution is carried from ``base`` to a point near the pole along
    the straight spoke used by the monodromy loops.
    """
    a = sys.position(label)
    radius = loop_radius(sys, base)
    near = a + radius * (base - a) / abs(base - a)
    psi = transfer(sys, segment(base, near), tol) @ frame
    loc = local_solution(sys, label, near, frame0, theta)
    return np.linalg.solve(loc, psi)
