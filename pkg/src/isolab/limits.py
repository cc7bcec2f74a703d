"""Degenerations of the sixth Painleve system into the fifth.

Three presentations of the cluster limit are supported:

* ``1a``: poles ``0`` and ``t`` merge, ``theta_1 = -1/eps`` (ladder ``L-+[1,inf]``);
* ``1b``: the ``1a`` data seen through the reflection at infinity;
* ``2``: the cluster is seen from infinity, ``theta_t = -1/eps``
  (ladder ``L+-[0,t]``), and the ``u`` variables carry an undetermined
  global scale.

Predictors map a P5 state and ``eps`` to leading-order P6 quantities;
``observe`` reads the same quantities off a ladder level.  The monodromy
maps send a P6 monodromy point to the monodromy data of the limiting P5
system.
"""

import cmath
import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConditionViolation,
    DenominatorCollapse,
    IndeterminateTau,
    IndeterminateY,
    MismatchBeyondTolerance,
    NoConvergence,
    PoleOfGamma,
    ThetaZero,
)
from .fuchsian import MonodromyPoint, ThetaTuple, validate
from .linalg import I2, SIGMA3, c_to_json, exp_sigma3, inv, mat, mat_to_json, trace
from .painleve5 import P5State, StokesData, state5_from_residues, tau5_logderiv, theta5
from .painleve6 import LABELS, invert_positions, reflect_infinity, tau6_logderiv, y6_forms
from .special import gamma_c
from .triangularizer import PairProblem, classify, solve

LIMITS = ("1a", "1b", "2")
DEN_MIN = 1e-10
PI = math.pi


def _den(value, what):
    if abs(value) < DEN_MIN:
        raise DenominatorCollapse(f"{what} = {abs(value):.3e} is too close to zero")
    return value


def _pq(p5):
    """``q = z - (z + (th0+th1+thi)/2)/y`` and ``r = z + th0 - y (z + (th0-th1+thi)/2)``."""
    th0, th1, thi = p5.thetas["0"], p5.thetas["1"], p5.thetas["inf"]
    z, y = p5.z, _den(p5.y, "y5")
    q = z - (z + (th0 + th1 + thi) / 2) / y
    r = z + th0 - y * (z + (th0 - th1 + thi) / 2)
    return q, r


# -- theta bookkeeping -------------------------------------------------------------------


def thetas6_limit1a(thetas5, eps):
    th1 = -1 / eps
    return ThetaTuple({"0": thetas5["0"], "1": th1, "t": -thetas5["1"],
                       "inf": thetas5["inf"] - th1})


def thetas6_limit1b(thetas5, eps):
    th1 = -1 / eps
    return ThetaTuple({"0": thetas5["0"], "1": th1, "t": -thetas5["1"],
                       "inf": th1 - thetas5["inf"]})


def thetas6_limit2(thetas5, eps):
    tht = -1 / eps
    return ThetaTuple({"0": thetas5["inf"] - tht, "1": thetas5["1"], "t": tht,
                       "inf": thetas5["0"]})


def thetas5_of(thetas6, limit):
    """P5 exponents carried by a P6 exponent tuple in the given presentation."""
    th = thetas6
    if limit == "1a":
        return theta5(th["0"], -th["t"], th["1"] + th["inf"])
    if limit == "1b":
        return theta5(th["0"], -th["t"], th["1"] - th["inf"])
    if limit == "2":
        return theta5(th["inf"], th["1"], th["t"] + th["0"])
    raise ValueError(f"unknown limit {limit!r}")


# -- predictors ----------------------------------------------------------------------------


@dataclass
class Prediction:
    limit: str
    eps: float
    thetas: ThetaTuple
    values: dict
    notes: dict = field(default_factory=dict)

    def to_json(self):
        return {"limit": self.limit, "eps": self.eps, "thetas": self.thetas.to_json(),
                "values": {k: c_to_json(v) for k, v in self.values.items()},
                "notes": {k: c_to_json(v) if isinstance(v, complex) else v
                          for k, v in self.notes.items()}}


def tau6_shift_limit1(thetas5, t5):
    """Constant separating ``d/dt5 log tau6`` from ``d/dt5 log tau5`` in limit I."""
    th0, th1, thi = thetas5["0"], thetas5["1"], thetas5["inf"]
    return ((thi / 2) ** 2 - (th0 / 2) ** 2 - (th1 / 2) ** 2) / t5


def predict_limit1a(p5, eps):
    """Leading-order P6 data of the ``1a`` presentation.

    ``y6/eps`` is the value implied by the ``z`` and ``u`` asymptotics; the
    closed form in which the correction enters with ``1 + y5(...)`` and the
    pole at ``z5 = -theta_inf`` does not follow from them and is kept under
    ``notes["y6_alt/eps"]`` for comparison only.
    """
    th0, th1, thi = p5.thetas["0"], p5.thetas["1"], p5.thetas["inf"]
    z, y, u, t5 = p5.z, p5.y, p5.u, p5.t
    q, r = _pq(p5)
    _den(q, "z5 - (z5 + (th0+th1+thi)/2)/y5")
    _den(z, "z5")
    zt = -z - (th0 - th1 + thi) / 2
    den_y6 = _den(1 - y * (z + (th0 - th1 + thi) / 2) / _den(z + th0, "z5 + th0"),
                  "y6 denominator")
    values = {
        "z0": z,
        "zt": zt,
        "z1/eps": -q * r,
        "ut/u0": y * z / (z + th0),
        "eps*u1/u0": z / ((z + th0) * q),
        "u0*s^2/eps^2": u * (z + th0) / z,
        "ut*s^2/eps^2": y * u,
        "u1*s^2/eps": u / q,
        "y6/eps": t5 / den_y6,
        "dlogtau6/dt5": tau6_shift_limit1(p5.thetas, t5) + tau5_logderiv(p5),
    }
    notes = {}
    alt = 1 + y * (1 - (th0 + th1 - thi) / (2 * (z + thi))) if abs(z + thi) > DEN_MIN else 0
    if abs(alt) > DEN_MIN:
        notes["y6_alt/eps"] = complex(t5 / alt)
    return Prediction("1a", eps, thetas6_limit1a(p5.thetas, eps),
                      {k: complex(v) for k, v in values.items()}, notes)


def predict_limit1b(p5, eps):
    """Leading-order P6 data of the ``1b`` presentation (reflected ``1a``).

    As in ``1a`` the ``y6`` value is the one implied by the ``z`` and ``u``
    asymptotics; the variant with ``1 + (1/y5)(...)`` in the denominator is
    kept under ``notes``.
    """
    th0, th1, thi = p5.thetas["0"], p5.thetas["1"], p5.thetas["inf"]
    z, y, u, t5 = p5.z, p5.y, p5.u, p5.t
    q, r = _pq(p5)
    _den(q, "z5 - (z5 + (th0+th1+thi)/2)/y5")
    _den(z, "z5")
    corr = (1 + (th0 + th1 + thi) / (2 * z)) / y
    values = {
        "z0": -z - th0,
        "zt": z + (th0 + th1 + thi) / 2,
        "(z1-1/eps)/eps": q * r,
        "u1/ut/eps": y * q,
        "u1/u0/eps": (z + th0) / z * q,
        "u1*s^2/eps": -u / q,
        "y6/eps": t5 / _den(1 - corr, "y6 denominator"),
    }
    notes = {}
    if abs(1 + corr) > DEN_MIN:
        notes["y6_alt/eps"] = complex(t5 / (1 + corr))
    return Prediction("1b", eps, thetas6_limit1b(p5.thetas, eps),
                      {k: complex(v) for k, v in values.items()}, notes)


def predict_limit2(p5, eps):
    """Leading-order P6 data of the second presentation.

    Only quantities free of the global ``u`` scale are predicted.  ``y6``
    enters as ``1/(1 - (y5-1)/t5 (...))``; the variant with ``1 + ...`` is
    kept under ``notes``.
    """
    th0, th1, thi = p5.thetas["0"], p5.thetas["1"], p5.thetas["inf"]
    if abs(th0) < DEN_MIN:
        raise ThetaZero("theta_0 of the P5 system must be nonzero")
    z, y, t5 = p5.z, p5.y, p5.t
    _den(y, "y5")
    _den(1 - y, "1 - y5")
    _den(z, "z5")
    w = (1 / y - 1) * (z + (th0 + th1 + thi) / 2)
    num = th1 + w
    den = _den(th1 + w * (1 + th0 / (z * (1 - y))), "u16 denominator")
    corr = (y - 1) / t5 * (z + (th0 - th1 + thi) / 2 - (z + (th0 + th1 + thi) / 2) / y)
    a1 = p5.residue("1")
    values = {
        "eps*zt": -z / th0,
        "eps*z0": z / th0,
        "z1+theta1": (z * (1 - y) / th0 + 1) * (th1 + (1 - y) / y * (z + (th0 + th1 + thi) / 2)),
        "u0/ut": 1,
        "u1/ut": num / den,
        "y6": 1 / _den(1 - corr, "y6 denominator"),
        "t6*dsigmahat6/dt6+t5/(2eps)": -(t5 / 2) * (thi + trace(a1 @ SIGMA3)),
        "dlogtau6/dt5 regular": tau5_logderiv(p5),
    }
    notes = {}
    if abs(1 + corr) > DEN_MIN:
        notes["y6_alt"] = complex(1 / (1 + corr))
    return Prediction("2", eps, thetas6_limit2(p5.thetas, eps),
                      {k: complex(v) for k, v in values.items()}, notes)


PREDICTORS = {"1a": predict_limit1a, "1b": predict_limit1b, "2": predict_limit2}


def predict(limit, p5, eps):
    return PREDICTORS[limit](p5, eps)


# -- observations on ladder levels -------------------------------------------------------


def _y6_first(state):
    return y6_forms(state)[0]


def observe(state, limit, eps, t5, s=None):
    """The predicted quantities measured on a P6 state at ``t6 = eps t5``.

    ``s`` is the gauge scale ``s16`` of the ``1a`` presentation; the
    ``u*s^2`` products are only reported when it is given.  The ``1b``
    gauge has a different, undetermined normalisation, so its ``u*s^2``
    product is predicted but never observed.
    """
    z, u = state.z, state.u
    out = {}
    if limit == "1a":
        out["z0"] = z["0"]
        out["zt"] = z["t"]
        out["z1/eps"] = z["1"] / eps
        out["ut/u0"] = u["t"] / u["0"]
        out["eps*u1/u0"] = eps * u["1"] / u["0"]
        if s is not None:
            out["u0*s^2/eps^2"] = u["0"] * s * s / eps ** 2
            out["ut*s^2/eps^2"] = u["t"] * s * s / eps ** 2
            out["u1*s^2/eps"] = u["1"] * s * s / eps
        out["dlogtau6/dt5"] = eps * tau6_logderiv(state)
    elif limit == "1b":
        out["z0"] = z["0"]
        out["zt"] = z["t"]
        out["(z1-1/eps)/eps"] = (z["1"] - 1 / eps) / eps
        out["u1/ut/eps"] = u["1"] / u["t"] / eps
        out["u1/u0/eps"] = u["1"] / u["0"] / eps
    elif limit == "2":
        th = state.thetas
        at = state.residue("t")
        out["eps*zt"] = eps * z["t"]
        out["eps*z0"] = eps * z["0"]
        out["z1+theta1"] = z["1"] + th["1"]
        out["u0/ut"] = u["0"] / u["t"]
        out["u1/ut"] = u["1"] / u["t"]
        dsh = -trace(th["inf"] / 2 * SIGMA3 @ at) - trace(at @ at)
        out["t6*dsigmahat6/dt6+t5/(2eps)"] = state.t * dsh + t5 / (2 * eps)
        thi5 = th["t"] + th["0"]
        out["dlogtau6/dt5 regular"] = (eps * tau6_logderiv(state) + 1 / (2 * eps ** 2 * t5)
                                       + thi5 / (2 * eps * t5))
    else:
        raise ValueError(f"unknown limit {limit!r}")
    try:
        y6 = _y6_first(state)
        out["y6/eps" if limit != "2" else "y6"] = y6 / eps if limit != "2" else y6
    except IndeterminateY:
        pass
    return {k: complex(v) for k, v in out.items()}


# -- extraction of the limiting P5 state ----------------------------------------------------

PATTERN_OF = {"1a": "first-limit", "1b": "first-limit", "2": "second-limit"}


def level_view(state, limit):
    """The ladder state in the requested presentation (``1b`` reflects ``1a``)."""
    return reflect_infinity(state, (1, 1, 1)) if limit == "1b" else state


def s16_scale(eps, t5, theta_inf5, scale):
    """Gauge scale at the merging pole: ``eps * scale * (eps t5)^(theta_inf5/2)``."""
    return eps * scale * (eps * t5) ** (theta_inf5 / 2)


def level_p5(state, limit, t5, eps, scale=None):
    """P5 state read off one ladder level by conjugating with the cluster gauge.

    In limit I ``u5`` is rescaled by ``s16^2 (eps t5)^-...`` so that it is
    comparable across levels when ``scale = f0 d0`` is given; in limit II it
    is returned raw.
    """
    th = state.thetas
    a = state.residues()
    if limit in ("1a", "1b"):
        th5 = thetas5_of(th, "1a")
        r = state.diagonalizer("1")
        ri = inv(r)
        p = state5_from_residues(t5, ri @ a["0"] @ r, ri @ a["t"] @ r, th5)
        if scale is not None:
            s = s16_scale(eps, t5, th5["inf"], scale)
            p = P5State(p.t, p.u * s * s, p.z, p.y, p.thetas)
        return p
    th5 = thetas5_of(th, "2")
    r = state.diagonalizer("t")
    ri = inv(r)
    return state5_from_residues(t5, ri @ (th["inf"] / 2 * SIGMA3) @ r, ri @ a["1"] @ r, th5)


@dataclass
class Extraction:
    limit: str
    t5: complex
    ns: list
    eps: np.ndarray
    states: list
    limit_state: P5State
    scale: complex = None
    fit: dict = field(default_factory=dict)

    def series(self, name):
        return np.array([getattr(p, name) for p in self.states])

    def to_json(self):
        ls = self.limit_state
        return {"limit": self.limit, "t5": c_to_json(complex(self.t5)), "n": self.ns,
                "eps": [float(e) for e in self.eps],
                "z5": [c_to_json(p.z) for p in self.states],
                "y5": [c_to_json(p.y) for p in self.states],
                "u5": [c_to_json(p.u) for p in self.states],
                "limit_state": {"z5": c_to_json(ls.z), "y5": c_to_json(ls.y),
                                "u5": c_to_json(ls.u), "thetas": ls.thetas.to_json()},
                "fit": self.fit}


def extrapolate(eps, values, degree=3):
    """Value at ``eps = 0`` of the least-squares polynomial of the given degree."""
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=complex)
    degree = min(degree, len(eps) - 1)
    return complex(np.polyfit(eps, values, degree)[-1])


def extract_p5_from_ladder(ladder, limit, scale=None, n_min=6, degree=4, n_max=None):
    """Per-level P5 estimates of the even levels and their ``eps -> 0`` limit.

    The limit is the constant term of a degree-``degree`` polynomial fit in
    ``eps`` over the levels ``n_min <= n <= n_max``.
    """
    if limit not in LIMITS:
        raise ValueError(f"unknown limit {limit!r}")
    if ladder.pattern != PATTERN_OF[limit]:
        raise ValueError(f"limit {limit} needs a {PATTERN_OF[limit]} ladder")
    t5 = complex(ladder.t5)
    ns, eps, states = [], [], []
    for lv in ladder.even():
        n = lv.level // 2
        if n_max is not None and n > n_max:
            continue
        e = float(complex(lv.epsilon).real)
        ns.append(n)
        eps.append(e)
        states.append(level_p5(lv.state, limit, t5, e, scale))
    eps = np.array(eps)
    sel = [j for j, n in enumerate(ns) if n >= n_min]
    if len(sel) < degree + 1:
        raise NoConvergence(f"need at least {degree + 1} levels with n >= {n_min}")
    fitted = {}
    for name in ("z", "y", "u"):
        fitted[name] = extrapolate(eps[sel], [getattr(states[j], name) for j in sel], degree)
    limit_state = P5State(t5, fitted["u"], fitted["z"], fitted["y"], states[-1].thetas)
    fit = {"n_min": n_min, "n_max": ns[sel[-1]], "degree": degree}
    return Extraction(limit, t5, ns, eps, states, limit_state, scale, fit)


# -- convergence reports -------------------------------------------------------------------


@dataclass
class ConvergenceReport:
    quantity: str
    ns: list
    eps: list
    errors: list
    slope: float
    threshold: float = 0.5

    @property
    def passed(self):
        return bool(np.isfinite(self.slope) and self.slope >= self.threshold)

    def to_json(self):
        return {"quantity": self.quantity, "n": self.ns, "eps": self.eps,
                "errors": self.errors, "slope": self.slope, "pass": self.passed}


def fit_slope(eps, errors):
    """Least-squares slope of ``log error`` against ``log eps``."""
    if len(eps) < 4:
        raise NoConvergence("the slope fit needs at least four levels")
    x = np.log(np.asarray(eps, dtype=float))
    y = np.log(np.maximum(np.asarray(errors, dtype=float), 1e-300))
    return float(np.polyfit(x, y, 1)[0])


def convergence_reports(ladder, extraction, n_range=(6, 16), threshold=0.5, quantities=None):
    """Observed-minus-predicted errors per quantity along the even levels."""
    limit = extraction.limit
    t5 = complex(ladder.t5)
    p5 = extraction.limit_state
    th5 = p5.thetas
    rows = {}
    used_n, used_eps = [], []
    for lv in ladder.even():
        n = lv.level // 2
        if not n_range[0] <= n <= n_range[1]:
            continue
        e = float(complex(lv.epsilon).real)
        pred = predict(limit, p5, e).values
        s = None
        if limit == "1a" and extraction.scale is not None:
            s = s16_scale(e, t5, th5["inf"], extraction.scale)
        obs = observe(level_view(lv.state, limit), limit, e, t5, s)
        used_n.append(n)
        used_eps.append(e)
        for k, v in pred.items():
            if k in obs and (quantities is None or k in quantities):
                rows.setdefault(k, []).append(abs(obs[k] - v))
    out = []
    for k, errs in rows.items():
        if len(errs) != len(used_n):
            continue
        out.append(ConvergenceReport(k, list(used_n), list(used_eps), [float(x) for x in errs],
                                     fit_slope(used_eps, errs), threshold))
    return out


def require_convergence(reports, floor=0.2):
    bad = [r.quantity for r in reports if not r.slope > floor]
    if bad:
        raise NoConvergence(f"error slope <= {floor} for: {', '.join(bad)}")
    return reports


# -- consistency of the fitted P5 family ---------------------------------------------------


def fitted_family(base, limit, t5_values, n_max=16, tol=1e-12, scale=None, **fit):
    """Limiting P5 states for several ``t5`` from ladders on one base state."""
    from .schlesinger import build_ladder

    out = []
    for t5 in t5_values:
        lad = build_ladder(base, PATTERN_OF[limit], n_max, t5, tol)
        out.append(extract_p5_from_ladder(lad, limit, scale, **fit).limit_state)
    return out


def fitted_p5_residual(base, limit, t5, h=0.05, **kw):
    """Residual of the fifth Painleve equation for ``y5`` fitted on a 5-point ``t5`` grid."""
    from .painleve5 import p5_residual_from_samples

    grid = [t5 + k * h for k in (-2, -1, 0, 1, 2)]
    fam = fitted_family(base, limit, grid, **kw)
    return p5_residual_from_samples(grid, [p.y for p in fam], fam[2].thetas), fam


def sigma5_check(base, limit, t5, h=0.02, **kw):
    """``d sigma5/dt5 + z5`` from fitted states at ``t5 +- h``."""
    from .painleve5 import sigma5

    lo, hi = fitted_family(base, limit, [t5 - h, t5 + h], **kw)
    return abs((sigma5(hi) - sigma5(lo)) / (2 * h) + (hi.z + lo.z) / 2)


# -- monodromy map of the first limit ------------------------------------------------------


def _acos_l(c):
    if abs(c - 1) < 1e-8 or abs(c + 1) < 1e-8:
        raise ConditionViolation(f"cos(pi l) = {c} is too close to +-1")
    l = cmath.acos(c) / PI
    if abs(l.real) >= 1:
        l -= 2 * round(l.real / 2)
    return l


def _gamma_pair(a, b):
    try:
        return gamma_c(a) * gamma_c(b)
    except PoleOfGamma as exc:
        raise ConditionViolation(f"Gamma pole: {exc}") from exc


def _sector0(mt_inf, theta_inf):
    """Upper-unipotent ``S`` with ``S^-1 M e^{-pi i theta sigma3}`` of the form ``S0 S1``.

    ``M e^{-pi i theta sigma3} = S' S0`` with ``S'`` upper-unipotent; the
    returned matrix is ``S'``.
    """
    w = mt_inf @ exp_sigma3(-1j * PI * theta_inf)
    return mat(1, w[0, 1] / w[1, 1], 0, 1)


@dataclass
class LimitIMap:
    l: complex
    alpha: complex
    beta: complex
    d0_sq: complex
    d0: complex
    K: np.ndarray
    K0: np.ndarray
    f0: complex
    theta5: ThetaTuple
    theta6: complex
    stokes: StokesData = None
    printed: MonodromyPoint = None
    point: MonodromyPoint = None

    def to_json(self):
        return {"l": c_to_json(self.l), "alpha": c_to_json(self.alpha),
                "beta": c_to_json(self.beta), "d0_sq": c_to_json(self.d0_sq),
                "d0": c_to_json(self.d0), "K": mat_to_json(self.K), "K0": mat_to_json(self.K0),
                "f0": c_to_json(self.f0), "theta5": self.theta5.to_json(),
                "theta6": c_to_json(self.theta6),
                "stokes": {"s0": c_to_json(self.stokes.s0), "s1": c_to_json(self.stokes.s1)},
                "point": self.point.to_json() if self.point else None}


def limit1_l(m6, thetas=None):
    """Both admissible roots ``+-l`` of the first-limit trace condition."""
    th = thetas or m6.thetas
    th6, thi5 = th["1"], th["1"] + th["inf"]
    m11 = m6["1"][0, 0]
    c = 1j * m11 * cmath.sin(PI * (thi5 - th6)) + cmath.exp(-1j * PI * (thi5 - th6)) * cmath.cos(
        PI * th6)
    l = _acos_l(c)
    if abs(l) < 1e-8:
        raise ConditionViolation("l = 0 is excluded")
    return l, -l, c


def limit1_map(m6, f0=1.0, sign=1, thetas=None):
    """P5 monodromy data attached to a P6 point by the first limit.

    ``m6`` is the monodromy of the ladder base with ``theta_1 = theta6`` and
    ``theta_1 + theta_inf = theta_inf5``.  Two conjugators are built:

    * ``K`` from the closed form; it realises the ``tilde`` data in the frame
      of the canonical solution of sector ``-1`` with the P6 loops taken on
      the far side of infinity;
    * ``K0 = e^{-pi i theta_inf6 sigma3} S^-1 K`` which moves the data to
      sector ``0`` where ``M_inf e^{-pi i theta sigma3} = S0 S1``.

    ``point`` (sector 0) is what the P5 system obtained from the ladder
    reproduces; ``printed`` is the data conjugated by ``K``.  ``thetas``
    overrides the exponents stored with ``m6`` (those read back from
    residue determinants only know ``theta`` up to sign).
    """
    th = thetas or m6.thetas
    th6, thi6 = th["1"], th["inf"]
    thi5 = th6 + thi6
    th5 = theta5(th["0"], -th["t"], thi5)
    m21 = m6["1"][1, 0]
    if abs(m21) < 1e-12 * max(1.0, float(np.max(np.abs(m6["1"])))):
        raise ConditionViolation("m21 of M_1 vanishes")
    if abs(cmath.sin(PI * thi6)) < 1e-12:
        raise ConditionViolation("theta_inf5 - theta6 is an integer")
    l_plus, l_minus, _ = limit1_l(m6, th)
    l = l_plus if sign > 0 else l_minus
    alpha, beta = (l - thi5) / 2, -(l + thi5) / 2
    try:
        d0_sq = m21 / (2j * PI) * gamma_c(1 - alpha) * gamma_c(1 - beta)
    except PoleOfGamma as exc:
        raise ConditionViolation(f"Gamma pole: {exc}") from exc
    d0 = cmath.sqrt(d0_sq)
    corner = PI / (_gamma_pair(alpha, beta) * cmath.sin(PI * thi6))
    K = -(exp_sigma3(cmath.log(f0) - 0.5j * PI * th6) @ mat(1, corner, 0, 1)
          @ np.diag([d0, 1 / d0]))
    Ki = inv(K)
    printed = {"0": K @ m6["0"] @ Ki, "1": K @ m6["t"] @ Ki, "inf": K @ m6["inf"] @ m6["1"] @ Ki}
    X = exp_sigma3(-1j * PI * thi6) @ inv(_sector0(printed["inf"], thi5))
    K0 = X @ K
    K0i = inv(K0)
    mats = {"0": K0 @ m6["0"] @ K0i, "1": K0 @ m6["t"] @ K0i,
            "inf": K0 @ m6["inf"] @ m6["1"] @ K0i}
    w = mats["inf"] @ exp_sigma3(-1j * PI * thi5)
    stokes = StokesData(complex(w[1, 0]), complex(w[0, 1]), complex(thi5),
                        {"form_residual": float(abs(w[0, 0] - 1))})
    meta = {"s0s1": stokes.s0 * stokes.s1, "sector": 0}
    point = MonodromyPoint(mats, th5, "P5-tilde", meta=meta)
    point.residuals = validate(point)
    point.residuals["stokes_form"] = float(abs(w[0, 0] - 1))
    pr = MonodromyPoint(printed, th5, "P5-tilde", meta={"s0s1": meta["s0s1"], "sector": -1})
    pr.residuals = validate(pr)
    return LimitIMap(l, alpha, beta, d0_sq, d0, K, K0, complex(f0), th5, th6, stokes, pr, point)


# -- monodromy map of the second limit ----------------------------------------------------


@dataclass
class LimitIIMap:
    T: complex
    l: complex
    alpha: complex
    beta: complex
    S0: np.ndarray
    S1: np.ndarray
    K: np.ndarray
    K_other: np.ndarray
    f0: complex
    f1: complex
    theta5: ThetaTuple
    theta6: complex
    case: str = ""
    residuals: dict = field(default_factory=dict)
    point: MonodromyPoint = None

    def to_json(self):
        return {"T": c_to_json(self.T), "l": c_to_json(self.l), "alpha": c_to_json(self.alpha),
                "beta": c_to_json(self.beta), "S0": mat_to_json(self.S0),
                "S1": mat_to_json(self.S1), "K": mat_to_json(self.K),
                "f0": c_to_json(self.f0), "f1": c_to_json(self.f1),
                "theta5": self.theta5.to_json(), "theta6": c_to_json(self.theta6),
                "case": self.case, "residuals": self.residuals,
                "point": self.point.to_json() if self.point else None}


def limit2_l(m6, sign=1, thetas=None):
    th = thetas or m6.thetas
    th6, thi5 = th["t"], th["t"] + th["0"]
    T = trace((m6["t"] - cmath.exp(1j * PI * th6) * I2)
              @ (m6["0"] - cmath.exp(-1j * PI * (thi5 - th6)) * I2))
    c = cmath.cos(PI * thi5) - T / 2
    root = cmath.sqrt(c * c - 1)
    w = c + sign * root
    if abs(w) < 1e-300:
        raise ConditionViolation("degenerate trace condition")
    l = cmath.log(w) / (1j * PI)
    return T, l


def limit2_map(m6, sign=1, thetas=None):
    """P5 monodromy data attached to a P6 point by the second limit.

    ``m6`` is the monodromy of the ladder base with ``theta_t = theta6`` and
    ``theta_t + theta_0 = theta_inf5``.  ``K`` triangularizes ``(M_0, M_t)``
    onto the Stokes-type targets.  ``thetas`` overrides the exponents stored
    with ``m6``.
    """
    th = thetas or m6.thetas
    th6 = th["t"]
    thi5 = th["t"] + th["0"]
    th5 = theta5(th["inf"], th["1"], thi5)
    for k in ("0", "1", "inf"):
        if abs(th[k] - round(th[k].real)) < 1e-12:
            raise ConditionViolation(f"theta_{k} of the P6 point is an integer")
    e6 = cmath.exp(1j * PI * th6)
    e0 = cmath.exp(1j * PI * (thi5 - th6))
    cond3 = (m6["t"] - I2 / e6) @ (m6["0"] - I2 / e0)
    if float(np.max(np.abs(cond3))) < 1e-12:
        raise ConditionViolation("(M_t - e^{-pi i theta6})(M_0 - e^{-pi i(theta_inf5-theta6)}) = 0")
    T, l = limit2_l(m6, sign, th)
    alpha, beta = -(thi5 - l) / 2, -(thi5 + l) / 2
    for name, v in (("alpha", alpha), ("beta", beta), ("l", l)):
        if abs(v - round(v.real)) < 1e-12:
            raise ConditionViolation(f"{name} is an integer")
    s0 = -2j * PI / _gamma_pair(1 - alpha, 1 - beta)
    s1 = -2j * PI * cmath.exp(1j * PI * thi5) / _gamma_pair(alpha, beta)
    S0, S1 = mat(1, 0, s0, 1), mat(1, s1, 0, 1)
    prob = PairProblem(m6["0"], m6["t"], e0, e6)
    case = classify(prob)
    sol = solve(prob, s0 * e6, case)
    K = sol.K
    Ki = inv(K)
    target_t = S0 @ exp_sigma3(1j * PI * th6)
    target_0 = exp_sigma3(-1j * PI * th6) @ S1 @ exp_sigma3(1j * PI * thi5)
    residuals = {
        "K_t": float(np.max(np.abs(K @ m6["t"] @ Ki - target_t))),
        "K_0": float(np.max(np.abs(K @ m6["0"] @ Ki - target_0))),
    }
    residuals["K_system"] = max(residuals["K_t"], residuals["K_0"])
    m_inf5 = S0 @ S1 @ exp_sigma3(1j * PI * thi5)
    mats = {"0": K @ m6["inf"] @ Ki, "1": K @ m6["1"] @ Ki, "inf": m_inf5}
    point = MonodromyPoint(mats, th5, "P5", meta={"s0s1": s0 * s1})
    point.residuals = validate(point)
    return LimitIIMap(T, l, alpha, beta, S0, S1, K, sol.K_other, sol.f0, sol.f1, th5, th6,
                      case, residuals, point)


# -- equivalence of the two limits ---------------------------------------------------------


def y5_rescaled(p5, theta15):
    """``y5 (z5 + (theta0 - theta1 + theta_inf)/2)`` with the given ``theta1``."""
    th = p5.thetas
    return p5.y * (p5.z + (th["0"] - theta15 + th["inf"]) / 2)


def equivalence_check(ext1, ext2, ladder1=None, ladder2=None, tol=5e-3, strict=True):
    """Compare the limit-I and limit-II extractions from matching base data.

    The second base must be the first one seen through ``lam -> t/lam``
    (``invert_positions``).  Compared are the theta table, ``z5`` and the
    rescaled ``y5`` of the fitted limits, and, when the ladders are given,
    the scale-free part of the transformed residues level by level.
    """
    p1, p2 = ext1.limit_state, ext2.limit_state
    t1, t2 = p1.thetas, p2.thetas
    report = {
        "theta0": abs(t1["0"] - t2["0"]),
        "theta1": abs(t1["1"] + t2["1"]),
        "theta_inf": abs(t1["inf"] - t2["inf"]),
        "z5": abs(p1.z - p2.z),
        "y5_rescaled": abs(y5_rescaled(p1, t1["1"]) - y5_rescaled(p2, t2["1"])),
    }
    if ladder1 is not None and ladder2 is not None:
        lv2 = {lv.level: lv.state for lv in ladder2.even()}
        worst = 0.0
        for lv in ladder1.even():
            if lv.level not in lv2:
                continue
            a = invert_positions(lv.state)
            b = lv2[lv.level]
            d = max(abs(a.z[k] - b.z[k]) for k in LABELS)
            for k in ("0", "1"):
                d = max(d, abs(a.u[k] / a.u["t"] - b.u[k] / b.u["t"]))
            worst = max(worst, d / (1 + max(abs(b.z[k]) for k in LABELS)))
        report["levels"] = worst
    report = {k: float(v) for k, v in report.items()}
    report["pass"] = all(v <= tol for v in report.values())
    if strict and not report["pass"]:
        bad = [k for k, v in report.items() if k != "pass" and v > tol]
        raise MismatchBeyondTolerance(f"limits disagree beyond {tol}: {', '.join(bad)}")
    return report


# -- outputs -------------------------------------------------------------------------------


def convergence_csv(reports):
    """One row per (quantity, level): ``quantity,n,eps,error,slope``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["quantity", "n", "eps", "error", "slope"])
    for r in reports:
        for n, e, err in zip(r.ns, r.eps, r.errors):
            w.writerow([r.quantity, n, repr(float(e)), repr(float(err)), repr(float(r.slope))])
    return buf.getvalue()


def gnuplot_script(reports, csv_name, title="error against eps"):
    """Self-contained gnuplot script drawing every quantity of ``csv_name``.

    Each quantity becomes one curve on shared log-log axes; the fitted slope
    goes into its key entry.  A single-point quantity is drawn without a
    slope annotation.
    """
    lines = [
        f"# reads {csv_name}",
        "set datafile separator ','",
        "set logscale xy",
        "set xlabel 'eps'",
        "set ylabel 'error'",
        f"set title {json.dumps(title)}",
        "set key left top",
    ]
    plots = []
    for r in reports:
        label = r.quantity if len(r.ns) < 2 else f"{r.quantity} (slope {r.slope:.2f})"
        sel = f"(strcol(1) eq {json.dumps(r.quantity)} ? $3 : 1/0)"
        plots.append(f"'{csv_name}' skip 1 using {sel}:4 with linespoints title {json.dumps(label)}")
    if plots:
        lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"
