"""Simultaneous triangularization of two SL(2, C) matrices.

Given ``M0``, ``M1`` with chosen eigenvalues ``r0``, ``r1`` find a unimodular
``K`` such that

    K M0 K^-1 = [[r0, f0], [0, 1/r0]],    K M1 K^-1 = [[r1, 0], [f1, 1/r1]].

With ``E_nu = (e_nu+, e_nu-)`` the unit-determinant eigenbases and
``[[p, r], [q, s]] = E0^-1 E1``, every solution has the form
``K^-1 = (g0 e0+, g1 e1-)`` with ``g0 g1 s = 1``; the case analysis reduces
to which of ``p, q, r, s`` vanish.
"""

import cmath
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AmbiguousClassification,
    BasisDegenerate,
    ConfigError,
    DegenerateSpectrum,
    UnsolvablePair,
)
from .linalg import (
    I2,
    c_from_json,
    c_to_json,
    commutator,
    det,
    eig2,
    eigenvalue_order_key,
    inv,
    mat,
    mat_from_json,
    mat_to_json,
    trace,
)

ZERO_TOL = 1e-9
BAND = 10.0

CASES = ("commuting", "f1-zero", "f0-zero", "p-zero", "generic", "unsolvable")


def default_eigenvalue(m):
    tr = trace(m)
    disc = cmath.sqrt(tr * tr / 4 - 1)
    return min((tr / 2 + disc, tr / 2 - disc), key=eigenvalue_order_key)


@dataclass(frozen=True)
class PairProblem:
    M0: np.ndarray
    M1: np.ndarray
    r0: complex = None
    r1: complex = None

    def __post_init__(self):
        for name in ("M0", "M1"):
            m = np.asarray(getattr(self, name), dtype=complex)
            if abs(det(m) - 1) > 1e-10:
                raise ConfigError(f"{name} is not unimodular (det = {det(m)})")
            object.__setattr__(self, name, m)
        for name, m in (("r0", self.M0), ("r1", self.M1)):
            r = getattr(self, name)
            r = default_eigenvalue(m) if r is None else complex(r)
            if min(abs(r), abs(r - 1), abs(r + 1)) <= 1e-8:
                raise DegenerateSpectrum(f"{name} = {r} is too close to 0 or +-1")
            if abs(r * r - trace(m) * r + 1) > 1e-8 * max(1.0, abs(r) ** 2):
                raise ConfigError(f"{name} is not an eigenvalue of the matrix")
            object.__setattr__(self, name, r)

    @property
    def c0(self):
        return self.r0 - 1 / self.r0

    @property
    def c1(self):
        return self.r1 - 1 / self.r1

    @property
    def scale(self):
        return max(1.0, float(np.max(np.abs(self.M0)))) * max(1.0, float(np.max(np.abs(self.M1))))

    def bases(self):
        e0 = eig2(self.M0, first=self.r0, det_normalize=True).vectors
        e1 = eig2(self.M1, first=self.r1, det_normalize=True).vectors
        return e0, e1

    def basis_change(self):
        """``(p, q, r, s)`` with ``e1+ = p e0+ + q e0-`` and ``e1- = r e0+ + s e0-``."""
        e0, e1 = self.bases()
        c = inv(e0) @ e1
        return complex(c[0, 0]), complex(c[1, 0]), complex(c[0, 1]), complex(c[1, 1])


@dataclass
class PairSolution:
    case_tag: str
    K: np.ndarray = None
    K_other: np.ndarray = None
    f0: complex = 0j
    f1: complex = 0j
    f_product: complex = 0j
    meta: dict = field(default_factory=dict)

    def to_json(self):
        out = {"case": self.case_tag, "f0": c_to_json(self.f0), "f1": c_to_json(self.f1),
               "f_product": c_to_json(self.f_product)}
        if self.K is not None:
            out["K"] = mat_to_json(self.K)
        return out


def f_product_forms(M0, M1, r0, r1):
    """The four equivalent trace expressions for ``f0 f1``."""
    c0, c1 = r0 - 1 / r0, r1 - 1 / r1
    return (
        trace((M1 - r1 * I2) @ (M0 - I2 / r0)),
        trace((M1 - I2 / r1) @ (M0 - r0 * I2)),
        trace((M0 - I2 / r0) @ (M1 - I2 / r1)) - c0 * c1,
        (r0 + r1) * (1 / r0 + 1 / r1) - det(M0 + M1),
    )


def _is_zero(value, scale, what):
    tol = ZERO_TOL * scale
    a = abs(value)
    if tol < a <= BAND * tol:
        raise AmbiguousClassification(f"{what} = {a:.3e} sits in the tolerance band")
    return a <= tol


def classify(p):
    sc = p.scale
    d1 = trace((p.M0 - I2 / p.r0) @ (p.M1 - p.r1 * I2))
    d2 = trace((p.M0 - I2 / p.r0) @ (p.M1 - I2 / p.r1))
    if _is_zero(d1, sc, "tr (M0 - 1/r0)(M1 - r1)"):
        if _is_zero(np.max(np.abs(commutator(p.M0, p.M1))), sc, "commutator"):
            return "commuting"
        a9 = np.max(np.abs((p.M0 - p.r0 * I2) @ (p.M1 - I2 / p.r1)))
        a13 = np.max(np.abs((p.M0 - I2 / p.r0) @ (p.M1 - p.r1 * I2)))
        z9 = _is_zero(a9, sc, "(M0 - r0)(M1 - 1/r1)")
        z13 = _is_zero(a13, sc, "(M0 - 1/r0)(M1 - r1)")
        if z9 == z13:
            raise AmbiguousClassification("neither or both annihilation relations hold")
        return "f1-zero" if z9 else "f0-zero"
    if _is_zero(d2, sc, "tr (M0 - 1/r0)(M1 - 1/r1)"):
        a3 = np.max(np.abs((p.M0 - p.r0 * I2) @ (p.M1 - p.r1 * I2)))
        return "unsolvable" if _is_zero(a3, sc, "(M0 - r0)(M1 - r1)") else "p-zero"
    return "generic"


def solve(p, f_choice=None, case=None):
    """Solve the pair problem.

    ``f_choice`` fixes the free corner: ``f0`` in the ``f1-zero`` case and
    ``f1`` otherwise (default 1).  Both sign branches are returned as
    ``K`` and ``K_other``.
    """
    case = case or classify(p)
    if case == "unsolvable":
        raise UnsolvablePair("the matrices share an eigenvector in the forbidden pairing")
    e0, _ = p.bases()
    pp, q, r, s = p.basis_change()
    e1m = eig2(p.M1, first=p.r1, det_normalize=True).vectors[:, 1]
    if case == "commuting":
        k = inv(e0)
        return PairSolution(case, k, -k, 0j, 0j, 0j, {"p": pp, "q": q, "r": r, "s": s})
    if abs(s) <= ZERO_TOL:
        raise BasisDegenerate("s = 0: the pair is unsolvable")
    f = 1 + 0j if f_choice is None else complex(f_choice)
    if case == "f1-zero":
        f0, f1 = f, 0j
        g0 = cmath.sqrt(r * p.c0 / (s * f0))
    else:
        f1 = f
        g0 = cmath.sqrt(f1 / (q * s * p.c1))
        f0 = q * r * p.c0 * p.c1 / f1
        if case == "f0-zero":
            f0 = 0j
    g1 = 1 / (g0 * s)
    kinv = np.column_stack([g0 * e0[:, 0], g1 * e1m])
    k = inv(kinv)
    return PairSolution(case, k, -k, complex(f0), complex(f1), complex(f0 * f1),
                        {"p": pp, "q": q, "r": r, "s": s})


def verify(p, sol):
    if sol.K is None:
        return {}
    k, kinv = sol.K, inv(sol.K)
    t0 = mat(p.r0, sol.f0, 0, 1 / p.r0)
    t1 = mat(p.r1, 0, sol.f1, 1 / p.r1)
    forms = f_product_forms(p.M0, p.M1, p.r0, p.r1)
    out = {
        "M0_residual": float(np.max(np.abs(k @ p.M0 @ kinv - t0))),
        "M1_residual": float(np.max(np.abs(k @ p.M1 @ kinv - t1))),
        "unimodular": float(abs(det(k) - 1)),
        "f_product": float(abs(sol.f0 * sol.f1 - forms[0])),
        "forms_spread": float(max(abs(x - forms[0]) for x in forms)),
    }
    out["max"] = max(out.values())
    return out


# -- constructors for the special cases --------------------------------------------------


def _sl2(rng, spread=1.0):
    while True:
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        m = m * spread
        d = det(m)
        if abs(d) > 0.1:
            return m / cmath.sqrt(d)


def random_pair(rng):
    return PairProblem(_sl2(rng), _sl2(rng))


def _with_eigen(vectors, r):
    return vectors @ np.diag([r, 1 / r]) @ inv(vectors)


def _rand_eigenvalue(rng):
    while True:
        r = complex(rng.normal(), rng.normal()) * 1.5
        if min(abs(r), abs(r - 1), abs(r + 1)) > 0.2:
            return r if abs(r) > 1 else 1 / r


def constructed_pair(rng, kind):
    """A pair whose eigenvector geometry forces a given case.

    ``kind`` is one of ``commuting``, ``f1-zero``, ``f0-zero``, ``p-zero``,
    ``unsolvable``.
    """
    r0, r1 = _rand_eigenvalue(rng), _rand_eigenvalue(rng)
    e0 = _sl2(rng)
    a, b = e0[:, 0], e0[:, 1]
    w = rng.normal(size=2) + 1j * rng.normal(size=2)
    if kind == "commuting":
        e1 = e0
    elif kind == "f1-zero":      # e1+ parallel to e0+
        e1 = np.column_stack([a, w])
    elif kind == "f0-zero":      # e1- parallel to e0-
        e1 = np.column_stack([w, b])
    elif kind == "p-zero":       # e1+ parallel to e0-
        e1 = np.column_stack([b, w])
    elif kind == "unsolvable":   # e1- parallel to e0+
        e1 = np.column_stack([w, a])
    else:
        raise ValueError(kind)
    m0 = _with_eigen(e0, r0)
    m1 = _with_eigen(e1, r1)
    return PairProblem(m0 / cmath.sqrt(det(m0)), m1 / cmath.sqrt(det(m1)), r0, r1)


# -- batch mode ----------------------------------------------------------------------------


def solve_record(rec):
    p = PairProblem(mat_from_json(rec["M0"]), mat_from_json(rec["M1"]),
                    c_from_json(rec["r0"]) if "r0" in rec else None,
                    c_from_json(rec["r1"]) if "r1" in rec else None)
    f = c_from_json(rec["f"]) if "f" in rec else None
    case = classify(p)
    out = {"case": case}
    if case == "unsolvable":
        return out
    sol = solve(p, f, case)
    out.update(sol.to_json())
    out["residuals"] = verify(p, sol)
    return out


def solve_jsonl(lines):
    """Yield one JSON line per input line; failures are reported, not raised."""
    for line in lines:
        line = line.strip()
        if not line:
            continue
        try:
            out = solve_record(json.loads(line))
        except Exception as exc:  # reported per record in batch output
            out = {"error": type(exc).__name__, "message": str(exc)}
        yield json.dumps(out)
