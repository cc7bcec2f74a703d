"""Complex Gamma function, Gauss hypergeometric function and the hypergeometric
fundamental solution ``Y(x)`` with its connection data.

All powers and logarithms use the principal branch, ``arg`` in ``(-pi, pi]``.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    NearSingularArgument,
    NonGenericParameters,
    OutOfSector,
    ParameterPole,
    PoleOfGamma,
    SmallParameterRegime,
)
from .linalg import SIGMA3, diag_power, mat

# Lanczos approximation, g = 7, nine coefficients.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


def _near_nonpositive_integer(z, tol=1e-12):
    n = round(z.real)
    return n <= 0 and abs(z - n) <= tol


def _lanczos_log(z):
    # log Gamma(z) for Re z >= 0.5 (not the principal branch of log Gamma)
    z = z - 1
    acc = _LANCZOS[0]
    for k in range(1, 9):
        acc += _LANCZOS[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(acc)


def gamma_c(z):
    """Gamma function of a complex argument.

    Raises ``PoleOfGamma`` within 1e-12 of a non-positive integer.
    """
    z = complex(z)
    if _near_nonpositive_integer(z):
        raise PoleOfGamma(f"Gamma has a pole at {z}")
    if z.real < 0.5:
        return math.pi / (cmath.sin(math.pi * z) * gamma_c(1 - z))
    return cmath.exp(_lanczos_log(z))


def rgamma_c(z):
    """Reciprocal Gamma function; zero at the poles of Gamma."""
    z = complex(z)
    if _near_nonpositive_integer(z):
        return 0j
    return 1 / gamma_c(z)


def gamma_ratio(num, den):
    """``prod Gamma(num) / prod Gamma(den)`` computed through logarithms.

    Useful when the individual factors overflow.  Arguments with Re < 0.5 are
    handled through the reflection formula.
    """
    acc = 0j
    sign = 1 + 0j
    for z, s in [(complex(a), 1) for a in num] + [(complex(b), -1) for b in den]:
        if _near_nonpositive_integer(z):
            if s == 1:
                raise PoleOfGamma(f"Gamma has a pole at {z}")
            return 0j
        if z.real < 0.5:
            # Gamma(z) = pi / (sin(pi z) Gamma(1 - z))
            acc += s * (math.log(math.pi) - _lanczos_log(1 - z))
            sign *= cmath.sin(math.pi * z) ** (-s)
        else:
            acc += s * _lanczos_log(z)
    return sign * cmath.exp(acc)


def gamma_identities(z, mu=0.7, nu=0.1):
    """Residuals of the reflection formula and of the large-argument ratio rule.

    Returns ``(reflection, ratio)`` where ``reflection`` is
    ``Gamma(z) Gamma(1 - z) sin(pi z) / pi - 1`` and ``ratio`` is
    ``Gamma(z + mu) / Gamma(z + nu) * z**(nu - mu) - 1``.
    """
    z = complex(z)
    reflection = gamma_c(z) * gamma_c(1 - z) * cmath.sin(math.pi * z) / math.pi - 1
    ratio = gamma_ratio([z + mu], [z + nu]) * z ** (nu - mu) - 1
    return reflection, ratio


# -- Gauss hypergeometric function -------------------------------------------

_DEGENERATE = 1e-3


def _series(a, b, c, x, max_terms=20000):
    term = 1 + 0j
    total = 1 + 0j
    small = 0
    for k in range(max_terms):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * x
        total += term
        if term == 0:
            return total
        if abs(term) <= 1e-17 * abs(total):
            small += 1
            if small >= 3:
                return total
        else:
            small = 0
    return total


def _dist_int(z):
    return abs(z - round(z.real))


def hyp2f1(a, b, c, x):
    """Gauss hypergeometric function ``2F1(a, b; c; x)`` for complex arguments.

    The power series is used for ``|x| <= 0.5``.  Elsewhere the argument is
    mapped by one of the linear transformations ``x/(x-1)``, ``1-x``, ``1/x``,
    ``1/(1-x)``, whichever gives the smallest modulus.  Accuracy degrades near
    ``exp(+-i pi/3)`` where no transformation helps.
    """
    a, b, c, x = complex(a), complex(b), complex(c), complex(x)
    if _near_nonpositive_integer(c, 1e-12):
        raise ParameterPole(f"c = {c} is a non-positive integer")
    if abs(x - 1) < 1e-8:
        raise NearSingularArgument(f"x = {x} is too close to 1")
    if x == 0:
        return 1 + 0j
    if abs(x) <= 0.5:
        return _series(a, b, c, x)

    candidates = []
    w = x / (x - 1)
    candidates.append((abs(w), "pfaff"))
    candidates.append((abs(1 - x), "one_minus"))
    candidates.append((abs(1 / x), "inverse"))
    candidates.append((abs(1 / (1 - x)), "inverse_one_minus"))
    candidates.sort(key=lambda p: p[0])
    for modulus, name in candidates:
        if modulus >= 0.97:
            break
        if name == "pfaff":
            return (1 - x) ** (-a) * _series(a, c - b, c, w)
        if name == "one_minus" and _dist_int(c - a - b) > _DEGENERATE:
            return _one_minus(a, b, c, x)
        if name in ("inverse", "inverse_one_minus") and _dist_int(a - b) > _DEGENERATE:
            return _inverse(a, b, c, x) if name == "inverse" else _inverse_one_minus(a, b, c, x)
    if abs(x) < 1:
        # slow but convergent
        return _series(a, b, c, x, max_terms=200000)
    raise ParameterPole(
        f"no admissible transformation for x = {x}: parameters are near a logarithmic case"
    )


def _one_minus(a, b, c, x):
    y = 1 - x
    t1 = gamma_ratio([c, c - a - b], [c - a, c - b]) * _series(a, b, a + b - c + 1, y)
    t2 = (
        gamma_ratio([c, a + b - c], [a, b])
        * y ** (c - a - b)
        * _series(c - a, c - b, c - a - b + 1, y)
    )
    return t1 + t2


def _inverse(a, b, c, x):
    y = 1 / x
    t1 = gamma_ratio([c, b - a], [b, c - a]) * (-x) ** (-a) * _series(a, a - c + 1, a - b + 1, y)
    t2 = gamma_ratio([c, a - b], [a, c - b]) * (-x) ** (-b) * _series(b, b - c + 1, b - a + 1, y)
    return t1 + t2


def _inverse_one_minus(a, b, c, x):
    y = 1 / (1 - x)
    t1 = gamma_ratio([c, b - a], [b, c - a]) * (1 - x) ** (-a) * _series(a, c - b, a - b + 1, y)
    t2 = gamma_ratio([c, a - b], [a, c - b]) * (1 - x) ** (-b) * _series(b, c - a, b - a + 1, y)
    return t1 + t2


def hyp_large_b(a, b, c, z, kappa):
    """Two-term large-``b`` asymptotic form of ``2F1(a, b; c; z)``.

    Valid for ``0 < |z| < 1`` and ``|bz|`` large in the strip
    ``-pi + kappa pi/2 < arg(bz) < pi + kappa pi/2`` (principal ``arg``).
    """
    a, b, c, z = complex(a), complex(b), complex(c), complex(z)
    if kappa not in (1, -1):
        raise ValueError("kappa must be +1 or -1")
    if not 0 < abs(z) < 1:
        raise OutOfSector(f"|z| = {abs(z)} is outside (0, 1)")
    bz = b * z
    if abs(bz) < 10:
        raise OutOfSector(f"|bz| = {abs(bz)} is below 10")
    phase = cmath.phase(bz)
    lo, hi = -math.pi + kappa * math.pi / 2, math.pi + kappa * math.pi / 2
    if not lo < phase < hi:
        raise OutOfSector(f"arg(bz) = {phase:.4f} outside ({lo:.4f}, {hi:.4f})")
    log_bz = cmath.log(bz)
    first = cmath.exp(1j * math.pi * a * kappa - a * log_bz) * gamma_ratio([c], [c - a])
    second = cmath.exp(bz + (a - c) * log_bz) * gamma_ratio([c], [a])
    return first + second


# -- hypergeometric fundamental solution ---------------------------------------


@dataclass(frozen=True)
class HyperParams:
    alpha: complex
    beta: complex
    gamma: complex

    @property
    def theta_inf(self):
        return self.alpha - self.beta

    @property
    def theta0(self):
        return 1 - self.gamma

    @property
    def theta1(self):
        return self.gamma - self.alpha - self.beta - 1


@dataclass(frozen=True)
class YBundle:
    params: HyperParams
    A0: np.ndarray
    A1: np.ndarray
    G0: np.ndarray
    G1: np.ndarray
    C0: np.ndarray
    C1: np.ndarray

    def det_C(self, nu):
        """Closed form of ``det C^nu``; it follows from ``det Y = 1``."""
        p = self.params
        a, b, g = complex(p.alpha), complex(p.beta), complex(p.gamma)
        if nu == 0:
            return cmath.exp(-1j * math.pi * (a + b + 1 - g)) * (a - b) / (1 - g)
        return cmath.exp(-1j * math.pi * (g - a - b - 1)) * (a - b) / (a + b + 1 - g)

    def local_monodromy(self, nu):
        """``C^{-1} exp(pi i theta sigma3) C`` at ``nu`` in {0, 1}.

        Written entrywise with the closed-form determinant, which avoids the
        cancellation of a numerical inverse when ``C`` is badly conditioned.
        """
        (c11, c12), (c21, c22) = self.C0 if nu == 0 else self.C1
        theta = self.params.theta0 if nu == 0 else self.params.theta1
        e = cmath.exp(1j * math.pi * theta)
        k = (e - 1 / e) / self.det_C(nu)
        return mat(e + k * c12 * c21, k * c12 * c22, -k * c11 * c21, 1 / e - k * c12 * c21)


def check_generic(p, tol=1e-6):
    for name, value in (
        ("alpha-beta", p.theta_inf),
        ("1-gamma", p.theta0),
        ("gamma-alpha-beta-1", p.theta1),
    ):
        if _dist_int(complex(value)) <= tol:
            raise NonGenericParameters(f"{name} = {value} is too close to an integer")


def y_residues(p):
    a, b, g = complex(p.alpha), complex(p.beta), complex(p.gamma)
    h0 = ((a + b) * (1 - g) + 2 * a * b) / 2
    A0 = mat(-h0, b * (b + 1 - g), -a * (a + 1 - g), h0) / (b - a)
    # The pole at 1 is fixed by the sum rule A0 + A1 = (b - a)/2 sigma3.
    A1 = (b - a) / 2 * SIGMA3 - A0
    return A0, A1


def y_bundle(p):
    """Residues, local gauge matrices and connection matrices of ``Y(x)``."""
    check_generic(p)
    a, b, g = complex(p.alpha), complex(p.beta), complex(p.gamma)
    A0, A1 = y_residues(p)
    G0 = mat(b + 1 - g, b, a + 1 - g, a) / (b - a)
    G1 = mat(1, b * (b + 1 - g), 1, a * (a + 1 - g)) / (b - a)
    ipi = 1j * math.pi
    C0 = mat(
        cmath.exp(-ipi * (a + 1 - g)) * gamma_ratio([g - 1, a - b + 1], [g - b, a]),
        -cmath.exp(-ipi * (b + 1 - g)) * gamma_ratio([g - 1, b - a + 1], [g - a, b]),
        cmath.exp(-ipi * a) * gamma_ratio([1 - g, a - b + 1], [1 - b, a + 1 - g]),
        -cmath.exp(-ipi * b) * gamma_ratio([1 - g, b - a + 1], [1 - a, b + 1 - g]),
    )
    e1 = cmath.exp(-ipi * (g - a - b - 1))
    C1 = mat(
        -gamma_ratio([a + b + 1 - g, a - b + 1], [a + 1 - g, a]),
        gamma_ratio([a + b + 1 - g, b - a + 1], [b + 1 - g, b]),
        -e1 * gamma_ratio([g - a - b - 1, a - b + 1], [1 - b, g - b]),
        e1 * gamma_ratio([g - a - b - 1, b - a + 1], [1 - a, g - a]),
    )
    return YBundle(p, A0, A1, G0, G1, C0, C1)


def y_matrix(p, x):
    """``Y(x)`` for ``|x| > 1`` through hypergeometric functions of ``1/x``."""
    a, b, g = complex(p.alpha), complex(p.beta), complex(p.gamma)
    x = complex(x)
    y = 1 / x
    m = mat(
        hyp2f1(a, a + 1 - g, a - b, y),
        b * (b + 1 - g) / ((b - a) * (b - a + 1) * x) * hyp2f1(b + 1, b + 2 - g, b - a + 2, y),
        a * (a + 1 - g) / ((a - b) * (a - b + 1) * x) * hyp2f1(a + 1, a + 2 - g, a - b + 2, y),
        hyp2f1(b, b + 1 - g, b - a, y),
    )
    scalar = (1 - y) ** ((a + b + 1 - g) / 2)
    return m @ diag_power(x, (b - a) / 2) * scalar


def y_asymptotic_frame(p, kappa):
    """Leading constant matrix of the large ``1 - gamma`` asymptotics of ``Y``.

    Only meaningful when ``|1 - gamma|`` is large; raises
    ``SmallParameterRegime`` below 10.
    """
    if kappa not in (1, -1):
        raise ValueError("kappa must be +1 or -1")
    a, b, g = complex(p.alpha), complex(p.beta), complex(p.gamma)
    if abs(1 - g) < 10:
        raise SmallParameterRegime(f"|1 - gamma| = {abs(1 - g):.3g} < 10")
    ipi = 1j * math.pi
    core = mat(
        gamma_ratio([a - b], [a]),
        gamma_ratio([b - a], [b]),
        -cmath.exp(ipi * a * kappa) * gamma_ratio([1 + a - b], [1 - b]),
        cmath.exp(ipi * b * kappa) * gamma_ratio([1 + b - a], [1 - a]),
    )
    return cmath.sqrt(a - b) * SIGMA3 @ core @ diag_power(1 - g, (b - a) / 2)


def y_asymptotic_form(p, x, kappa):
    """Leading term of ``Y(x)`` in the large ``1 - gamma`` regime."""
    a, b, g = complex(p.alpha), complex(p.beta), complex(p.gamma)
    x = complex(x)
    left = mat(1, b, 1, a) / cmath.sqrt(a - b)
    w = (1 - g) / (2 * x) + (a + b) / 2 * cmath.log((1 - g) / x)
    return left @ mat(cmath.exp(w), 0, 0, cmath.exp(-w)) @ y_asymptotic_frame(p, kappa)
