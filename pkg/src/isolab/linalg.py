"""Small dense 2x2 complex algebra.

Matrices are plain ``numpy`` arrays of shape ``(2, 2)`` and dtype
``complex128``.  The helpers here add the few things numpy does not give
directly for this size: closed-form determinant and inverse with an explicit
singularity threshold, commutators, a deterministic eigen-decomposition and
text serialization of complex numbers.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateSpectrum, SingularMatrix

I2 = np.eye(2, dtype=complex)
SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 0], [0, 1]], dtype=complex)
SIGMA_MINUS = np.array([[1, 0], [0, 0]], dtype=complex)

SINGULAR_DET = 1e-14
EIG_SEPARATION = 1e-10


def mat(a11, a12, a21, a22):
    """Build a 2x2 complex matrix from its entries."""
    return np.array([[a11, a12], [a21, a22]], dtype=complex)


def det(a):
    return a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]


def trace(a):
    return a[0, 0] + a[1, 1]


def inv(a):
    d = det(a)
    if abs(d) <= SINGULAR_DET:
        raise SingularMatrix(f"|det| = {abs(d):.3e} is below {SINGULAR_DET:g}")
    return np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]], dtype=complex) / d


def commutator(a, b):
    return a @ b - b @ a


def diag_power(base, exponent):
    """``base ** (exponent * sigma3)`` with the principal branch of ``base``."""
    w = np.exp(exponent * np.log(complex(base)))
    return mat(w, 0, 0, 1 / w)


def exp_sigma3(x):
    """``exp(x * sigma3)``."""
    w = np.exp(complex(x))
    return mat(w, 0, 0, 1 / w)


class MatOps(NamedTuple):
    product: np.ndarray
    reverse_product: np.ndarray
    inverse: np.ndarray
    det: complex
    trace: complex
    commutator: np.ndarray


def mat_ops(a, b):
    """Bundle the elementary operations on a pair of matrices."""
    return MatOps(a @ b, b @ a, inv(a), det(a), trace(a), commutator(a, b))


def is_unimodular(a, tol=1e-10):
    return abs(det(a) - 1) <= tol


def unimodularize(a):
    """Scale ``a`` by a square root of its determinant so that det = 1."""
    d = det(a)
    if abs(d) <= SINGULAR_DET:
        raise SingularMatrix("cannot normalize a singular matrix")
    return a / np.sqrt(d)


def eigenvalue_order_key(r):
    """Sort key placing |r| > 1 first, then larger real part, then imaginary part."""
    return (-round(abs(r), 12), -round(r.real, 12), -round(r.imag, 12))


@dataclass(frozen=True)
class EigenPair2:
    values: tuple
    vectors: np.ndarray  # columns are eigenvectors

    def residual(self, m):
        return max(
            float(np.max(np.abs(m @ self.vectors[:, j] - self.values[j] * self.vectors[:, j])))
            for j in range(2)
        )


def _phase_fix(v):
    v = v / np.linalg.norm(v)
    k = 0 if abs(v[0]) > 1e-14 * (abs(v[0]) + abs(v[1])) else 1
    return v * (abs(v[k]) / v[k])


def _eigvec(m, r):
    # (m - r) has rank one; take its larger row and rotate it.
    n = m - r * I2
    row = n[0] if abs(n[0, 0]) + abs(n[0, 1]) >= abs(n[1, 0]) + abs(n[1, 1]) else n[1]
    if abs(row[0]) + abs(row[1]) == 0.0:
        return None
    return _phase_fix(np.array([-row[1], row[0]], dtype=complex))


def eig2(m, first=None, det_normalize=False):
    """Eigen-decomposition of a 2x2 matrix with deterministic conventions.

    Parameters
    ----------
    m : (2, 2) complex array
    first : complex, optional
        Put the eigenvalue closest to ``first`` in the first slot.  Without it
        the order follows :func:`eigenvalue_order_key`.
    det_normalize : bool
        Rescale the second vector so that ``det(e_1, e_2) = 1``.

    Returns
    -------
    EigenPair2
        Vectors are unit length with the first nonzero component real and
        positive (before the optional determinant normalization).
    """
    m = np.asarray(m, dtype=complex)
    tr = trace(m)
    disc = np.sqrt(tr * tr / 4 - det(m))
    r1, r2 = tr / 2 + disc, tr / 2 - disc
    if abs(r1 - r2) <= EIG_SEPARATION:
        raise DegenerateSpectrum(f"eigenvalue separation {abs(r1 - r2):.3e}")
    if first is not None:
        if abs(r2 - first) < abs(r1 - first):
            r1, r2 = r2, r1
    elif eigenvalue_order_key(r2) < eigenvalue_order_key(r1):
        r1, r2 = r2, r1
    vecs = []
    for r in (r1, r2):
        v = _eigvec(m, r)
        if v is None:  # m is a multiple of the identity: impossible with separated spectrum
            raise DegenerateSpectrum("no eigenvector found")
        vecs.append(v)
    e = np.column_stack(vecs)
    if det_normalize:
        d = det(e)
        if abs(d) <= SINGULAR_DET:
            raise DegenerateSpectrum("eigenvectors are parallel")
        e[:, 1] /= d
    return EigenPair2((complex(r1), complex(r2)), e)


# -- serialization ---------------------------------------------------------


def c_to_json(z):
    z = complex(z)
    return [float(format(z.real, ".17g")), float(format(z.imag, ".17g"))]


def c_from_json(pair):
    return complex(pair[0], pair[1])


def mat_to_json(a):
    return [[c_to_json(a[i, j]) for j in range(2)] for i in range(2)]


def mat_from_json(rows):
    return np.array([[c_from_json(x) for x in row] for row in rows], dtype=complex)


def c_to_csv(z):
    z = complex(z)
    return f"{z.real:.17g}{z.imag:+.17g}i"


def c_from_csv(text):
    return complex(text.strip().replace("i", "j"))
