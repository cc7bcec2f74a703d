"""Independent reference computations in extended precision (mpmath)."""

import numpy as np
import mpmath as mp


def _m(a):
    return [[mp.mpc(a[i][j]) for j in range(2)] for i in range(2)]


def _mul(a, b):
    return [[a[i][0] * b[0][j] + a[i][1] * b[1][j] for j in range(2)] for i in range(2)]


def _add(a, b, ca=1, cb=1):
    return [[ca * a[i][j] + cb * b[i][j] for j in range(2)] for i in range(2)]


def _norm(a):
    return max(abs(a[i][j]) for i in range(2) for j in range(2))


def taylor_step(A0, A1, x0, h, eps):
    """Propagator of ``Y' = (A0/x + A1/(x - 1)) Y`` from ``x0`` to ``x0 + h``.

    With ``x (x - 1) Y' = ((x - 1) A0 + x A1) Y`` the Taylor coefficients at
    ``x0`` obey a three-term recurrence.
    """
    p0, p1 = x0 * (x0 - 1), 2 * x0 - 1
    q0 = _add(A0, A1, x0 - 1, x0)
    q1 = _add(A0, A1)
    prev, cur = [[0, 0], [0, 0]], [[mp.mpc(1), 0], [0, mp.mpc(1)]]
    total, hk, k = cur, mp.mpc(1), 0
    while True:
        nxt = _add(_add(_mul(q0, cur), _mul(q1, prev)), _add(cur, prev, p1 * k, k - 1), 1, -1)
        nxt = [[v / (p0 * (k + 1)) for v in row] for row in nxt]
        prev, cur, k = cur, nxt, k + 1
        hk *= h
        term = [[v * hk for v in row] for row in cur]
        total = _add(total, term)
        if _norm(term) < eps * _norm(total) and k > 5:
            return total


def circle_propagator(A0, A1, center, radius, start_angle, steps=24, dps=24):
    """Counterclockwise continuation once around the circle, in ``dps`` digits."""
    with mp.workdps(dps):
        A0, A1 = _m(A0), _m(A1)
        eps = mp.mpf(10) ** (-dps + 2)
        c, r = mp.mpc(complex(center)), mp.mpf(radius)
        pts = [c + r * mp.expj(start_angle + 2 * mp.pi * k / steps) for k in range(steps + 1)]
        pts[-1] = pts[0]
        total = [[mp.mpc(1), 0], [0, mp.mpc(1)]]
        for a, b in zip(pts, pts[1:]):
            total = _mul(taylor_step(A0, A1, a, b - a, eps), total)
        return total


def hyper_frame(alpha, beta, gamma, x, dps=24):
    """The normalized hypergeometric fundamental matrix at ``x`` via mpmath."""
    with mp.workdps(dps):
        a, b, g = (mp.mpc(complex(v)) for v in (alpha, beta, gamma))
        x = mp.mpc(complex(x))
        y = 1 / x
        m = [[mp.hyp2f1(a, a + 1 - g, a - b, y),
              b * (b + 1 - g) / ((b - a) * (b - a + 1) * x) * mp.hyp2f1(b + 1, b + 2 - g, b - a + 2, y)],
             [a * (a + 1 - g) / ((a - b) * (a - b + 1) * x) * mp.hyp2f1(a + 1, a + 2 - g, a - b + 2, y),
              mp.hyp2f1(b, b + 1 - g, b - a, y)]]
        s = (1 - y) ** ((a + b + 1 - g) / 2)
        d = (x ** ((b - a) / 2), x ** ((a - b) / 2))
        return [[m[i][j] * d[j] * s for j in range(2)] for i in range(2)]


def hyper_residues(alpha, beta, gamma):
    """Residues at 0 and 1 of the hypergeometric system, in working precision."""
    a, b, g = (mp.mpc(complex(v)) for v in (alpha, beta, gamma))
    h0 = ((a + b) * (1 - g) + 2 * a * b) / 2
    A0 = [[-h0 / (b - a), b * (b + 1 - g) / (b - a)], [-a * (a + 1 - g) / (b - a), h0 / (b - a)]]
    A1 = [[(b - a) / 2 - A0[0][0], -A0[0][1]], [-A0[1][0], -(b - a) / 2 - A0[1][1]]]
    return A0, A1


def hyper_monodromy(params, nu, radius=0.5, dps=24):
    """Monodromy of the hypergeometric system around ``nu`` in the normalized frame.

    The base point is the top of the circle, in the upper half plane where
    the normalized frame is single valued.
    """
    with mp.workdps(dps):
        A0, A1 = hyper_residues(params.alpha, params.beta, params.gamma)
        ang = mp.pi / 2
        base = nu + radius * mp.expj(ang)
        t = circle_propagator(A0, A1, nu, radius, ang, dps=dps)
        ym = mp.matrix(hyper_frame(params.alpha, params.beta, params.gamma, base, dps))
        m = mp.inverse(ym) * mp.matrix(t) * ym
        return np.array([[complex(m[i, j]) for j in range(2)] for i in range(2)])
