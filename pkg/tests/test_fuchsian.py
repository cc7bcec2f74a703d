import cmath
import json
import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from isolab.errors import CyclicViolation, PoleProximity
from isolab.fuchsian import (
    LinearSystem,
    connection_matrix,
    default_base_p6,
    infinity_frame,
    local_solution,
    loop_around,
    monodromy_fuchsian,
    monodromy_point_p6,
    polyline,
    segment,
    transfer,
    validate,
)
from isolab.linalg import det, mat
from isolab.painleve6 import LABELS, assemble, make_thetas, random_state, state_with_sigma

# below ~1e-100 the squared error norms inside scipy's step control underflow
coef = st.floats(-0.8, 0.8, allow_nan=False).map(lambda x: 0.0 if abs(x) < 1e-100 else x)
cplx = st.builds(complex, coef, coef)


def test_paths():
    p = loop_around(1 + 1j, 0, 0.5)
    assert p.is_closed
    assert abs(p.start - (1 + 1j)) < 1e-15
    q = polyline(0, 1, 1 + 1j)
    r = q.reversed()
    assert r.start == q.end and r.end == q.start
    assert (segment(0, 1) + segment(1, 2)).end == 2


def test_path_near_pole_rejected():
    sys = LinearSystem(((0j, mat(0.1, 0, 0, -0.1)),), theta_inf=-0.2, labels=("0",))
    with pytest.raises(PoleProximity):
        transfer(sys, segment(-1, 1))


@settings(max_examples=20, deadline=None)
@given(cplx, cplx, cplx)
def test_euler_system_loop(a, b, c):
    # Y' = A/lam Y has Y = exp(A log lam); a loop multiplies by exp(2 pi i A)
    A = mat(a, b, c, -a)
    sys = LinearSystem(((0j, A),), theta_inf=0j, labels=("0",))
    t = transfer(sys, loop_around(1, 0, 0.5), tol=1e-12)
    assert np.max(np.abs(t - scipy.linalg.expm(2j * math.pi * A))) <= 1e-9
    seg = transfer(sys, segment(1, 2 + 1j), tol=1e-12)
    assert np.max(np.abs(seg - scipy.linalg.expm(A * cmath.log(2 + 1j)))) <= 1e-10


def _p6_system(seed=3):
    th = make_thetas(0.31 + 0.1j, 0.47 - 0.2j, 0.23 + 0.15j, 0.62 + 0.05j)
    st = state_with_sigma(0.4 + 0.1j, th, 0.2 + 0.1j, 0.3 - 0.2j)
    return st, assemble(st)


def test_infinity_frame_solves_system():
    _, sys = _p6_system()
    lam, h = 6 + 4j, 1e-4
    d = (infinity_frame(sys, lam + h) - infinity_frame(sys, lam - h)) / (2 * h)
    rhs = sys.coefficient(lam) @ infinity_frame(sys, lam)
    assert np.max(np.abs(d - rhs)) <= 1e-8 * np.max(np.abs(rhs))
    far = 1e6j
    normalized = infinity_frame(sys, far) @ np.diag(
        [far ** (sys.theta_inf / 2), far ** (-sys.theta_inf / 2)])
    assert np.max(np.abs(normalized - np.eye(2))) < 1e-5


def test_local_solution_solves_system():
    _, sys = _p6_system()
    for label in LABELS:
        lam = sys.position(label) + 0.05 * cmath.exp(0.7j)
        h = 1e-5
        d = (local_solution(sys, label, lam + h) - local_solution(sys, label, lam - h)) / (2 * h)
        rhs = sys.coefficient(lam) @ local_solution(sys, label, lam)
        assert np.max(np.abs(d - rhs)) <= 1e-6 * np.max(np.abs(rhs))


def test_connection_reproduces_loops():
    st, sys = _p6_system()
    mp, frame = monodromy_fuchsian(sys, default_base_p6(st.t), tol=1e-12)
    for label in LABELS:
        c = connection_matrix(sys, label, default_base_p6(st.t), frame, tol=1e-12)
        th = mp.thetas[label]
        e = np.diag([cmath.exp(1j * math.pi * th), cmath.exp(-1j * math.pi * th)])
        assert np.max(np.abs(np.linalg.solve(c, e @ c) - mp[label])) <= 1e-8 * max(1, np.max(np.abs(mp[label])))


def test_p6_point_relations():
    st, sys = _p6_system()
    mp = monodromy_point_p6(sys, tol=1e-12, thetas=st.thetas)
    res = validate(mp, tol=1e-8)
    assert res["pass"], res
    assert all(abs(det(m) - 1) < 1e-9 for m in mp.matrices.values())
    back = json.loads(mp.dumps())
    assert back["kind"] == "P6" and set(back["matrices"]) == {"0", "1", "t", "inf"}


def test_cyclic_violation_raised():
    _, sys = _p6_system()
    with pytest.raises(CyclicViolation):
        monodromy_point_p6(sys, tol=1e-4, cyclic_tol=1e-14)


def test_closure_relative_to_matrix_size():
    # states with uniformly drawn u: closure is limited by rounding at |M|^2 eps
    rng = np.random.default_rng(9)
    th = make_thetas(0.31 + 0.1j, 0.47 - 0.2j, 0.23 + 0.15j, 0.62 + 0.05j)
    for _ in range(4):
        st = random_state(rng, th, complex(rng.uniform(0.2, 0.7), rng.uniform(-0.3, 0.3)), 0.3)
        mp = monodromy_point_p6(assemble(st), tol=1e-12, thetas=st.thetas, cyclic_tol=np.inf)
        big = max(float(np.max(np.abs(m))) for m in mp.matrices.values())
        assert mp.residuals["cyclic"] <= 1e-11 * max(1.0, big) ** 2
