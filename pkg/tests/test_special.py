import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from isolab.errors import NearSingularArgument, NonGenericParameters, ParameterPole, PoleOfGamma, SmallParameterRegime
from isolab.fuchsian import LinearSystem, loop_monodromy
from isolab.linalg import det
from isolab.special import (
    HyperParams,
    gamma_c,
    gamma_identities,
    gamma_ratio,
    hyp2f1,
    rgamma_c,
    y_asymptotic_form,
    y_bundle,
    y_matrix,
    y_residues,
)
from oracles import hyper_frame


def _dz(z):
    return abs(z - round(z.real))


small = st.floats(-1.9, 1.9, allow_nan=False)
params = st.builds(HyperParams, st.builds(complex, small, small), st.builds(complex, small, small),
                   st.builds(complex, small, small))


def _generic(p, gap=0.1):
    return min(_dz(p.theta0), _dz(p.theta1), _dz(p.theta_inf)) > gap


@given(st.floats(-8, 8), st.floats(-8, 8))
def test_gamma_against_mpmath(x, y):
    z = complex(x, y)
    assume(min(abs(z - n) for n in range(-9, 1)) > 1e-3)
    ref = complex(mp.gamma(mp.mpc(x, y)))
    assert abs(gamma_c(z) - ref) <= 1e-12 * abs(ref)


def test_gamma_poles():
    with pytest.raises(PoleOfGamma):
        gamma_c(-3)
    assert rgamma_c(-2) == 0
    assert gamma_ratio([1.5], [-1]) == 0


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_gamma_identities(x, y):
    z = complex(x, y)
    assume(_dz(z) > 1e-2)
    refl, ratio = gamma_identities(z + 30)
    assert abs(refl) < 1e-9
    assert abs(ratio) < 1e-2
    assert abs(gamma_identities(z)[0]) < 1e-10


@given(st.lists(st.builds(complex, st.floats(0.5, 60), st.floats(-40, 40)), min_size=1, max_size=3),
       st.lists(st.builds(complex, st.floats(0.5, 60), st.floats(-40, 40)), min_size=1, max_size=3))
def test_gamma_ratio_large_arguments(num, den):
    with mp.workdps(30):
        ref = mp.fprod(mp.gamma(mp.mpc(z)) for z in num) / mp.fprod(mp.gamma(mp.mpc(z)) for z in den)
    got = gamma_ratio(num, den)
    assert abs(got - complex(ref)) <= 1e-10 * abs(complex(ref))


@settings(max_examples=200, deadline=None)
@given(st.builds(complex, small, small), st.builds(complex, small, small),
       st.builds(complex, small, small), st.floats(0, 3), st.floats(-math.pi, math.pi))
def test_hyp2f1_against_mpmath(a, b, c, r, phi):
    x = r * cmath.exp(1j * phi)
    assume(_dz(c) > 0.05 and c.real > -0.5 or _dz(c) > 0.3)
    assume(abs(x - 1) > 0.05 and abs(x - cmath.exp(1j * math.pi / 3)) > 0.1
           and abs(x - cmath.exp(-1j * math.pi / 3)) > 0.1)
    assume(_dz(c - a - b) > 0.01 and _dz(a - b) > 0.01)
    assume(not (x.real > 1 and abs(x.imag) < 1e-9))
    ref = complex(mp.hyp2f1(a, b, c, x))
    assert abs(hyp2f1(a, b, c, x) - ref) <= 1e-9 * max(1.0, abs(ref))


def test_hyp2f1_errors():
    with pytest.raises(ParameterPole):
        hyp2f1(0.3, 0.2, -2, 0.1)
    with pytest.raises(NearSingularArgument):
        hyp2f1(0.3, 0.2, 0.7, 1 + 1e-10)


def test_residue_sum_rule():
    p = HyperParams(0.3 + 0.2j, -0.4 + 0.1j, 0.9 - 0.3j)
    a0, a1 = y_residues(p)
    assert np.allclose(a0 + a1, (p.beta - p.alpha) / 2 * np.diag([1, -1]))
    assert 2 * cmath.sqrt(-det(a0)) == pytest.approx(p.theta0) or 2 * cmath.sqrt(-det(a0)) == pytest.approx(-p.theta0)


@settings(max_examples=25, deadline=None)
@given(params, st.floats(1.3, 3), st.floats(0.2, 2.9))
def test_y_matrix_against_mpmath(p, r, phi):
    assume(_generic(p) and max(abs(p.alpha), abs(p.beta), abs(p.gamma)) < 2)
    x = r * cmath.exp(1j * phi)
    ref = np.array(mp.matrix(hyper_frame(p.alpha, p.beta, p.gamma, x, 20)).tolist(), dtype=complex)
    got = y_matrix(p, x)
    assert np.max(np.abs(got - ref)) <= 1e-9 * max(1.0, np.max(np.abs(ref)))


@settings(max_examples=25, deadline=None)
@given(params, st.floats(1.3, 3), st.floats(0.2, 2.9))
def test_y_matrix_solves_system(p, r, phi):
    assume(_generic(p))
    x = r * cmath.exp(1j * phi)
    a0, a1 = y_residues(p)
    h = 1e-4
    d = (y_matrix(p, x + h) - y_matrix(p, x - h)) / (2 * h)
    rhs = (a0 / x + a1 / (x - 1)) @ y_matrix(p, x)
    assert np.max(np.abs(d - rhs)) <= 1e-6 * max(1.0, np.max(np.abs(rhs)))
    assert det(y_matrix(p, x)) == pytest.approx(1, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(params)
def test_connection_determinants(p):
    assume(_generic(p))
    b = y_bundle(p)
    for nu, c in ((0, b.C0), (1, b.C1)):
        assert abs(det(c) - b.det_C(nu)) <= 1e-9 * max(1.0, abs(b.det_C(nu)), np.max(np.abs(c)) ** 2)
    # det Y = 1 ties det C0 to det G0
    assert b.det_C(0) * det(b.G0) == pytest.approx(
        cmath.exp(-1j * math.pi * (p.alpha + p.beta + 1 - p.gamma)))


@settings(max_examples=15, deadline=None)
@given(params)
def test_local_monodromy_double_precision_loops(p):
    # the double precision integrator carries ~1e-12 relative error
    assume(_generic(p))
    b = y_bundle(p)
    sys = LinearSystem(((0j, b.A0), (1 + 0j, b.A1)), theta_inf=p.theta_inf, labels=("0", "1"))
    for nu, base in (("0", -0.6 + 0.9j), ("1", 1.5 + 0.2j)):
        m = loop_monodromy(sys, y_matrix(p, base), base, nu, tol=1e-13)
        ref = b.local_monodromy(int(nu))
        assert np.max(np.abs(m - ref)) <= 1e-9 * max(1.0, np.max(np.abs(ref)))
        assert cmath.isclose(np.trace(m), 2 * cmath.cos(math.pi * (p.theta0 if nu == "0" else p.theta1)),
                             rel_tol=1e-8, abs_tol=1e-8)


def test_non_generic_rejected():
    with pytest.raises(NonGenericParameters):
        y_bundle(HyperParams(0.5, 0.5, 0.3))


def test_large_gamma_asymptotics():
    # inside the domain |1 - gamma| << |x|^2, |x| << |1 - gamma| the error shrinks
    errs = []
    for big in (1e4, 1e6, 1e8):
        p = HyperParams(0.3 + 0.1j, -0.2 + 0.05j, 1 - big + 0.3j)
        x = big ** 0.75 * cmath.exp(0.3j)
        exact = y_matrix(p, x)
        errs.append(np.max(np.abs(exact - y_asymptotic_form(p, x, 1))) / np.max(np.abs(exact)))
    assert errs[0] < 0.05
    assert errs[2] < errs[1] < errs[0]
    with pytest.raises(SmallParameterRegime):
        y_asymptotic_form(HyperParams(0.3, 0.2, 0.5), 2.0, 1)
