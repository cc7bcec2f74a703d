import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isolab.errors import ConstraintViolation, IndeterminateY, SingularTime
from isolab.fuchsian import monodromy_point_p6
from isolab.linalg import trace
from isolab.painleve6 import (
    LABELS,
    TRAJECTORY_COLUMNS,
    assemble,
    constraint_residuals,
    first_integrals,
    invert_positions,
    make_thetas,
    p6_residual,
    random_state,
    reflect_infinity,
    schlesinger_flow,
    sigma6,
    sigma6_prime,
    state_from_residues,
    state_with_sigma,
    tau6_sigma6,
    trajectory_csv,
    y6_forms,
    y6_of,
)

TH = make_thetas(0.31 + 0.1j, 0.47 - 0.2j, 0.23 + 0.15j, 0.62 + 0.05j)


def sigma_state(t=0.4, sigma=0.2 + 0.1j, x=0.3 - 0.2j):
    return state_with_sigma(t, TH, sigma, x)


@settings(max_examples=40)
@given(st.integers(0, 2 ** 32 - 1))
def test_random_state_constraints(seed):
    s = random_state(np.random.default_rng(seed), TH, 0.4 + 0.1j, 0.5)
    scale = 1 + max(abs(v) for v in s.z.values())
    assert max(constraint_residuals(s).values()) <= 1e-10 * scale
    assert max(first_integrals(s).values()) <= 1e-9 * scale ** 2
    sys = assemble(s)
    assert sys.check()["sum"] <= 1e-9 * scale


def test_assemble_rejects_off_manifold():
    s = sigma_state()
    bad = s.__class__(s.t, {**s.z, "0": s.z["0"] + 0.1}, s.u, s.thetas)
    with pytest.raises(ConstraintViolation):
        assemble(bad)


def test_residue_roundtrip():
    s = sigma_state()
    back = state_from_residues(s.t, s.residues(), s.thetas)
    for k in LABELS:
        assert back.z[k] == pytest.approx(s.z[k], abs=1e-13)
        assert back.u[k] == pytest.approx(s.u[k], rel=1e-12)


def test_flow_there_and_back():
    s = sigma_state()
    there = schlesinger_flow(s, 0.6 + 0.1j, tol=1e-12)
    back = schlesinger_flow(there, s.t, tol=1e-12)
    assert max(abs(back.z[k] - s.z[k]) for k in LABELS) < 1e-9
    assert max(first_integrals(there).values()) < 1e-9


def test_flow_refuses_singular_times():
    with pytest.raises(SingularTime):
        schlesinger_flow(sigma_state(), 1.5)
    with pytest.raises(SingularTime):
        schlesinger_flow(sigma_state(0.4), -0.2)


def test_y6_forms_agree_and_solve_p6():
    s = sigma_state()
    f = y6_forms(s)
    assert abs(f[0] - f[1]) < 1e-10 and abs(f[0] - f[2]) < 1e-10
    assert p6_residual(s) < 1e-6


def test_y6_indeterminate():
    s = sigma_state()
    z = dict(s.z)
    u = dict(s.u)
    z["0"] = 0j
    with pytest.raises(IndeterminateY):
        y6_of(s.__class__(s.t, z, u, s.thetas))


def test_sigma6_derivative():
    s = sigma_state()
    grid = [0.4 + 0.01 * k for k in range(1, 9)]
    states = [s] + schlesinger_flow(s, grid[-1], 1e-12, samples=grid)
    out = tau6_sigma6(states, tol=1e-7)
    j = 4
    assert out.sigma_prime_fd[j] == pytest.approx(out.sigma_prime[j], abs=1e-7)
    assert out.sigma[0] == pytest.approx(sigma6(s))
    assert out.sigma_prime[0] == pytest.approx(sigma6_prime(s))


def test_state_with_sigma_exponents():
    sigma = 0.23 + 0.07j
    r = sigma_state(sigma=sigma).residues()
    ev = np.sort_complex(np.linalg.eigvals(r["0"] + r["t"]))
    assert ev == pytest.approx(np.sort_complex(np.array([-sigma / 2, sigma / 2])), abs=1e-13)


def test_state_with_sigma_trace_limit():
    sigma = 0.23 + 0.07j
    target = 2 * np.cos(np.pi * sigma)
    gaps = []
    for t in (0.05, 0.005):
        s = sigma_state(t=t, sigma=sigma)
        mp = monodromy_point_p6(assemble(s), tol=1e-12, thetas=s.thetas)
        tr = trace(mp["0"] @ mp["t"])
        assert tr == pytest.approx(trace(mp["inf"] @ mp["1"]), abs=1e-9)
        gaps.append(abs(tr - target))
    assert gaps[1] < gaps[0] / 5 and gaps[1] < 0.02


def test_reflection_is_involution():
    s = sigma_state()
    r = reflect_infinity(s)
    assert max(first_integrals(r).values()) < 1e-10
    assert max(constraint_residuals(r).values()) < 1e-10
    rr = reflect_infinity(r)
    for k in LABELS:
        assert rr.z[k] == pytest.approx(s.z[k], abs=1e-12)
        assert rr.u[k] == pytest.approx(s.u[k], rel=1e-12)


def test_invert_positions():
    s = sigma_state()
    v = invert_positions(s)
    assert v.thetas["0"] == s.thetas["inf"] and v.thetas["inf"] == s.thetas["0"]
    assert max(first_integrals(v).values()) < 1e-10
    vv = invert_positions(v)
    for k in LABELS:
        assert vv.z[k] == pytest.approx(s.z[k], abs=1e-11)


def test_trajectory_csv():
    s = sigma_state()
    states = schlesinger_flow(s, 0.5, 1e-10, samples=[0.42, 0.46, 0.5])
    rows = list(csv.reader(io.StringIO(trajectory_csv(states))))
    assert rows[0] == list(TRAJECTORY_COLUMNS)
    assert len(rows) == 4
    assert complex(float(rows[1][0]), float(rows[1][1])) == states[0].t
