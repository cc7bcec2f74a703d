import cmath
import json

import numpy as np
import pytest

from isolab.fuchsian import monodromy_point_p6
from isolab.linalg import trace
from isolab.painleve6 import LABELS, assemble, constraint_residuals, first_integrals, make_thetas, state_with_sigma
from isolab.schlesinger import (
    ElementaryStep,
    apply_step,
    build_ladder,
    dressed_coefficient,
    epsilon_n,
    evaluation_index,
    j_projectors,
    monodromy_signs,
    transformed_residues,
)

TH = make_thetas(0.31, 0.47, 0.29, -0.93)
STEPS = [
    ElementaryStep("0", "t", (1, -1)),
    ElementaryStep("1", "t", (-1, -1)),
    ElementaryStep("0", "1", (1, 1)),
    ElementaryStep("1", "inf", (-1, 1)),
    ElementaryStep("t", "inf", (1, -1)),
]


def base(t=0.3 + 0.1j):
    return state_with_sigma(t, TH, 0.3, 0.2 + 0.3j)


def test_step_validation():
    with pytest.raises(ValueError):
        ElementaryStep("0", "0")
    with pytest.raises(ValueError):
        ElementaryStep("inf", "0")
    with pytest.raises(ValueError):
        ElementaryStep("0", "1", (2, 1))
    s = ElementaryStep("1", "inf", (-1, 1))
    assert s.name == "L-+[1,inf]"
    assert s.inverse().signs == (1, -1)
    assert s.shifts == {"1": -1, "inf": 1}


def test_projectors_complement():
    j1, j2, _ = j_projectors(base(), STEPS[0])
    assert np.allclose(j1 + j2, np.eye(2), atol=1e-14)
    assert np.allclose(j1 @ j1, j1, atol=1e-12)
    assert np.allclose(j1 @ j2, 0, atol=1e-12)


@pytest.mark.parametrize("step", STEPS, ids=lambda s: s.name)
def test_step_shifts_exponents(step):
    s = base()
    new = apply_step(s, step)
    for k, v in step.shifts.items():
        assert new.thetas[k] == s.thetas[k] + v
    assert max(constraint_residuals(new).values()) < 1e-10
    assert max(first_integrals(new).values()) < 1e-9


@pytest.mark.parametrize("step", STEPS, ids=lambda s: s.name)
def test_inverse_step_restores_residues(step):
    s = base()
    back = apply_step(apply_step(s, step), step.inverse())
    for k in LABELS:
        assert np.max(np.abs(back.residue(k) - s.residue(k))) < 1e-9


@pytest.mark.parametrize("step", STEPS, ids=lambda s: s.name)
def test_residues_match_contour_integrals(step):
    s = base()
    new = transformed_residues(s, step)
    pos = {"0": 0j, "1": 1 + 0j, "t": s.t}
    n = 256
    for k in LABELS:
        r = 0.05
        acc = np.zeros((2, 2), complex)
        for j in range(n):
            w = cmath.exp(2j * cmath.pi * (j + 0.5) / n)
            acc += dressed_coefficient(s, step, pos[k] + r * w) * r * w / n
        assert np.max(np.abs(acc - new[k])) < 1e-9


@pytest.mark.parametrize("step", STEPS, ids=lambda s: s.name)
def test_monodromy_kept_up_to_sign(step):
    s = base()
    new = apply_step(s, step)
    m = monodromy_point_p6(assemble(s), tol=1e-12, thetas=s.thetas)
    w = monodromy_point_p6(assemble(new), tol=1e-12, thetas=new.thetas)
    sg = monodromy_signs(step)
    labels = LABELS + ("inf",)
    for a in labels:
        assert trace(w[a]) == pytest.approx(sg[a] * trace(m[a]), abs=1e-8)
        for b in labels:
            if a < b:
                want = sg[a] * sg[b] * trace(m[a] @ m[b])
                assert trace(w[a] @ w[b]) == pytest.approx(want, abs=1e-7 * max(1, abs(want)))


def test_epsilon_and_index():
    assert epsilon_n(0.29, 3) == pytest.approx(1 / (6 - 0.29))
    assert [evaluation_index(k) for k in range(6)] == [1, 1, 1, 1, 2, 2]


def test_small_ladder():
    lad = build_ladder(base(0.05), "first-limit", 3, 1.2, tol=1e-11)
    assert [lv.level for lv in lad.levels] == list(range(7))
    for lv in lad.levels[1:]:
        n = evaluation_index(lv.level)
        assert lv.t6 == pytest.approx(epsilon_n(lad.theta6, n) * 1.2)
        assert lv.state.thetas["1"] == pytest.approx(TH["1"] - lv.level)
        assert lv.state.thetas["inf"] == pytest.approx(TH["inf"] + lv.level)
        assert lv.diagnostics["first_integral_max"] < 1e-7
    assert [lv.level for lv in lad.even()] == [2, 4, 6]
    data = json.loads(lad.dumps())
    assert data["pattern"] == "first-limit" and len(data["levels"]) == 7
