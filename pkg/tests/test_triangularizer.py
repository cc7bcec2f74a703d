import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isolab.errors import ConfigError, DegenerateSpectrum, UnsolvablePair
from isolab.linalg import c_to_json, mat, mat_to_json
from isolab.triangularizer import (
    PairProblem,
    classify,
    constructed_pair,
    f_product_forms,
    random_pair,
    solve,
    solve_jsonl,
    verify,
)

seeds = st.integers(0, 2 ** 32 - 1)


@settings(max_examples=200)
@given(seeds)
def test_random_pairs_triangularize(seed):
    p = random_pair(np.random.default_rng(seed))
    case = classify(p)
    assert case == "generic"
    sol = solve(p, case=case)
    res = verify(p, sol)
    assert res["max"] <= 1e-10 * p.scale
    k2 = sol.K_other
    assert np.max(np.abs(k2 @ p.M0 @ np.linalg.inv(k2) - sol.K @ p.M0 @ np.linalg.inv(sol.K))) < 1e-9 * p.scale


@settings(max_examples=100)
@given(seeds)
def test_f_product_forms_agree(seed):
    p = random_pair(np.random.default_rng(seed))
    forms = f_product_forms(p.M0, p.M1, p.r0, p.r1)
    for f in forms[1:]:
        assert f == pytest.approx(forms[0], abs=1e-10 * p.scale)


@settings(max_examples=50)
@given(seeds, st.complex_numbers(min_magnitude=0.2, max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_free_corner(seed, f):
    p = random_pair(np.random.default_rng(seed))
    sol = solve(p, f_choice=f)
    assert sol.f1 == pytest.approx(f)
    assert verify(p, sol)["max"] <= 1e-9 * p.scale * max(1, abs(f), 1 / abs(f))


@pytest.mark.parametrize("kind", ["commuting", "f1-zero", "f0-zero", "p-zero", "unsolvable"])
def test_constructed_kinds(kind):
    rng = np.random.default_rng(11)
    hits = 0
    for _ in range(40):
        p = constructed_pair(rng, kind)
        case = classify(p)
        if case != kind:
            continue
        hits += 1
        if kind == "unsolvable":
            with pytest.raises(UnsolvablePair):
                solve(p, case=case)
            continue
        sol = solve(p, case=case)
        assert verify(p, sol)["max"] <= 1e-9 * p.scale
        if kind == "f1-zero":
            assert sol.f1 == 0
        if kind == "f0-zero":
            assert sol.f0 == 0
    assert hits >= 35


def test_problem_validation():
    with pytest.raises(ConfigError):
        PairProblem(mat(2, 0, 0, 1), np.eye(2))
    with pytest.raises(DegenerateSpectrum):
        PairProblem(np.eye(2), mat(2, 0, 0, 0.5))
    with pytest.raises(ConfigError):
        PairProblem(mat(2, 0, 0, 0.5), mat(3, 0, 0, 1 / 3), r0=3)


def test_solve_jsonl():
    p = random_pair(np.random.default_rng(5))
    good = json.dumps({"M0": mat_to_json(p.M0), "M1": mat_to_json(p.M1), "f": c_to_json(2.0)})
    bad = json.dumps({"M0": mat_to_json(2 * p.M0), "M1": mat_to_json(p.M1)})
    out = [json.loads(x) for x in solve_jsonl([good, "", bad, "{not json"])]
    assert len(out) == 3
    assert out[0]["case"] == "generic" and out[0]["residuals"]["max"] < 1e-10
    assert out[1]["error"] == "ConfigError"
    assert out[2]["error"] == "JSONDecodeError"
