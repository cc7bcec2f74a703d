import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isolab.errors import DegenerateSpectrum, SingularMatrix
from isolab.linalg import (
    I2,
    SIGMA3,
    c_from_csv,
    c_from_json,
    c_to_csv,
    c_to_json,
    commutator,
    det,
    diag_power,
    eig2,
    exp_sigma3,
    inv,
    mat,
    mat_from_json,
    mat_ops,
    mat_to_json,
    trace,
    unimodularize,
)

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)
matrices = st.builds(mat, cplx, cplx, cplx, cplx)


@given(matrices)
def test_det_trace_match_numpy(m):
    assert det(m) == pytest.approx(np.linalg.det(m), abs=1e-10)
    assert trace(m) == pytest.approx(np.trace(m), abs=1e-12)


@given(matrices)
def test_inverse(m):
    if abs(det(m)) < 1e-3:
        with pytest.raises(SingularMatrix) if abs(det(m)) < 1e-14 else _nullcontext():
            inv(m)
        return
    assert np.max(np.abs(inv(m) @ m - I2)) <= 1e-9 * max(1.0, np.max(np.abs(m))) ** 2 / abs(det(m))


class _nullcontext:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


@given(matrices, matrices)
def test_mat_ops_bundle(a, b):
    if abs(det(a)) < 1e-3:
        return
    ops = mat_ops(a, b)
    assert np.allclose(ops.product, a @ b)
    assert np.allclose(ops.reverse_product, b @ a)
    assert np.allclose(ops.commutator, commutator(a, b))
    assert trace(ops.commutator) == pytest.approx(0, abs=1e-9)


@given(matrices)
def test_eig2_pairs(m):
    try:
        ep = eig2(m, det_normalize=True)
    except DegenerateSpectrum:
        return
    scale = max(1.0, float(np.max(np.abs(m))))
    sep = abs(ep.values[0] - ep.values[1])
    assert ep.residual(m) <= 1e-8 * scale * max(1.0, scale / sep)
    assert det(ep.vectors) == pytest.approx(1, abs=1e-8 * max(1.0, 1 / sep))


def test_eig2_order_and_first():
    m = mat(3, 1, 0, 1 / 3)
    assert eig2(m).values[0] == pytest.approx(3)
    assert eig2(m, first=1 / 3).values[0] == pytest.approx(1 / 3)


def test_eig2_degenerate():
    with pytest.raises(DegenerateSpectrum):
        eig2(I2)


@given(cplx, st.floats(-2, 2))
def test_diag_power_is_exponential(base, e):
    if abs(base) < 1e-3:
        return
    assert np.allclose(diag_power(base, e) @ diag_power(base, -e), I2)
    assert np.allclose(exp_sigma3(1j * np.pi * e), diag_power(-1, e))


def test_unimodularize():
    m = mat(2, 1, 1, 3)
    assert det(unimodularize(m)) == pytest.approx(1)
    with pytest.raises(SingularMatrix):
        unimodularize(mat(1, 1, 1, 1))


@given(cplx)
def test_complex_serialization_roundtrip(z):
    assert c_from_json(c_to_json(z)) == z
    assert c_from_csv(c_to_csv(z)) == z


@settings(max_examples=30)
@given(matrices)
def test_matrix_json_roundtrip(m):
    assert np.array_equal(mat_from_json(mat_to_json(m)), m)


def test_sigma3():
    assert np.array_equal(SIGMA3 @ SIGMA3, I2)
