import numpy as np
import pytest
from hypothesis import given, strategies as st

from kahlerenv.errors import NonFiniteSample, NotHermitian
from kahlerenv.geometry import fs_potential_field
from kahlerenv.hermitian import (HermitianForm, ScalarField, complex_hessian, constant_field,
                                 default_step, is_positive_definite, leading_minors_positive,
                                 relative_deviation)
from kahlerenv.projective import ChartPoint, ProjectivePoint, TupleShape


def chart(*w):
    return ChartPoint(0, np.array(w, dtype=complex))


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return a + a.conj().T


# -- HermitianForm ----------------------------------------------------------------

def test_form_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        HermitianForm([[1, 2], [3, 4]])
    with pytest.raises(NotHermitian):
        HermitianForm(np.ones((2, 3)))


def test_form_accepts_rounding_level_asymmetry():
    a = np.array([[1, 1 + 1e-13], [1, 1]], dtype=complex)
    HermitianForm(a)


def test_form_algebra_and_json(rng):
    a = HermitianForm(random_hermitian(rng, 3))
    b = HermitianForm(np.eye(3))
    np.testing.assert_allclose((a + b - b).entries, a.entries)
    np.testing.assert_allclose((2 * a).entries, 2 * a.entries)
    np.testing.assert_allclose(HermitianForm.from_json(a.to_json()).entries, a.entries)
    assert relative_deviation(a, a) == 0


def test_form_is_read_only():
    h = HermitianForm(np.eye(2))
    with pytest.raises(ValueError):
        h.entries[0, 0] = 3


# -- complex_hessian ----------------------------------------------------------------

def test_hessian_modulus_squared():
    f = ScalarField(lambda w: np.abs(w[..., 0]) ** 2, 1, homogeneous=False)
    for w in [0, 1 + 1j, -2.5]:
        np.testing.assert_allclose(complex_hessian(f, chart(w)).entries, [[1]], atol=1e-8)


def test_hessian_pluriharmonic():
    f = ScalarField(lambda w: (w[..., 0] ** 2).real, 1, homogeneous=False)
    np.testing.assert_allclose(complex_hessian(f, chart(0.3 - 0.2j)).entries, [[0]], atol=1e-7)


def test_hessian_fs_potential_origin():
    h = complex_hessian(fs_potential_field(1, 2.0), chart(0))
    np.testing.assert_allclose(h.entries, [[2]], atol=1e-6)


@given(st.integers(0, 2 ** 31), st.integers(1, 3))
def test_hessian_quadratic_form_exact(seed, d):
    rng = np.random.default_rng(seed)
    A = random_hermitian(rng, d)
    f = ScalarField(lambda w: np.einsum("...l,lm,...m->...", w, A, w.conj()).real, d,
                    homogeneous=False)
    p = ChartPoint(0, rng.normal(size=d) + 1j * rng.normal(size=d))
    np.testing.assert_allclose(complex_hessian(f, p, step=1e-3).entries, A, atol=1e-8)


@given(st.integers(0, 2 ** 31))
def test_hessian_pluriharmonic_random(seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=3) + 1j * rng.normal(size=3)
    f = ScalarField(lambda w: (c[0] * w[..., 0] * w[..., 1] + c[1] * w[..., 1] ** 3
                               + c[2] * w[..., 0]).real, 2, homogeneous=False)
    p = ChartPoint(0, rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2))
    np.testing.assert_allclose(complex_hessian(f, p).entries, 0, atol=1e-7)


def test_hessian_is_exactly_hermitian(rng):
    f = fs_potential_field(3, 4.0)
    h = complex_hessian(f, ChartPoint(0, rng.normal(size=3) + 1j * rng.normal(size=3)))
    np.testing.assert_array_equal(h.entries, h.entries.conj().T)


def test_hessian_richardson_improves():
    f = fs_potential_field(2, 3.0)
    p = chart(2.0 + 1j, -1.5)
    from kahlerenv.geometry import fs_metric
    exact = fs_metric(p, 3.0)
    plain = relative_deviation(complex_hessian(f, p, step=1e-2), exact)
    rich = relative_deviation(complex_hessian(f, p, step=1e-2, richardson=True), exact)
    assert rich < plain / 10


def test_hessian_non_finite_sample():
    f = ScalarField(lambda w: np.log(np.abs(w[..., 0])), 1, homogeneous=False)
    with pytest.raises(NonFiniteSample):
        complex_hessian(f, chart(0))


def test_default_step_scales():
    assert default_step(np.zeros(2)) == pytest.approx(1e-4)
    assert default_step(np.array([3.0, -9.0])) == pytest.approx(1e-3)


def test_field_evaluation_paths():
    f = ScalarField(lambda z: np.abs(z[..., 1]) ** 2 / np.sum(np.abs(z) ** 2, axis=-1), 1)
    p = ProjectivePoint([2, 2])
    assert f(p) == pytest.approx(0.5)
    assert f(ChartPoint(0, [1.0])) == pytest.approx(0.5)
    assert f.on_moduli(np.array([[1.0]]))[0] == pytest.approx(0.5)
    assert (-f)(p) == pytest.approx(-0.5)
    assert f.shifted(1.0)(p) == pytest.approx(1.5)
    assert constant_field(2.0, 1)(p) == 2.0


def test_field_determinism(rng):
    f = fs_potential_field(3, 4.0)
    w = rng.normal(size=(5, 3)) + 0j
    assert np.array_equal(f.on_chart(w), f.on_chart(w))


def test_chart_field_on_other_chart():
    f = fs_potential_field(1, 1.0)  # ln(1 + |z1/z0|^2)
    # point [2, 1] in chart 1 has affine coordinate 2; in chart 0 it is 1/2
    assert f.on_chart(np.array([2.0]), 1) == pytest.approx(np.log(1.25))


# -- positive definiteness ------------------------------------------------------------

def test_identity_positive():
    assert is_positive_definite(HermitianForm(np.eye(3)), tol=0)


def test_indefinite():
    assert not is_positive_definite(HermitianForm(np.diag([1.0, -1.0])))


def test_pd_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        is_positive_definite(np.array([[1, 1], [0, 1]]))


@given(st.integers(0, 2 ** 31))
def test_pd_matches_sylvester(seed):
    rng = np.random.default_rng(seed)
    h = HermitianForm(random_hermitian(rng, 3) + rng.uniform(-2, 6) * np.eye(3))
    lam = h.eigvalsh()
    if abs(lam[0]) > 1e-6 * (1 + abs(h.trace())):  # skip near-singular draws
        assert is_positive_definite(h) == leading_minors_positive(h)


def test_fs_metric_positive_at_random_points(rng):
    from kahlerenv.geometry import fs_metric
    shape = TupleShape(2, 2)
    for _ in range(50):
        p = ChartPoint(0, rng.normal(size=3) * 2 + 1j * rng.normal(size=3), shape)
        assert is_positive_definite(fs_metric(p, 4.0))
