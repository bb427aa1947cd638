import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_coords
from kahlerenv.errors import (AllZero, ChartUndefined, CrossTupleSwap, IncidenceError,
                              InvalidCount, InvalidGenerator, ShapeError, ShapeMismatch,
                              ZeroTuple, EvaluationFailed)
from kahlerenv.hermitian import ScalarField, constant_field
from kahlerenv.envelope import psi_field
from kahlerenv.projective import (ChartPoint, Gamma, MPoint, ProjectivePoint, Sigma, Tau,
                                  TupleShape, apply_generator, apply_generator_M, apply_word,
                                  check_invariance, lift_to_M, make_point, moduli_point,
                                  orbit_sample, projectively_equal, random_chart_points,
                                  to_chart)


# -- TupleShape --------------------------------------------------------------------

@pytest.mark.parametrize("n,k,m", [(2, 2, 3), (1, 3, 2), (3, 2, 5), (1, 2, 1)])
def test_shape_dimension(n, k, m):
    assert TupleShape(n, k).m == m


@pytest.mark.parametrize("n,k", [(0, 2), (2, 1), (2, 0)])
def test_shape_rejects_degenerate(n, k):
    with pytest.raises(ShapeError):
        TupleShape(n, k)


def test_shape_json_roundtrip():
    s = TupleShape(3, 4)
    assert TupleShape.from_json(s.to_json()) == s


# -- make_point / to_chart -----------------------------------------------------------

def test_make_point_normalizes_scale(shape22):
    np.testing.assert_array_equal(make_point([2, 0, 0, 0], shape22).coords, [1, 0, 0, 0])


def test_make_point_keeps_normalized(shape22):
    np.testing.assert_array_equal(make_point([1, 1, 1, 1], shape22).coords, [1, 1, 1, 1])


def test_make_point_all_zero(shape22):
    with pytest.raises(AllZero):
        make_point([0, 0, 0, 0], shape22)


def test_make_point_wrong_length(shape22):
    with pytest.raises(ShapeMismatch):
        make_point([1, 2, 3], shape22)


def test_canonical_largest_modulus_is_one(shape22, rng):
    for _ in range(20):
        p = make_point(rng.normal(size=4) + 1j * rng.normal(size=4), shape22)
        assert np.max(np.abs(p.coords)) == pytest.approx(1.0, abs=1e-15)
        assert 1.0 + 0j in p.coords


def test_coords_read_only(shape22):
    p = make_point([1, 2, 3, 4], shape22)
    with pytest.raises(ValueError):
        p.coords[0] = 5


def test_to_chart_values(shape22):
    c = to_chart(make_point([1, 2, 3, 4], shape22), 0)
    np.testing.assert_allclose(c.affine, [2, 3, 4])


def test_to_chart_other_index():
    c = to_chart(ProjectivePoint([2, 4]), 1)
    np.testing.assert_allclose(c.affine, [0.5])


def test_to_chart_undefined(shape22):
    with pytest.raises(ChartUndefined):
        to_chart(make_point([0, 1, 1, 1], shape22), 0)


@given(st.integers(0, 3), st.integers(0, 2 ** 31))
def test_chart_roundtrip(chart, seed):
    shape = TupleShape(2, 2)
    p = make_point(random_coords(np.random.default_rng(seed), 4), shape)
    assert projectively_equal(to_chart(p, chart).to_point(), p)


def test_projective_equality_up_to_phase(shape22, rng):
    z = random_coords(rng, 4)
    assert projectively_equal(make_point(z, shape22), make_point(z * np.exp(0.7j) * 3, shape22))
    assert not projectively_equal(make_point(z, shape22), make_point(z + [0, 0.1, 0, 0], shape22))


def test_point_json_roundtrip(shape22, rng):
    p = make_point(random_coords(rng, 4), shape22)
    q = ProjectivePoint.from_json(p.to_json())
    np.testing.assert_array_equal(p.coords, q.coords)
    assert q.shape == shape22


def test_chart_point_checks(shape22):
    with pytest.raises(ShapeMismatch):
        ChartPoint(0, [1, 2], shape22)
    with pytest.raises(ValueError):
        ChartPoint(0, [np.inf, 0, 0], shape22)


# -- generators ---------------------------------------------------------------------

def test_sigma_swaps_tuples(shape22):
    q = apply_generator(make_point([1, 2, 3, 4], shape22), Sigma(0, 1))
    assert projectively_equal(q, make_point([3, 4, 1, 2], shape22))


def test_tau_phase(shape22):
    q = apply_generator(make_point([1, 1, 1, 1], shape22), Tau(1, math.pi))
    np.testing.assert_allclose(q.coords, [1, -1, 1, 1], atol=1e-15)


def test_gamma_cross_tuple(shape22):
    with pytest.raises(CrossTupleSwap):
        apply_generator(make_point([1, 2, 3, 4], shape22), Gamma(0, 3))


def test_gamma_within_tuple(shape22):
    q = apply_generator(make_point([1, 2, 3, 4], shape22), Gamma(2, 3))
    assert projectively_equal(q, make_point([1, 2, 4, 3], shape22))


@pytest.mark.parametrize("gen", [Sigma(0, 0), Sigma(0, 2), Tau(4, 0.1), Gamma(1, 1), Gamma(0, 9)])
def test_invalid_generators(shape22, gen):
    with pytest.raises(InvalidGenerator):
        apply_generator(make_point([1, 2, 3, 4], shape22), gen)


@given(st.integers(0, 2 ** 31), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_group_relations(seed, t1, t2):
    shape = TupleShape(2, 3)
    p = make_point(random_coords(np.random.default_rng(seed), shape.m + 1), shape)
    assert projectively_equal(apply_word(p, [Sigma(0, 2), Sigma(0, 2)]), p)
    assert projectively_equal(apply_word(p, [Gamma(2, 3), Gamma(2, 3)]), p)
    assert projectively_equal(apply_word(p, [Tau(3, t1), Tau(3, t2)]),
                              apply_generator(p, Tau(3, t1 + t2)))


def test_generators_commute_with_normalization(shape22, rng):
    z = random_coords(rng, 4) * 5
    for gen in [Sigma(0, 1), Tau(2, 1.3), Gamma(0, 1)]:
        direct = make_point(gen.act(z, shape22), shape22)
        assert projectively_equal(apply_generator(make_point(z, shape22), gen), direct)


# -- orbits and invariance ---------------------------------------------------------------

def test_orbit_sample_deterministic(shape22, rng):
    p = make_point(random_coords(rng, 4), shape22)
    a, b = orbit_sample(p, 10, 3), orbit_sample(p, 10, 3)
    assert all(np.array_equal(x.coords, y.coords) for x, y in zip(a, b))
    assert len(orbit_sample(p, 1, 0)) == 1


def test_orbit_sample_count_zero(shape22):
    with pytest.raises(InvalidCount):
        orbit_sample(make_point([1, 1, 1, 1], shape22), 0, 0)


def test_orbit_of_ones_under_sign_words(shape22):
    # brute force over words of length <= 3 with theta in {0, pi}
    p = make_point([1, 1, 1, 1], shape22)
    gens = [Sigma(0, 1), Gamma(0, 1), Gamma(2, 3)] + [Tau(i, t) for i in range(4)
                                                     for t in (0.0, math.pi)]
    for length in range(1, 4):
        for word in np.ndindex(*([len(gens)] * length)):
            q = apply_word(p, [gens[i] for i in word])
            np.testing.assert_allclose(np.abs(q.coords), 1.0, atol=1e-15)


def test_psi_invariant(shape22, rng):
    f = psi_field(3, 4.0)
    p = make_point(random_coords(rng, 4), shape22)
    assert check_invariance(f, p, 50, 1) < 1e-12


def test_real_part_not_invariant(shape22):
    f = ScalarField(lambda w: w[..., 0].real, 3, homogeneous=False)
    p = make_point([1, 0.5, 0.5, 0.5], shape22)
    assert check_invariance(f, p, 50, 2) > 0.1


def test_constant_field_invariant(shape22):
    assert check_invariance(constant_field(3.0, 3), make_point([1, 2, 3, 4], shape22), 10, 0) == 0


def test_invariance_wraps_errors(shape22):
    def bad(z):
        raise RuntimeError("boom")
    with pytest.raises(EvaluationFailed):
        check_invariance(ScalarField(bad, 3), make_point([1, 2, 3, 4], shape22), 3, 0)


def test_invariance_equal_infinities(shape22):
    f = psi_field(3, 4.0)
    p = make_point([1, 0, 1, 1], shape22)
    assert check_invariance(f, p, 20, 0) == 0.0


# -- incidence manifold ---------------------------------------------------------------

def test_lift_to_M(shape22):
    q = lift_to_M(make_point([1, 2, 3, 4], shape22))
    assert projectively_equal(q.factors[0], ProjectivePoint([1, 2], q.factors[0].shape))
    assert projectively_equal(q.factors[1], ProjectivePoint([3, 4], q.factors[1].shape))
    MPoint(q.base, q.factors, incidence_tol=0.0)


def test_lift_zero_tuple(shape22):
    with pytest.raises(ZeroTuple):
        lift_to_M(make_point([1, 1, 0, 0], shape22))


def test_mpoint_incidence_violation(shape22):
    base = make_point([1, 2, 3, 4], shape22)
    fs = lift_to_M(base).factors[0].shape
    with pytest.raises(IncidenceError):
        MPoint(base, (ProjectivePoint([1, 2], fs), ProjectivePoint([1, 1], fs)))


def test_mpoint_json(shape22, rng):
    q = lift_to_M(make_point(random_coords(rng, 4), shape22))
    r = MPoint.from_json(q.to_json())
    assert projectively_equal(r.base, q.base)


@given(st.integers(0, 2 ** 31))
def test_lift_satisfies_incidence(seed):
    shape = TupleShape(3, 2)
    p = make_point(random_coords(np.random.default_rng(seed), shape.m + 1), shape)
    MPoint(p, lift_to_M(p).factors, incidence_tol=1e-13)


def test_group_action_on_M(shape22):
    q = lift_to_M(make_point([1, 2, 3, 4], shape22))
    r = apply_generator_M(q, Sigma(0, 1))
    assert projectively_equal(r.factors[0], q.factors[1])


def test_n1_shape_lift():
    shape = TupleShape(1, 3)
    q = lift_to_M(make_point([1, 2, 3], shape))
    assert len(q.factors) == 3 and all(f.coords.size == 1 for f in q.factors)


def test_random_chart_points_range(shape22):
    pts = random_chart_points(shape22, 30, 5)
    r = np.abs(np.array([p.affine for p in pts]))
    assert r.min() >= 0.5 and r.max() <= 2.0


def test_moduli_point():
    p = moduli_point([0.5, 0.2, 1.0], TupleShape(2, 2))
    np.testing.assert_allclose(p.coords, [1, 0.5, 0.2, 1.0])
