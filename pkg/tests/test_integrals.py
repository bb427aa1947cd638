import math

import numpy as np
import pytest
from scipy.integrate import quad

from kahlerenv.errors import AlphaOutOfRange, DomainError
from kahlerenv.hermitian import ScalarField, constant_field
from kahlerenv.integrals import (IntegralEstimate, dirichlet_oracle, divergence_sweep,
                                 graded_gauss_nodes, mc_tail_exponent, sweep_increments,
                                 tian_integrand, tian_mc_integral, tian_psi_integral, tian_psi_mc)


# -- integrand and oracle -------------------------------------------------------------

def test_integrand_values():
    assert tian_integrand([1.0], 0.0, 1) == pytest.approx(0.25)
    assert tian_integrand([1.0], 0.5, 1) == pytest.approx(0.5)


def test_integrand_symmetric(rng):
    x = rng.uniform(0.1, 3, 4)
    assert tian_integrand(x, 0.3) == pytest.approx(tian_integrand(x[::-1], 0.3), rel=1e-14)


def test_integrand_domain():
    with pytest.raises(DomainError):
        tian_integrand([1.0, 0.0], 0.5)
    with pytest.raises(DomainError):
        tian_integrand([1.0, 2.0], 0.5, m=3)


def test_oracle_values():
    assert dirichlet_oracle(0.5, 1) == pytest.approx(math.pi, rel=1e-14)
    assert dirichlet_oracle(0.5, 2) == pytest.approx(2 * math.pi, rel=1e-14)
    assert dirichlet_oracle(1e-9, 1) == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_oracle_against_brute_force(alpha):
    # independent adaptive quadrature of the m = 1 integrand, split at 1
    f = lambda x: (1 + x) ** ((alpha - 1) * 2) / x ** alpha  # noqa: E731
    val = quad(f, 0, 1, limit=200)[0] + quad(f, 1, np.inf, limit=200)[0]
    assert dirichlet_oracle(alpha, 1) == pytest.approx(val, rel=1e-8)


def test_oracle_volume_mass_alpha_zero_limit():
    val = quad(lambda x: (1 + x) ** -2, 0, np.inf)[0]
    assert dirichlet_oracle(1e-12, 1) == pytest.approx(val, rel=1e-9)


@pytest.mark.parametrize("alpha", [0.0, 1.0, 1.5, -0.2])
def test_alpha_out_of_range(alpha):
    with pytest.raises(AlphaOutOfRange):
        dirichlet_oracle(alpha, 1)
    with pytest.raises(AlphaOutOfRange):
        tian_psi_integral(alpha, 1)


# -- quadrature -------------------------------------------------------------------------

def test_graded_nodes_integrate_polynomials():
    t, w = graded_gauss_nodes()
    assert np.all((t > 0) & (t < 1))
    assert w.sum() == pytest.approx(1.0, rel=1e-14)
    assert np.dot(w, t ** 7) == pytest.approx(1 / 8, rel=1e-13)


def test_quadrature_pi():
    est = tian_psi_integral(0.5, 1)
    assert est.value == pytest.approx(math.pi, rel=1e-6)
    assert est.method == "tensor_quadrature"


@pytest.mark.parametrize("m", [1, 2])
@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_quadrature_oracle(m, alpha):
    est = tian_psi_integral(alpha, m)
    assert abs(est.value / dirichlet_oracle(alpha, m) - 1) < 1e-4


def test_quadrature_m3_pi_squared():
    est = tian_psi_integral(0.5, 3)
    assert est.value == pytest.approx(math.pi ** 2, rel=1e-3)


def test_quadrature_error_estimate_bounds_error():
    for m, alpha in [(1, 0.9), (2, 0.25), (2, 0.75), (2, 0.95), (3, 0.5), (3, 0.9)]:
        est = tian_psi_integral(alpha, m)
        assert abs(est.value - dirichlet_oracle(alpha, m)) <= est.abs_error_estimate


def test_quadrature_refused_above_m3():
    with pytest.raises(ValueError, match="monte_carlo"):
        tian_psi_integral(0.5, 4)


def test_monotone_in_alpha():
    vals = [tian_psi_integral(a, 2).value for a in (0.25, 0.5, 0.75)]
    assert vals[0] < vals[1] < vals[2]


# -- Monte Carlo ------------------------------------------------------------------------

def test_mc_m3_within_one_percent():
    est = tian_psi_integral(0.5, 3, method="monte_carlo", samples=1_000_000, seed=3)
    assert abs(est.value / math.pi ** 2 - 1) < 1e-2
    assert est.method == "monte_carlo" and est.seed == 3


def test_mc_deterministic():
    a, b = tian_psi_mc(0.5, 2, 100_000, 9), tian_psi_mc(0.5, 2, 100_000, 9)
    assert a.value == b.value and a.stderr == b.stderr
    assert tian_psi_mc(0.5, 2, 100_000, 10).value != a.value


def test_mc_threads_do_not_change_result(monkeypatch):
    ref = tian_psi_mc(0.6, 3, 200_000, 5)
    monkeypatch.setenv("KAHLERENV_THREADS", "4")
    assert tian_psi_mc(0.6, 3, 200_000, 5).value == ref.value


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_mc_stderr_is_honest(m):
    # z-scores over independent seeds stay moderate when the weight variance is finite
    o = dirichlet_oracle(0.5, m)
    z = [(tian_psi_mc(0.5, m, 200_000, s).value - o) / tian_psi_mc(0.5, m, 200_000, s).stderr
         for s in range(4)]
    assert max(abs(v) for v in z) < 4


def test_tail_exponent():
    assert mc_tail_exponent(1) == 1.0
    assert mc_tail_exponent(3) == 2.0
    assert all(m / mc_tail_exponent(m) < 2 for m in range(1, 12))


def test_mc_zero_field_volume_mass():
    est = tian_mc_integral(constant_field(0.0, 1), 0.5, 1, 200_000, 1)
    assert abs(est.value - 1.0) < 3 * est.stderr


def test_mc_psi_field_matches_oracle():
    from kahlerenv.envelope import psi_field
    est = tian_mc_integral(psi_field(2, 3.0), 0.5, 2, 200_000, 2)
    assert abs(est.value - dirichlet_oracle(0.5, 2)) < 4 * est.stderr


def test_mc_dimension_mismatch():
    with pytest.raises(ValueError):
        tian_mc_integral(constant_field(0.0, 2), 0.5, 3, 100, 0)


def test_mc_argument_checks():
    with pytest.raises(ValueError):
        tian_psi_mc(0.5, 1, 1, 0)
    with pytest.raises(ValueError):
        tian_psi_mc(0.5, 1, 100, -1)


def test_estimate_contract():
    with pytest.raises(ValueError):
        IntegralEstimate(1.0, -1.0, "tensor_quadrature", 10)
    with pytest.raises(ValueError):
        IntegralEstimate(1.0, 0.1, "monte_carlo", 10)
    d = tian_psi_mc(0.5, 1, 1000, 4).to_json()
    assert set(d) == {"value", "stderr", "method", "nodes_or_samples", "seed", "alpha", "m"}


# -- divergence --------------------------------------------------------------------------

def test_divergence_alpha_one():
    sweep = divergence_sweep(1.0, 1, [10, 100, 1000])
    vals = [v for _, v in sweep]
    # at alpha = 1, m = 1 the truncated integral is exactly 2 ln R
    np.testing.assert_allclose(vals, [2 * math.log(r) for r in (10, 100, 1000)], rtol=1e-12)
    inc = sweep_increments(sweep)
    assert np.all(inc > 0) and inc[1] / inc[0] > 0.5


def test_divergence_faster_above_one():
    inc = sweep_increments(divergence_sweep(1.2, 2, [10, 100, 1000]))
    assert np.all(np.diff(inc) > 0)


def test_divergence_preconditions():
    with pytest.raises(AlphaOutOfRange):
        divergence_sweep(0.5, 1, [10, 100])
    with pytest.raises(ValueError):
        divergence_sweep(1.0, 1, [100, 10])
