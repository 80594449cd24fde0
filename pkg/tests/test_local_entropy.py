import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from srm_lab.core import LabeledSample, LinearClass, Predictor, lp_empirical_distance, make_basis
from srm_lab.covering import exact_covering_number, points_space
from srm_lab.local_entropy import (A_closed_form, SingularGramError, compute_A, delta_n, ellipsoid_radii,
                                   empirical_norm_via_gram, entropy_integral, entropy_integral_quadrature,
                                   gram_from_matrix, gram_matrix, local_entropy_bound, population_gram)

# Gamma(3/2, log 3) to 30 digits (mpmath)
A_REFERENCE = 0.471911628053263734691936688374
MONO = make_basis("monomial", 16)


def test_gram_of_orthonormal_pair():
    s = LabeledSample([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0])
    g = gram_matrix(s, LinearClass(MONO, 2))
    assert np.allclose(g.m, np.diag([0.5, 0.5]))
    assert np.allclose(g.eigenvalues, [0.5, 0.5])
    assert g.positive_definite and g.source_n == 2


def test_gram_rank_deficient():
    s = LabeledSample([[0.3, 0.6]], [0.0])
    g = gram_matrix(s, LinearClass(MONO, 2))
    assert not g.positive_definite
    with pytest.raises(SingularGramError):
        ellipsoid_radii(g, 1.0)


def test_gram_pd_at_twice_dimension(rng):
    for d in (2, 3, 5):
        for _ in range(100):
            s = LabeledSample(rng.random((2 * d, d)), np.zeros(2 * d))
            assert gram_matrix(s, LinearClass(MONO, d)).positive_definite


def test_gram_rejects_asymmetric():
    with pytest.raises(ValueError):
        gram_from_matrix([[1.0, 0.5], [0.0, 1.0]], 2)


def test_norm_via_gram_examples():
    g = gram_from_matrix(np.diag([0.5, 0.5]), 2)
    assert empirical_norm_via_gram(g, [0.0, 0.0]) == 0.0
    assert empirical_norm_via_gram(g, [1.0, 0.0]) == 0.5
    with pytest.raises(ValueError):
        empirical_norm_via_gram(g, [1.0])


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 6))
def test_norm_via_gram_matches_direct(seed, j):
    r = np.random.default_rng(seed)
    n = int(r.integers(1, 30))
    s = LabeledSample(r.random(n), r.random(n))
    cls = LinearClass(MONO, j)
    theta = r.random(j)
    theta /= theta.sum() * 1.5
    g = gram_matrix(s, cls)
    direct = lp_empirical_distance(Predictor(cls, theta), 0.0, s, 2) ** 2
    assert empirical_norm_via_gram(g, theta) == pytest.approx(direct, abs=1e-10)


def test_ellipsoid_radii():
    assert np.allclose(ellipsoid_radii(gram_from_matrix(np.eye(3), 3), 1.0), 1.0)
    assert np.allclose(ellipsoid_radii(gram_from_matrix(np.diag([0.25, 1.0]), 2), 1.0), [1.0, 2.0])
    g = gram_from_matrix([[0.6, 0.2], [0.2, 0.3]], 5)
    assert np.allclose(ellipsoid_radii(g, 2.5), 2.5 * ellipsoid_radii(g, 1.0))
    r = ellipsoid_radii(g, 1.0)
    assert r[0] <= r[1]


def test_local_entropy_bound_examples():
    assert local_entropy_bound(4, 0.2, 0.2).log_bound == pytest.approx(4 * math.log(3))
    rep = local_entropy_bound(1, 0.3, 0.1)
    assert rep.branch == "cube" and rep.log_bound == pytest.approx(math.log(9))
    with pytest.raises(ValueError):
        local_entropy_bound(2, 0.1, 0.2)
    with pytest.raises(ValueError):
        local_entropy_bound(2, 0.1, 0.0)


def test_rogers_branch_needs_attestation():
    plain = local_entropy_bound(12, 1.0, 0.01)
    assert plain.branch == "cube" and plain.rogers_log_bound is not None
    assert plain.rogers_branch == "rogers_large"
    attested = local_entropy_bound(12, 1.0, 0.2, attest_rogers=True)
    assert attested.branch == "rogers_small"
    assert attested.log_bound < local_entropy_bound(12, 1.0, 0.2).log_bound
    big = local_entropy_bound(10, 1.0, 0.05, attest_rogers=True)
    assert big.rogers_branch == "rogers_large"
    assert local_entropy_bound(8, 1.0, 0.01).rogers_log_bound is None


@given(st.integers(1, 20), st.floats(0.01, 10), st.floats(0.01, 1), st.floats(0.01, 1))
def test_local_entropy_bound_monotone(d, delta, f1, f2):
    lo, hi = sorted((f1, f2))
    assert local_entropy_bound(d, delta, lo * delta).log_bound >= local_entropy_bound(d, delta, hi * delta).log_bound
    assert local_entropy_bound(d, 2 * delta, hi * delta).log_bound >= local_entropy_bound(d, delta, hi * delta).log_bound


def test_exact_cover_of_interval_below_bound():
    delta = 0.4
    sp = points_space(np.linspace(-delta, delta, 15))
    for u in np.linspace(0.02, delta, 20):
        assert exact_covering_number(sp, u).size <= math.exp(local_entropy_bound(1, delta, u).log_bound)


def test_delta_n():
    assert delta_n(8) == pytest.approx(math.log(8) / math.sqrt(8))
    grid = [delta_n(n) for n in range(8, 2000, 7)]
    assert all(a > b for a, b in zip(grid, grid[1:]))
    # log(n)/sqrt(n) is still about 1.8e-3 at 10^8; it drops below 1e-3 by 10^9
    assert delta_n(10 ** 8) == pytest.approx(8 * math.log(10) / 1e4)
    assert delta_n(10 ** 9) < 1e-3
    with pytest.raises(ValueError):
        delta_n(1)


def test_compute_A():
    a = compute_A()
    assert 0 < a < math.sqrt(math.log(1e9)) / 3
    assert a == pytest.approx(A_REFERENCE, abs=1e-10)
    assert A_closed_form() == pytest.approx(A_REFERENCE, abs=1e-12)
    assert abs(compute_A(5e-13) - a) < 1e-9


@pytest.mark.parametrize("d", [1, 2, 5])
@pytest.mark.parametrize("delta", [0.1, 1.0])
def test_entropy_integral_matches_quadrature(d, delta):
    assert entropy_integral(d, delta) == pytest.approx(entropy_integral_quadrature(d, delta), rel=1e-6)


def test_entropy_integral_scaling():
    assert entropy_integral(3, 0.4) == pytest.approx(2 * entropy_integral(3, 0.2))
    assert entropy_integral(4, 0.4) == pytest.approx(2 * entropy_integral(1, 0.4))
    n, d = 5000, 3
    assert entropy_integral(d, delta_n(n)) == pytest.approx(3 * compute_A() * math.log(n) * math.sqrt(d / n))


def test_population_gram_monomials():
    g = population_gram(LinearClass(MONO, 3), k=1)
    hilbert = np.array([[1 / (i + j + 1) for j in range(1, 4)] for i in range(1, 4)])
    assert np.allclose(g.m, hilbert, atol=1e-14)
    assert g.positive_definite
