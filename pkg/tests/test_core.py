import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from srm_lab.core import (LabeledSample, LinearClass, Predictor, Shifted, SquaredLoss, empirical_risk,
                          evaluate_predictor, lp_empirical_distance, make_basis, nested_classes,
                          response, simplex_grid)

MONO = make_basis("monomial", 16)


def simplex_points(j):
    raw = st.lists(st.floats(0, 1), min_size=j + 1, max_size=j + 1)
    return raw.map(lambda v: np.asarray(v[:j]) / max(1.0, sum(v)))


def test_sample_validation():
    s = LabeledSample([0.1, 0.2], [0.0, 1.0])
    assert s.n == 2 and s.k == 1
    with pytest.raises(ValueError):
        LabeledSample([0.1], [1.5])
    with pytest.raises(ValueError):
        LabeledSample([0.1, 0.2], [0.5])
    with pytest.raises(ValueError):
        LabeledSample(np.empty((0, 1)), [])


def test_evaluate_predictor_examples():
    assert evaluate_predictor(Predictor(LinearClass(MONO, 3), [0, 0, 0]), 0.7) == 0.0
    assert evaluate_predictor(Predictor(LinearClass(MONO, 1), [1.0]), 0.25) == 0.25
    assert evaluate_predictor(Predictor(LinearClass(MONO, 2), [0.3, 0.4]), 0.5) == pytest.approx(0.25, abs=1e-15)


def test_predictor_rejects_bad_theta():
    with pytest.raises(ValueError):
        Predictor(LinearClass(MONO, 2), [0.3])
    with pytest.raises(ValueError):
        Predictor(LinearClass(MONO, 2), [0.7, 0.7])
    with pytest.raises(ValueError):
        Predictor(LinearClass(MONO, 2), [-0.1, 0.5])
    # tolerance of 1e-9 on the sum
    Predictor(LinearClass(MONO, 2), [0.5, 0.5 + 5e-10])


def test_empirical_risk_examples():
    s = LabeledSample([0.2, 0.9], [0.5, 0.5])
    assert empirical_risk(0.5, s) == 0.0
    assert empirical_risk(0.0, LabeledSample([0.2, 0.9], [1.0, 1.0])) == 1.0
    ident = Predictor(LinearClass(MONO, 1), [1.0])
    assert empirical_risk(ident, LabeledSample([0.0, 1.0], [0.5, 0.5])) == pytest.approx(0.25)


def test_lp_distance_examples():
    s = LabeledSample([0.0, 1.0], [0.0, 0.0])
    ident = Predictor(LinearClass(MONO, 1), [1.0])
    assert lp_empirical_distance(ident, ident, s, 1) == 0.0
    assert lp_empirical_distance(1.0, 0.0, s, 1) == 1.0
    assert lp_empirical_distance(ident, 0.0, s, 2) == pytest.approx(math.sqrt(0.5))
    with pytest.raises(ValueError):
        lp_empirical_distance(ident, 0.0, s, 3)


def test_class_geometry():
    assert LinearClass(MONO, 1).diameter == 1.0
    assert LinearClass(MONO, 4).diameter == pytest.approx(math.sqrt(2))
    assert LinearClass(MONO, 9).lipschitz_envelope == 3.0
    assert [c.j for c in nested_classes(MONO, 4, 2)] == [2, 3, 4]
    with pytest.raises(ValueError):
        LinearClass(MONO, 17)
    with pytest.raises(ValueError):
        make_basis("fourier")


def test_monomial_index_scheme():
    xs = np.array([[0.5, 0.2]])
    cols = MONO.columns(xs, 4)
    assert np.allclose(cols, [[0.5, 0.2, 0.25, 0.04]])


@pytest.mark.parametrize("name", ["monomial", "cosine", "step"])
def test_basis_range_and_independence(name, rng):
    basis = make_basis(name, 12)
    xs = rng.random((400, 2))
    cols = basis.columns(xs, 6)
    assert cols.min() >= 0.0 and cols.max() <= 1.0
    assert np.linalg.matrix_rank(cols) == 6


def test_simplex_grid():
    g = simplex_grid(2, 0.5)
    assert sorted(map(tuple, g)) == [(0, 0), (0, 0.5), (0, 1), (0.5, 0), (0.5, 0.5), (1, 0)]
    assert len(simplex_grid(3, 0.05)) == math.comb(23, 3)
    with pytest.raises(ValueError):
        simplex_grid(2, 0.3)


@given(st.integers(1, 5), st.data())
def test_lipschitz_envelope(j, data):
    a = data.draw(simplex_points(j))
    b = data.draw(simplex_points(j))
    x = data.draw(st.floats(0, 1))
    cls = LinearClass(MONO, j)
    ga, gb = Predictor(cls, a).predict([[x]])[0], Predictor(cls, b).predict([[x]])[0]
    assert abs(ga - gb) <= cls.lipschitz_envelope * np.linalg.norm(a - b) + 1e-12


@given(st.integers(1, 4), st.data(), st.integers(0, 2 ** 32 - 1))
def test_risk_is_squared_distance_to_response(j, data, seed):
    theta = data.draw(simplex_points(j))
    r = np.random.default_rng(seed)
    s = LabeledSample(r.random(7), r.random(7))
    p = Predictor(LinearClass(MONO, j), theta)
    assert empirical_risk(p, s) == pytest.approx(lp_empirical_distance(p, response, s, 2) ** 2, abs=1e-12)
    assert np.mean(SquaredLoss(p).values(s)) == pytest.approx(empirical_risk(p, s), abs=1e-15)


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([1, 2]))
def test_distance_is_translation_invariant_pseudometric(seed, p):
    r = np.random.default_rng(seed)
    s = LabeledSample(r.random(6), r.random(6))
    cls = LinearClass(MONO, 3)
    f, g, h = (Predictor(cls, t / max(1.0, t.sum())) for t in r.random((3, 3)))
    d = lp_empirical_distance
    assert d(f, g, s, p) == pytest.approx(d(g, f, s, p))
    assert d(f, h, s, p) <= d(f, g, s, p) + d(g, h, s, p) + 1e-12
    shift = lambda xs: np.sin(7 * xs[:, 0])  # noqa: E731
    assert d(Shifted(f, shift), Shifted(g, shift), s, p) == pytest.approx(d(f, g, s, p), abs=1e-12)
