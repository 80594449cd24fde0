import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from srm_lab.core import LabeledSample, LinearClass, Predictor, make_basis
from srm_lab.covering import (FinitePseudometricSpace, InstanceTooLarge, check_bilipschitz_lemma,
                              check_holder_lemma, check_squared_lemma, check_translation_lemma,
                              covering_number, covering_number_at_most, empirical_function_space,
                              exact_covering_number, packing_cover,
                              greedy_covering_number, is_cover, points_space, random_lemma_instance,
                              shatter_coefficient, value_space)


def equilateral(m, d=1.0):
    dist = np.full((m, m), d)
    np.fill_diagonal(dist, 0.0)
    return FinitePseudometricSpace(dist)


def brute_force_cover(space, eps):
    for size in range(1, space.m + 1):
        for centers in itertools.combinations(range(space.m), size):
            if is_cover(space, eps, centers):
                return size


def test_exact_examples():
    single = FinitePseudometricSpace([[0.0]])
    assert exact_covering_number(single, 0.01).size == 1
    assert exact_covering_number(equilateral(3), 0.5).size == 3
    assert exact_covering_number(equilateral(3), 1.5).size == 1


def test_strict_inequality_at_radius():
    # a ball of radius exactly 1 does not reach points at distance 1
    assert exact_covering_number(equilateral(3), 1.0).size == 3
    assert exact_covering_number(equilateral(3), 1.0 + 1e-12).size == 1


def test_greedy_examples():
    assert greedy_covering_number(FinitePseudometricSpace([[0.0]]), 0.3).size == 1
    sp = points_space(np.random.default_rng(0).random((12, 2)))
    assert greedy_covering_number(sp, sp.dist.max() + 0.01).size == 1
    line = points_space(np.linspace(0, 1, 10))
    g = greedy_covering_number(line, 0.15)
    e = exact_covering_number(line, 0.15)
    assert not g.exact and e.exact
    assert g.size >= e.size == 4


def test_validation_and_errors():
    with pytest.raises(ValueError):
        FinitePseudometricSpace([[0.0, 1.0], [2.0, 0.0]])
    with pytest.raises(ValueError):
        FinitePseudometricSpace([[0.0, 3.0, 1.0], [3.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
    with pytest.raises(ValueError):
        exact_covering_number(equilateral(3), 0.0)
    with pytest.raises(InstanceTooLarge):
        exact_covering_number(points_space(np.linspace(0, 1, 21)), 0.1)
    # above the threshold the dispatcher falls back to greedy
    assert not covering_number(points_space(np.linspace(0, 1, 30)), 0.1).exact


def test_empirical_function_space_example():
    s = LabeledSample([0.0, 1.0], [0.0, 0.0])
    ident = Predictor(LinearClass(make_basis("monomial"), 1), [1.0])
    sp = empirical_function_space([0.0, ident, 1.0], s, 1)
    assert sp.dist[0, 2] == 1.0 and sp.dist[0, 1] == 0.5 and sp.dist[1, 2] == 0.5
    assert empirical_function_space([ident], s).m == 1
    dup = empirical_function_space([ident, ident], s)
    assert dup.dist[0, 1] == 0.0


def test_shatter_examples():
    pts = [(0.2, 0.5), (0.5, 0.5), (0.8, 0.5)]
    thresholds = [lambda x, c=c: float(x <= c) for c in np.linspace(-0.1, 1.1, 241)]
    assert shatter_coefficient(thresholds, pts) == 4
    assert shatter_coefficient(thresholds[:1], pts) == 1
    assert shatter_coefficient(thresholds, [(0.2, 2.0), (0.5, 3.0)]) == 1
    with pytest.raises(ValueError):
        shatter_coefficient(thresholds, [])


@given(st.integers(0, 2 ** 32 - 1), st.floats(0.05, 0.9))
def test_exact_matches_brute_force(seed, eps):
    r = np.random.default_rng(seed)
    sp = points_space(r.random((int(r.integers(1, 9)), 2)))
    res = exact_covering_number(sp, eps)
    assert is_cover(sp, eps, res.centers)
    assert res.size == brute_force_cover(sp, eps)
    assert greedy_covering_number(sp, eps).size >= res.size


@given(st.integers(0, 2 ** 32 - 1), st.floats(0.02, 0.5), st.floats(0.02, 0.5))
def test_covering_number_monotone_in_eps(seed, a, b):
    sp = points_space(np.random.default_rng(seed).random((14, 2)))
    lo, hi = sorted((a, b))
    assert exact_covering_number(sp, lo).size >= exact_covering_number(sp, hi).size


@given(st.integers(0, 2 ** 32 - 1))
def test_lemmas_on_random_instances(seed):
    inst = random_lemma_instance(np.random.default_rng(seed), m_max=12)
    for eps in (0.05, 0.15, 0.3):
        assert check_squared_lemma(inst["values"], eps).holds
        assert check_translation_lemma(inst["values"], inst["shift"], eps).holds
        assert all(c.holds for c in check_bilipschitz_lemma(inst["source"], inst["image"], inst["K"], eps))
        assert check_holder_lemma(inst["holder_source"], inst["holder_image"],
                                  inst["holder_K"], inst["alpha"], eps).holds


def test_value_space_metric():
    sp = value_space([[0.0, 0.0], [1.0, 0.0]], p=2)
    assert sp.dist[0, 1] == pytest.approx(np.sqrt(0.5))
    with pytest.raises(ValueError):
        value_space([[0.0]], p=3)


@given(st.integers(0, 2 ** 32 - 1), st.floats(0.05, 0.8))
def test_packing_cover_is_separated_cover(seed, eps):
    sp = points_space(np.random.default_rng(seed).random((15, 2)))
    res = packing_cover(sp, eps)
    assert is_cover(sp, eps, res.centers)
    sub = sp.dist[np.ix_(res.centers, res.centers)]
    assert np.all(sub[~np.eye(res.size, dtype=bool)] >= eps)
    assert res.size >= exact_covering_number(sp, eps).size


def test_covering_number_at_most():
    line = points_space(np.linspace(0, 1, 10))
    assert covering_number_at_most(line, 0.15, 4)
    assert not covering_number_at_most(line, 0.15, 3)
    big = points_space(np.linspace(0, 1, 40))
    assert covering_number_at_most(big, 0.15, 10)
    with pytest.raises(InstanceTooLarge):
        covering_number_at_most(big, 0.15, 2)
