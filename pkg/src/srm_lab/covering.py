"""Covering numbers of finite pseudometric spaces.

Covers are intrinsic (centers are elements of the space) and a point ``x`` is
covered by a center ``b`` only when ``d(x, b) < eps`` strictly. Extrinsic
covers, with centers anywhere in an ambient space, can be smaller; the two
notions satisfy ``N(eps, A) <= N(eps / 2, A in M)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import LabeledSample, _function_values
from .errors import SrmLabError

EXACT_THRESHOLD = 20
TRIANGLE_TOL = 1e-12


class InstanceTooLarge(SrmLabError, ValueError):
    pass


class FinitePseudometricSpace:
    """Labelled points with an explicit distance matrix."""

    def __init__(self, dist, labels: Sequence | None = None, validate: bool = True):
        dist = np.array(dist, dtype=float)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1] or dist.shape[0] < 1:
            raise ValueError("distance matrix must be square and nonempty")
        m = dist.shape[0]
        if labels is None:
            labels = list(range(m))
        labels = list(labels)
        if len(labels) != m:
            raise ValueError("one label per element required")
        if validate:
            _validate_pseudometric(dist)
        dist.setflags(write=False)
        self.dist = dist
        self.labels = labels

    @property
    def m(self) -> int:
        return self.dist.shape[0]

    def __len__(self):
        return self.m

    def __repr__(self):
        return f"FinitePseudometricSpace(m={self.m})"


def _validate_pseudometric(dist):
    if not np.all(np.isfinite(dist)) or np.any(dist < 0):
        raise ValueError("distances must be finite and nonnegative")
    if np.any(np.diag(dist) != 0):
        raise ValueError("diagonal must be zero")
    if not np.allclose(dist, dist.T, rtol=0, atol=TRIANGLE_TOL):
        raise ValueError("distance matrix must be symmetric")
    for k in range(dist.shape[0]):
        via = dist[:, k][:, None] + dist[k, :][None, :]
        if np.any(dist > via + TRIANGLE_TOL):
            raise ValueError("triangle inequality violated")


@dataclass(frozen=True)
class CoverResult:
    size: int
    centers: tuple
    exact: bool

    def to_dict(self, space: FinitePseudometricSpace | None = None) -> dict:
        out = {"size": self.size, "centers": list(self.centers), "exact": self.exact}
        if space is not None:
            out["center_labels"] = [space.labels[c] for c in self.centers]
        return out


def _ball_masks(space: FinitePseudometricSpace, eps: float) -> list[int]:
    if not eps > 0:
        raise ValueError("eps must be positive")
    inside = space.dist < eps
    masks = []
    for c in range(space.m):
        mask = 0
        for i in np.flatnonzero(inside[c]):
            mask |= 1 << int(i)
        masks.append(mask)
    return masks


def is_cover(space: FinitePseudometricSpace, eps: float, centers) -> bool:
    centers = list(centers)
    if not centers:
        return False
    return bool(np.all(space.dist[:, centers].min(axis=1) < eps))


def greedy_covering_number(space: FinitePseudometricSpace, eps: float) -> CoverResult:
    masks = _ball_masks(space, eps)
    full = (1 << space.m) - 1
    covered = 0
    centers = []
    while covered != full:
        # ties go to the smallest index, which keeps the result deterministic
        best = max(range(space.m), key=lambda c: (masks[c] & ~covered).bit_count())
        centers.append(best)
        covered |= masks[best]
    assert is_cover(space, eps, centers)
    return CoverResult(len(centers), tuple(centers), exact=False)


def exact_covering_number(space: FinitePseudometricSpace, eps: float,
                          threshold: int = EXACT_THRESHOLD) -> CoverResult:
    """Minimum intrinsic ``eps``-cover by iterative deepening branch and bound.

    Each level branches on the uncovered element with the fewest candidate
    centers. Failed ``(covered, budget)`` states are memoized and a counting
    bound ``ceil(uncovered / largest ball)`` prunes the rest.
    """
    if space.m > threshold:
        raise InstanceTooLarge(f"{space.m} elements exceeds the exact threshold {threshold}")
    masks = _ball_masks(space, eps)
    m = space.m
    full = (1 << m) - 1
    greedy = greedy_covering_number(space, eps)

    # drop centers whose ball is contained in another ball
    order = sorted(range(m), key=lambda c: (-masks[c].bit_count(), c))
    kept = []
    for c in order:
        if not any((masks[c] | masks[k]) == masks[k] for k in kept):
            kept.append(c)
    covering = [[c for c in kept if (masks[c] >> e) & 1] for e in range(m)]
    biggest = max(masks[c].bit_count() for c in kept)

    failed: set[tuple[int, int]] = set()

    def search(covered, budget, chosen):
        if covered == full:
            return list(chosen)
        if budget == 0:
            return None
        remaining = (full & ~covered).bit_count()
        if math.ceil(remaining / biggest) > budget or (covered, budget) in failed:
            return None
        unc = full & ~covered
        best_e, best_n = -1, m + 1
        while unc:
            low = unc & -unc
            e = low.bit_length() - 1
            n_e = len(covering[e])
            if n_e < best_n:
                best_e, best_n = e, n_e
            unc ^= low
        cands = sorted(covering[best_e], key=lambda c: (-(masks[c] & ~covered).bit_count(), c))
        for c in cands:
            chosen.append(c)
            found = search(covered | masks[c], budget - 1, chosen)
            chosen.pop()
            if found is not None:
                return found
        failed.add((covered, budget))
        return None

    lower = max(1, math.ceil(m / biggest))
    for budget in range(lower, greedy.size):
        found = search(0, budget, [])
        if found is not None:
            centers = tuple(sorted(found))
            assert is_cover(space, eps, centers)
            return CoverResult(len(centers), centers, exact=True)
    return CoverResult(greedy.size, tuple(sorted(greedy.centers)), exact=True)


def covering_number(space: FinitePseudometricSpace, eps: float) -> CoverResult:
    """Exact below the threshold, greedy upper bound above it."""
    if space.m <= EXACT_THRESHOLD:
        return exact_covering_number(space, eps)
    return greedy_covering_number(space, eps)


def packing_cover(space: FinitePseudometricSpace, eps: float) -> CoverResult:
    """Maximal ``eps``-separated subset, scanned in index order.

    Every unchosen element lies within ``< eps`` of a chosen one, so the
    subset is an intrinsic cover; its size is at most the ``eps``-packing
    number of the space.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    centers = []
    for i in range(space.m):
        if not centers or space.dist[i, centers].min() >= eps:
            centers.append(i)
    assert is_cover(space, eps, centers)
    return CoverResult(len(centers), tuple(centers), exact=False)


def covering_number_at_most(space: FinitePseudometricSpace, eps: float, bound: float) -> bool:
    """Decide ``N(eps) <= bound``.

    A greedy or packing cover no larger than ``bound`` settles it for any
    size of space since both are upper bounds. Otherwise exact search
    decides, which needs the space to be below the exact threshold.
    """
    heuristic = min(greedy_covering_number(space, eps).size, packing_cover(space, eps).size)
    if heuristic <= bound:
        return True
    if space.m > EXACT_THRESHOLD:
        raise InstanceTooLarge(f"greedy cover exceeds {bound} and m={space.m} is too large for exact search")
    return exact_covering_number(space, eps).size <= bound


def points_space(points, metric: Callable | None = None) -> FinitePseudometricSpace:
    """Finite space from points in R^k (Euclidean by default)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if metric is None:
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diff * diff).sum(axis=-1))
    else:
        dist = np.array([[metric(a, b) for b in pts] for a in pts], dtype=float)
    np.fill_diagonal(dist, 0.0)
    return FinitePseudometricSpace(dist, validate=False)


def value_space(values, p: int = 1) -> FinitePseudometricSpace:
    """Space of functions given by their values on ``n`` equally weighted points.

    ``values`` has shape ``(m, n)``; distances are the ``L_p(P_n)`` metric.
    """
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 2 or vals.shape[0] < 1:
        raise ValueError("values must be a nonempty (m, n) array")
    diff = np.abs(vals[:, None, :] - vals[None, :, :])
    if p == 1:
        dist = diff.mean(axis=-1)
    elif p == 2:
        dist = np.sqrt((diff * diff).mean(axis=-1))
    else:
        raise ValueError("p must be 1 or 2")
    np.fill_diagonal(dist, 0.0)
    return FinitePseudometricSpace(dist, validate=False)


def empirical_function_space(predictors: Sequence, s: LabeledSample, p: int = 1) -> FinitePseudometricSpace:
    if not predictors:
        raise ValueError("need at least one predictor")
    vals = np.stack([_function_values(f, s) for f in predictors])
    return value_space(vals, p)


def shatter_coefficient(family: Sequence[Callable], points: Sequence) -> int:
    """Number of distinct subgraph traces ``{(x, t) : t < f(x)}`` on the points."""
    pts = list(points)
    if not pts:
        raise ValueError("empty point set")
    traces = set()
    for f in family:
        traces.add(tuple(bool(t < f(x)) for x, t in pts))
    return len(traces)


# --- covering-lemma checks on finite instances -------------------------------

@dataclass(frozen=True)
class LemmaCheck:
    lemma: str
    eps: float
    lhs: int
    rhs: int
    holds: bool


def check_squared_lemma(values, eps: float) -> LemmaCheck:
    """``N_1(2 eps, G^2) <= N_2(eps, G)`` for functions with values in [0, 1]."""
    vals = np.asarray(values, dtype=float)
    lhs = exact_covering_number(value_space(vals ** 2, 1), 2 * eps).size
    rhs = exact_covering_number(value_space(vals, 2), eps).size
    return LemmaCheck("squared", eps, lhs, rhs, lhs <= rhs)


def check_translation_lemma(values, shift, eps: float, p: int = 1) -> LemmaCheck:
    """``N_p(eps, G + h) == N_p(eps, G)``."""
    vals = np.asarray(values, dtype=float)
    lhs = exact_covering_number(value_space(vals + np.asarray(shift, dtype=float)[None, :], p), eps).size
    rhs = exact_covering_number(value_space(vals, p), eps).size
    return LemmaCheck("translation", eps, lhs, rhs, lhs == rhs)


def check_bilipschitz_lemma(source: FinitePseudometricSpace, image: FinitePseudometricSpace,
                            K: float, eps: float) -> tuple[LemmaCheck, LemmaCheck]:
    """``N(K eps, M2) <= N(eps, M1) <= N(eps / K, M2)`` for a K-bilipschitz bijection."""
    mid = exact_covering_number(source, eps).size
    low = exact_covering_number(image, K * eps).size
    high = exact_covering_number(image, eps / K).size
    return (LemmaCheck("bilipschitz_lower", eps, low, mid, low <= mid),
            LemmaCheck("bilipschitz_upper", eps, mid, high, mid <= high))


def check_holder_lemma(source: FinitePseudometricSpace, image: FinitePseudometricSpace,
                       K: float, alpha: float, eps: float) -> LemmaCheck:
    """``N(K eps^alpha, M1) <= N(eps, M2)`` for a surjective Hoelder map ``M2 -> M1``."""
    lhs = exact_covering_number(image, K * eps ** alpha).size
    rhs = exact_covering_number(source, eps).size
    return LemmaCheck("holder", eps, lhs, rhs, lhs <= rhs)


def random_lemma_instance(rng: np.random.Generator, m_max: int = EXACT_THRESHOLD):
    """Random instance for the four lemma checks.

    Returns a dict with function values, a shift, Euclidean points with a
    bilipschitz linear image, and a Hoelder image.
    """
    m = int(rng.integers(3, m_max + 1))
    n = int(rng.integers(2, 9))
    values = rng.random((m, n))
    shift = rng.normal(size=n)

    dim = int(rng.integers(1, 4))
    pts = rng.random((m, dim))
    u, _, vt = np.linalg.svd(rng.normal(size=(dim, dim)))
    K = float(rng.uniform(1.0, 3.0))
    sing = rng.uniform(1.0 / K, K, size=dim)
    sing[0], sing[-1] = 1.0 / K, K
    if dim == 1:
        sing[0] = float(rng.choice([1.0 / K, K]))
    lin = u @ np.diag(sing) @ vt

    alpha = float(rng.uniform(0.3, 1.0))
    holder_K = float(rng.uniform(0.5, 2.0))
    line = np.sort(rng.random(m))
    dline = np.abs(line[:, None] - line[None, :])
    return {
        "values": values,
        "shift": shift,
        "source": points_space(pts),
        "image": points_space(pts @ lin.T),
        "K": K,
        "holder_source": FinitePseudometricSpace(dline, validate=False),
        # |x - y|^alpha is a metric for alpha <= 1
        "holder_image": FinitePseudometricSpace(holder_K * dline ** alpha, validate=False),
        "holder_K": holder_K,
        "alpha": alpha,
    }
