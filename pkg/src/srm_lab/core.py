"""Samples, basis families, simplex-constrained linear classes and risk functionals.

All functions in the shipped basis families map ``[0, 1]^k`` into ``[0, 1]``.
Combined with coefficients from the simplex
``{theta : theta_i >= 0, sum(theta) <= 1}`` every predictor is therefore a
function into ``[0, 1]`` and every squared loss lies in ``[0, 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

SIMPLEX_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """n observations ``(x_i, y_i)`` with ``x_i`` in R^k and ``y_i`` in [0, 1]."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        if xs.ndim == 1:
            xs = xs[:, None]
        ys = np.asarray(self.ys, dtype=float).reshape(-1)
        if xs.ndim != 2:
            raise ValueError("xs must be a list of points")
        if xs.shape[0] != ys.shape[0]:
            raise ValueError(f"{xs.shape[0]} points but {ys.shape[0]} responses")
        if ys.shape[0] < 1:
            raise ValueError("sample must contain at least one observation")
        if not np.all(np.isfinite(xs)):
            raise ValueError("xs must be finite")
        if np.any(ys < 0.0) or np.any(ys > 1.0) or not np.all(np.isfinite(ys)):
            raise ValueError("responses must lie in [0, 1]")
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n(self) -> int:
        return int(self.ys.shape[0])

    @property
    def k(self) -> int:
        return int(self.xs.shape[1])

    def __eq__(self, other):
        if not isinstance(other, LabeledSample):
            return NotImplemented
        return np.array_equal(self.xs, other.xs) and np.array_equal(self.ys, other.ys)

    def __hash__(self):
        return hash((self.xs.tobytes(), self.ys.tobytes()))


class BasisFamily:
    """Ordered functions ``psi_1, ..., psi_D`` with values in [0, 1].

    ``columns(xs, j)`` evaluates the first ``j`` members on an ``(n, k)``
    array and returns an ``(n, j)`` design matrix.
    """

    name = "basis"

    def __init__(self, dimension_cap: int = 64):
        if dimension_cap < 1:
            raise ValueError("dimension_cap must be >= 1")
        self.dimension_cap = int(dimension_cap)

    def _check(self, j):
        if not 1 <= j <= self.dimension_cap:
            raise ValueError(f"basis index {j} outside 1..{self.dimension_cap}")

    def column(self, i: int, xs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def columns(self, xs, j: int) -> np.ndarray:
        self._check(j)
        xs = _as_points(xs)
        out = np.empty((xs.shape[0], j))
        for i in range(1, j + 1):
            out[:, i - 1] = self.column(i, xs)
        return out

    def eval(self, i: int, x) -> float:
        self._check(i)
        return float(self.column(i, _as_points(x))[0])

    def __repr__(self):
        return f"{type(self).__name__}(dimension_cap={self.dimension_cap})"

    def __eq__(self, other):
        return type(self) is type(other) and self.__dict__ == other.__dict__

    def __hash__(self):
        return hash((type(self).__name__, self.dimension_cap))


def _as_points(xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    if xs.ndim == 0:
        xs = xs.reshape(1, 1)
    elif xs.ndim == 1:
        xs = xs[None, :]
    return xs


def _coord_and_order(i: int, k: int):
    # cycle through coordinates, raising the order after each full sweep
    return (i - 1) % k, (i - 1) // k + 1


class MonomialBasis(BasisFamily):
    """``psi_i(x) = x_c ** p`` with ``c = (i-1) mod k`` and ``p = (i-1) // k + 1``."""

    name = "monomial"

    def column(self, i, xs):
        c, p = _coord_and_order(i, xs.shape[1])
        return xs[:, c] ** p


class CosineBumpBasis(BasisFamily):
    """``psi_i(x) = (1 + cos(p * pi * x_c)) / 2``, same index scheme as monomials."""

    name = "cosine"

    def column(self, i, xs):
        c, p = _coord_and_order(i, xs.shape[1])
        return np.clip(0.5 * (1.0 + np.cos(p * math.pi * xs[:, c])), 0.0, 1.0)


class StepBasis(BasisFamily):
    """Piecewise-constant steps ``psi_i(x) = 1[x_1 >= (i - 1) / D]`` on the first coordinate.

    ``psi_1`` is the constant one. The first ``j`` steps are linearly
    independent on a sample as long as every cell ``[(i-1)/D, i/D)`` with
    ``i <= j`` receives a point.
    """

    name = "step"

    def column(self, i, xs):
        return (xs[:, 0] >= (i - 1) / self.dimension_cap).astype(float)


BASIS_FAMILIES = {
    MonomialBasis.name: MonomialBasis,
    CosineBumpBasis.name: CosineBumpBasis,
    StepBasis.name: StepBasis,
}


def make_basis(name: str, dimension_cap: int = 64) -> BasisFamily:
    try:
        return BASIS_FAMILIES[name](dimension_cap)
    except KeyError:
        raise ValueError(f"unknown basis family {name!r}; choose from {sorted(BASIS_FAMILIES)}") from None


@dataclass(frozen=True)
class LinearClass:
    """``G_j = {theta . psi^(j) : theta in Theta_j}`` with the simplex ``Theta_j``."""

    basis: BasisFamily
    j: int

    def __post_init__(self):
        if self.j < 1:
            raise ValueError("a linear class needs j >= 1")
        self.basis._check(self.j)

    @property
    def diameter(self) -> float:
        # vertices are 0 and e_1..e_j
        return 1.0 if self.j == 1 else math.sqrt(2.0)

    @property
    def lipschitz_envelope(self) -> float:
        """Constant ``m_j`` with ``|g_a(x) - g_b(x)| <= m_j * ||a - b||``."""
        return math.sqrt(self.j)

    def design(self, xs) -> np.ndarray:
        return self.basis.columns(xs, self.j)

    def predictor(self, theta) -> "Predictor":
        return Predictor(self, theta)


def nested_classes(basis: BasisFamily, j_max: int, j_min: int = 1) -> list[LinearClass]:
    return [LinearClass(basis, j) for j in range(j_min, j_max + 1)]


def in_simplex(theta, tol: float = SIMPLEX_TOL) -> bool:
    theta = np.asarray(theta, dtype=float)
    return bool(np.all(theta >= -tol) and theta.sum() <= 1.0 + tol)


@dataclass(frozen=True)
class Predictor:
    cls: LinearClass
    theta: tuple

    def __init__(self, cls: LinearClass, theta):
        theta = tuple(float(t) for t in np.asarray(theta, dtype=float).reshape(-1))
        if len(theta) != cls.j:
            raise ValueError(f"theta has length {len(theta)} but the class has j={cls.j}")
        if not in_simplex(theta):
            raise ValueError(f"theta {theta} is outside the simplex")
        object.__setattr__(self, "cls", cls)
        object.__setattr__(self, "theta", theta)

    @property
    def j(self) -> int:
        return self.cls.j

    def predict(self, xs) -> np.ndarray:
        return self.cls.design(xs) @ np.asarray(self.theta)

    def __call__(self, xs) -> np.ndarray:
        return self.predict(xs)


def evaluate_predictor(p: Predictor, x) -> float:
    value = float(p.predict(_as_points(x))[0])
    # the simplex tolerance can push values a hair outside [0, 1]
    assert -1e-8 <= value <= 1.0 + 1e-8, value
    return value


@dataclass(frozen=True)
class SquaredLoss:
    """Loss function ``l_g(x, y) = (g(x) - y)^2`` of a predictor."""

    predictor: Callable

    def values(self, s: LabeledSample) -> np.ndarray:
        return (_function_values(self.predictor, s) - s.ys) ** 2


class _Response:
    """The response ``y`` viewed as a function on the sample."""

    def values(self, s: LabeledSample) -> np.ndarray:
        return s.ys

    def __repr__(self):
        return "response"


response = _Response()


@dataclass(frozen=True)
class Shifted:
    """``f + h`` for two functions evaluated on the same sample."""

    f: object
    h: object

    def values(self, s: LabeledSample) -> np.ndarray:
        return _function_values(self.f, s) + _function_values(self.h, s)


def _function_values(f, s: LabeledSample) -> np.ndarray:
    if hasattr(f, "values"):
        return np.asarray(f.values(s), dtype=float)
    if callable(f):
        return np.broadcast_to(np.asarray(f(s.xs), dtype=float), (s.n,))
    return np.full(s.n, float(f))


def empirical_risk(p, s: LabeledSample) -> float:
    """Mean squared error of ``p`` over the sample."""
    if s.n < 1:
        raise ValueError("empty sample")
    r = float(np.mean((_function_values(p, s) - s.ys) ** 2))
    return r


def lp_empirical_distance(f, g, s: LabeledSample, p: int = 1) -> float:
    """``L_p(P_n)`` pseudometric between two functions on the sample.

    ``f`` and ``g`` may be predictors, plain callables of the points, losses,
    ``response`` or constants.
    """
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2")
    diff = np.abs(_function_values(f, s) - _function_values(g, s))
    if p == 1:
        return float(np.mean(diff))
    return float(math.sqrt(np.mean(diff * diff)))


def simplex_grid(j: int, step: float) -> np.ndarray:
    """All points of ``Theta_j`` whose coordinates are multiples of ``step``."""
    if step <= 0 or step > 1:
        raise ValueError("step must lie in (0, 1]")
    m = int(round(1.0 / step))
    if not math.isclose(m * step, 1.0, rel_tol=1e-9):
        raise ValueError("1/step must be an integer")
    pts = []

    def rec(prefix, remaining):
        if len(prefix) == j:
            pts.append(prefix)
            return
        for c in range(remaining + 1):
            rec(prefix + [c], remaining - c)

    rec([], m)
    return np.asarray(pts, dtype=float) / m
