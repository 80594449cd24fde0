"""Gram matrices, ellipsoid geometry and local metric entropy of linear classes.

For ``g_theta = theta . psi`` the empirical norm is a quadratic form,
``||g_theta||_n^2 = theta^T G theta`` with ``G = (1/n) sum psi(X_i) psi(X_i)^T``.
The empirical ball of radius ``delta`` is an ellipsoid in parameter space
with semi-axes ``delta / sqrt(lambda_i)``, which an isometry maps onto a
Euclidean ball. Covering a Euclidean ``delta``-ball in R^d at scale ``u``
takes at most ``(3 delta / u)^d`` balls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .core import LabeledSample, LinearClass
from .errors import NumericalError

PD_TOLERANCE = 1e-12
SYMMETRY_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-9
DEFAULT_ROGERS_C = 10.0


class SingularGramError(NumericalError, ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GramMatrix:
    m: np.ndarray
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns match eigenvalues
    source_n: int

    @property
    def d(self) -> int:
        return self.m.shape[0]

    @property
    def positive_definite(self) -> bool:
        return bool(self.eigenvalues[-1] > PD_TOLERANCE)

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[-1])

    def to_dict(self) -> dict:
        return {"d": self.d, "source_n": self.source_n, "matrix": self.m.tolist(),
                "eigenvalues": self.eigenvalues.tolist(), "positive_definite": self.positive_definite}


def gram_from_design(phi: np.ndarray) -> GramMatrix:
    """Gram matrix ``phi^T phi / n`` of an ``(n, d)`` design matrix."""
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 2 or phi.shape[0] < 1:
        raise ValueError("design matrix must be (n, d) with n >= 1")
    n = phi.shape[0]
    m = phi.T @ phi / n
    return gram_from_matrix(m, n)


def gram_from_matrix(m, source_n: int) -> GramMatrix:
    m = np.array(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("Gram matrix must be square")
    if np.max(np.abs(m - m.T), initial=0.0) > SYMMETRY_TOL * max(1.0, np.max(np.abs(m), initial=0.0)):
        raise ValueError("Gram matrix is not symmetric")
    m = 0.5 * (m + m.T)
    try:
        vals, vecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    if vals[-1] < -SYMMETRY_TOL:
        raise NumericalError(f"Gram matrix has negative eigenvalue {vals[-1]:.3g}")
    recon = vecs @ np.diag(vals) @ vecs.T
    if np.max(np.abs(recon - m)) > RECONSTRUCTION_TOL:
        raise NumericalError("eigendecomposition failed the reconstruction check")
    vals = np.maximum(vals, 0.0)
    for a in (m, vals, vecs):
        a.setflags(write=False)
    return GramMatrix(m, vals, vecs, int(source_n))


def gram_matrix(s: LabeledSample, cls: LinearClass) -> GramMatrix:
    return gram_from_design(cls.design(s.xs))


def population_gram(cls: LinearClass, k: int, nodes: int = 64) -> GramMatrix:
    """``E[psi psi^T]`` under the uniform design on ``[0,1]^k`` by Gauss-Legendre quadrature."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if nodes ** k > 2_000_000:
        raise ValueError("tensor quadrature grid too large; reduce nodes or k")
    t, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    grids = np.meshgrid(*([t] * k), indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grids], axis=1)
    wts = np.ones(pts.shape[0])
    for wg in np.meshgrid(*([w] * k), indexing="ij"):
        wts = wts * wg.reshape(-1)
    phi = cls.design(pts)
    m = (phi * wts[:, None]).T @ phi
    return gram_from_matrix(m, source_n=0)


def empirical_norm_via_gram(g: GramMatrix, theta) -> float:
    """Squared empirical norm ``theta^T G theta`` of ``g_theta``."""
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.shape[0] != g.d:
        raise ValueError(f"theta has length {theta.shape[0]}, Gram matrix is {g.d}x{g.d}")
    return float(theta @ g.m @ theta)


def ellipsoid_radii(g: GramMatrix, delta: float) -> np.ndarray:
    """Semi-axes ``delta / sqrt(lambda_i)``, nondecreasing."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not g.positive_definite:
        raise SingularGramError(
            f"smallest eigenvalue {g.min_eigenvalue:.3g} is not above {PD_TOLERANCE}")
    return delta / np.sqrt(g.eigenvalues)


@dataclass(frozen=True)
class EntropyBoundReport:
    delta: float
    u: float
    d: int
    log_bound: float
    branch: str
    rogers_log_bound: float | None = None
    rogers_branch: str | None = None
    rogers_C: float | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def rogers_log_bound(d: int, ratio: float, C: float):
    """Rogers' estimate for covering a Euclidean ball of radius ``ratio`` by unit balls (``d >= 9``)."""
    if ratio < d:
        return math.log(C * d ** 2.5) + d * math.log(ratio), "rogers_small"
    return math.log(C * d * math.log(d)) + d * math.log(ratio), "rogers_large"


def local_entropy_bound(d: int, delta: float, u: float, rogers_C: float = DEFAULT_ROGERS_C,
                        attest_rogers: bool = False) -> EntropyBoundReport:
    """Upper bound on ``log N_2(u, B_n(delta), P_n)`` for a ``d``-parameter linear class.

    The cube bound ``d log(3 delta / u)`` is always reported. For ``d >= 9``
    Rogers' bound is evaluated with constant ``rogers_C``; since that
    constant is not known it only enters the minimum when the caller attests
    it with ``attest_rogers=True``.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if not (u > 0 and delta > 0):
        raise ValueError("delta and u must be positive")
    if u > delta:
        raise ValueError("u must not exceed delta")
    ratio = delta / u
    cube = d * math.log(3.0 * ratio)
    r_log = r_branch = None
    if d >= 9:
        r_log, r_branch = rogers_log_bound(d, ratio, rogers_C)
    log_bound, branch = cube, "cube"
    if attest_rogers and r_log is not None and r_log < cube:
        log_bound, branch = max(r_log, 0.0), r_branch
    return EntropyBoundReport(delta, u, d, log_bound, branch, r_log, r_branch,
                              rogers_C if d >= 9 else None)


def delta_n(n: int) -> float:
    """Local radius schedule ``log(n) / sqrt(n)``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return math.log(n) / math.sqrt(n)


def _entropy_integrand(z):
    return math.sqrt(math.log(1.0 / z)) if z > 0 else math.inf


@lru_cache(maxsize=None)
def compute_A(epsabs: float = 1e-12) -> float:
    """``A = int_0^{1/3} sqrt(log(1/z)) dz`` by adaptive quadrature (about 0.4713)."""
    val, err = integrate.quad(_entropy_integrand, 0.0, 1.0 / 3.0, epsabs=epsabs, epsrel=0.0, limit=200)
    if err > 1e-10:
        raise NumericalError(f"quadrature for A did not reach 1e-10 (estimate {err:.3g})")
    return float(val)


def A_closed_form() -> float:
    """``Gamma(3/2, log 3)``, the upper incomplete gamma function."""
    return float(special.gamma(1.5) * special.gammaincc(1.5, math.log(3.0)))


def entropy_integral(d: int, delta: float) -> float:
    """``int_0^delta sqrt(d log(3 delta / u)) du = 3 A delta sqrt(d)``."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if not delta > 0:
        raise ValueError("delta must be positive")
    return 3.0 * compute_A() * delta * math.sqrt(d)


def entropy_integral_quadrature(d: int, delta: float) -> float:
    """Direct numerical quadrature of the same integral, used as a cross-check."""
    def f(u):
        return math.sqrt(d * math.log(3.0 * delta / u)) if u > 0 else math.inf
    val, _ = integrate.quad(f, 0.0, delta, epsabs=0.0, epsrel=1e-12, limit=200)
    return float(val)
