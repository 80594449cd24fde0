"""Least squares over simplex-constrained classes and structural risk minimization."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .core import LabeledSample, LinearClass, Predictor, empirical_risk
from .errors import ConvergenceError, NumericalError
from .local_entropy import compute_A

log = logging.getLogger(__name__)

SOLVER_TOL = 1e-8
MAX_ITERS = 100_000


# --- least squares ------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticRisk:
    """``R(theta) = theta^T Q theta - 2 b^T theta + c``, the mean squared error of a linear class."""

    Q: np.ndarray
    b: np.ndarray
    c: float

    @classmethod
    def from_design(cls, phi, ys) -> "QuadraticRisk":
        phi = np.asarray(phi, dtype=float)
        ys = np.asarray(ys, dtype=float)
        n = phi.shape[0]
        return cls(phi.T @ phi / n, phi.T @ ys / n, float(ys @ ys / n))

    def prefix(self, j: int) -> "QuadraticRisk":
        return QuadraticRisk(self.Q[:j, :j], self.b[:j], self.c)

    def __call__(self, theta) -> float:
        theta = np.asarray(theta, dtype=float)
        return float(theta @ self.Q @ theta - 2.0 * self.b @ theta + self.c)

    def gradient(self, theta) -> np.ndarray:
        return 2.0 * (self.Q @ theta - self.b)


@dataclass(frozen=True)
class FitResult:
    theta: np.ndarray
    gap: float
    iterations: int


def _fw_gap(risk: QuadraticRisk, theta) -> float:
    grad = risk.gradient(theta)
    return float(grad @ theta - min(0.0, float(grad.min())))


def _vertex_gram(risk: QuadraticRisk) -> np.ndarray:
    """Inner products of the residuals ``psi . v - y`` for the vertices ``v in {0, e_1..e_j}``."""
    j = risk.b.shape[0]
    G = np.empty((j + 1, j + 1))
    G[0, 0] = risk.c
    G[0, 1:] = G[1:, 0] = risk.c - risk.b
    G[1:, 1:] = risk.Q - risk.b[:, None] - risk.b[None, :] + risk.c
    return G


def _affine_minimizer(G_S: np.ndarray) -> np.ndarray:
    k = G_S.shape[0]
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = G_S
    kkt[:k, k] = kkt[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    return sol[:k]


def frank_wolfe_simplex(risk: QuadraticRisk, tol: float = SOLVER_TOL,
                        max_iters: int = MAX_ITERS) -> FitResult:
    """Minimize a convex quadratic over ``{theta >= 0, sum(theta) <= 1}``.

    The feasible set is the convex hull of ``0, e_1, ..., e_j``. The main
    solver is fully corrective Frank-Wolfe in Wolfe's minimum-norm-point
    form: each outer step adds the Frank-Wolfe vertex to the active set and
    then re-optimizes the convex weights over that set exactly. It
    terminates after finitely many steps on a polytope. If round-off stalls
    it, away-step Frank-Wolfe continues from the current iterate.

    Returns once the Frank-Wolfe duality gap, an upper bound on
    ``R(theta) - min R``, is at most ``tol``.
    """
    j = risk.b.shape[0]
    G = _vertex_gram(risk)
    active = [0]
    lam = np.array([1.0])
    it = 0
    theta = np.zeros(j)
    while it < max_iters:
        it += 1
        full = np.zeros(j + 1)
        full[active] = lam
        theta = full[1:].copy()
        gap = _fw_gap(risk, theta)
        if gap <= tol:
            return FitResult(theta, max(gap, 0.0), it)
        scores = G[:, active] @ lam
        v = int(np.argmin(scores))
        if v in active:
            break  # round-off: the affine step did not reach the face optimum
        active.append(v)
        lam = np.append(lam, 0.0)
        for _ in range(j + 2):
            it += 1
            alpha = _affine_minimizer(G[np.ix_(active, active)])
            if np.all(alpha > 1e-14):
                lam = alpha / alpha.sum()
                break
            neg = alpha <= 1e-14
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(neg, lam / (lam - alpha), np.inf)
            step = float(np.clip(np.min(ratios), 0.0, 1.0))
            lam = lam + step * (alpha - lam)
            keep = lam > 1e-14
            keep[int(np.argmax(lam))] = True
            active = [a for a, k in zip(active, keep) if k]
            lam = lam[keep]
            lam = np.maximum(lam, 0.0)
            lam = lam / lam.sum()
    return _away_step_fw(risk, theta, tol, max(max_iters - it, 1), it)


def _away_step_fw(risk: QuadraticRisk, theta, tol, max_iters, offset=0) -> FitResult:
    """Away-step Frank-Wolfe with exact line search.

    Barycentric weights are implicit (``theta_i`` for ``e_i`` and
    ``1 - sum(theta)`` for ``0``), so the active set needs no bookkeeping.
    """
    j = risk.b.shape[0]
    theta = np.array(theta, dtype=float)
    gap = math.inf
    for it in range(1, max_iters + 1):
        grad = risk.gradient(theta)
        # toward vertex: the minimizer of <grad, v> over {0, e_i}
        i_fw = int(np.argmin(grad))
        v_fw = np.zeros(j)
        if grad[i_fw] < 0:
            v_fw[i_fw] = 1.0
        gap = float(grad @ (theta - v_fw))
        if gap <= tol:
            return FitResult(theta, max(gap, 0.0), offset + it)

        # away vertex: the maximizer of <grad, v> over active vertices
        w0 = 1.0 - theta.sum()
        active = np.flatnonzero(theta > 0)
        a_idx, a_val = None, -math.inf
        if active.size:
            k = active[int(np.argmax(grad[active]))]
            a_idx, a_val = int(k), float(grad[k])
        if w0 > 0 and a_val < 0.0:
            a_idx, a_val = -1, 0.0
        v_away = np.zeros(j)
        if a_idx is not None and a_idx >= 0:
            v_away[a_idx] = 1.0
        away_gap = float(grad @ (v_away - theta))

        if a_idx is not None and away_gap > gap:
            direction = theta - v_away
            weight = w0 if a_idx == -1 else theta[a_idx]
            step_max = weight / (1.0 - weight) if weight < 1.0 else math.inf
            slope = -away_gap
        else:
            direction = v_fw - theta
            step_max = 1.0
            slope = -gap
        curv = float(direction @ risk.Q @ direction)
        step = step_max if curv <= 0 else min(step_max, -slope / (2.0 * curv))
        if not math.isfinite(step):
            step = 1.0
        theta = theta + step * direction
        # clean up round-off so the iterate stays feasible
        theta[np.abs(theta) < 1e-15] = 0.0
        theta = np.maximum(theta, 0.0)
        s = theta.sum()
        if s > 1.0:
            theta = theta / s
    raise ConvergenceError(f"Frank-Wolfe stopped after {max_iters} iterations with gap {gap:.3g}",
                           gap=gap, iterations=max_iters)


def fit_least_squares(cls: LinearClass, s: LabeledSample, tol: float = SOLVER_TOL,
                      max_iters: int = MAX_ITERS) -> Predictor:
    risk = QuadraticRisk.from_design(cls.design(s.xs), s.ys)
    return Predictor(cls, frank_wolfe_simplex(risk, tol, max_iters).theta)


# --- penalties ----------------------------------------------------------------

Sequence_ = Union[Sequence[float], Callable[[int], float], None]

REGIMES = ("vc_subgraph", "parametric", "parametric_example", "local_entropy_experimental")


class PenaltyDomainError(NumericalError, ValueError):
    pass


def _seq_value(seq, j, name):
    if seq is None:
        raise ValueError(f"{name} sequence is required")
    if callable(seq):
        return float(seq(j))
    if j > len(seq):
        raise ValueError(f"{name} sequence has no entry for j={j}")
    return float(seq[j - 1])


@dataclass(frozen=True)
class PenaltySpec:
    """Complexity-penalty regime and its constants.

    ``vc_subgraph``
        ``sqrt(128 W_j log(A e n) / n)``; ``W_j`` defaults to ``2 V_j`` and
        ``A`` to ``128 e``, which gives ``sqrt(256 V_j log(128 e^2 n) / n)``.
    ``parametric``
        ``sqrt(128 j log(2 sqrt(j) M_j n) / n)``; ``M_j`` defaults to ``8 sqrt(2 j)``.
    ``parametric_example``
        ``sqrt(128 j log(16 sqrt(2) j n) / n)``.
    ``local_entropy_experimental``
        ``3 A log(n) sqrt(j / n)``. No consistency guarantee is known for
        this penalty; reports mark it unproven.

    ``scale`` multiplies every penalty and exists for sensitivity studies.
    """

    regime: str = "parametric_example"
    vc_dims: Sequence_ = None
    w_dims: Sequence_ = None
    A: float | None = None
    m_seq: Sequence_ = None
    scale: float = 1.0

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"unknown penalty regime {self.regime!r}; choose from {REGIMES}")
        if self.scale < 0:
            raise ValueError("scale must be nonnegative")
        if self.regime == "vc_subgraph" and self.vc_dims is None and self.w_dims is None:
            raise ValueError("vc_subgraph regime needs vc_dims or w_dims")

    @property
    def unproven(self) -> bool:
        return self.regime == "local_entropy_experimental"

    def W(self, j: int) -> float:
        if self.w_dims is not None:
            return _seq_value(self.w_dims, j, "w_dims")
        return 2.0 * _seq_value(self.vc_dims, j, "vc_dims")

    def M(self, j: int) -> float:
        if self.m_seq is not None:
            return _seq_value(self.m_seq, j, "m_seq")
        return 8.0 * math.sqrt(2.0 * j)

    def describe(self) -> dict:
        out = {"regime": self.regime, "scale": self.scale, "unproven": self.unproven}
        if self.regime == "vc_subgraph":
            out["A"] = self.A if self.A is not None else 128.0 * math.e
        return out


def _log_arg(value, what):
    if value <= 1.0:
        raise PenaltyDomainError(f"log argument {value:.6g} <= 1 for {what}")
    return math.log(value)


def penalty(spec: PenaltySpec, n: int, j: int) -> float:
    """Complexity penalty ``r(n, j)`` of the regime."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if j < 1:
        raise ValueError("j must be >= 1")
    regime = spec.regime
    if regime == "vc_subgraph":
        A = spec.A if spec.A is not None else 128.0 * math.e
        W = spec.W(j)
        if W < 1:
            raise ValueError("W_j must be >= 1")
        r = math.sqrt(128.0 * W * _log_arg(A * math.e * n, "vc_subgraph") / n)
    elif regime == "parametric":
        M = spec.M(j)
        if M < 1:
            raise ValueError("M_j must be >= 1")
        r = math.sqrt(128.0 * j * _log_arg(2.0 * math.sqrt(j) * M * n, "parametric") / n)
    elif regime == "parametric_example":
        r = math.sqrt(128.0 * j * _log_arg(16.0 * math.sqrt(2.0) * j * n, "parametric_example") / n)
    else:
        r = 3.0 * compute_A() * math.log(n) * math.sqrt(j / n)
    return spec.scale * r


def structural_risk(fit_risk: float, pen: float) -> float:
    if fit_risk < 0 or pen < 0:
        raise ValueError("risk and penalty must be nonnegative")
    return fit_risk + pen


def choose_index(structural_risks: Sequence[float]) -> tuple[int, bool]:
    """Position of the minimum with smallest-index tie-breaking, and whether a tie occurred."""
    if len(structural_risks) == 0:
        raise ValueError("no candidates")
    best = min(structural_risks)
    hits = [i for i, v in enumerate(structural_risks) if v == best]
    return hits[0], len(hits) > 1


@dataclass
class SelectionReport:
    chosen_j: int
    theta_hat: list
    js: list
    empirical_risks: list
    penalties: list
    structural_risks: list
    tie_broken: bool
    penalty: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def check(self, tol: float = 1e-12) -> None:
        for e, p, s in zip(self.empirical_risks, self.penalties, self.structural_risks):
            if abs(e + p - s) > tol:
                raise NumericalError(f"structural risk {s} != {e} + {p}")
        idx, _ = choose_index(self.structural_risks)
        if self.js[idx] != self.chosen_j:
            raise NumericalError("chosen_j does not attain the minimum structural risk")


class SelectionError(NumericalError):
    def __init__(self, message, j):
        super().__init__(message)
        self.j = j


def _nested_prefixes(classes):
    basis = classes[0].basis
    return all(c.basis == basis for c in classes)


def select_model(s: LabeledSample, classes: Sequence[LinearClass], spec: PenaltySpec,
                 workers: int = 1, tol: float = SOLVER_TOL) -> SelectionReport:
    """Fit every class and pick the one with smallest structural risk."""
    if not classes:
        raise ValueError("need at least one class")
    js = [c.j for c in classes]
    if js != sorted(js):
        raise ValueError("classes must be ordered by j")

    if _nested_prefixes(classes):
        # one design matrix serves every prefix class
        full = QuadraticRisk.from_design(classes[-1].basis.columns(s.xs, max(js)), s.ys)
        risks = [full.prefix(j) for j in js]
    else:
        risks = [QuadraticRisk.from_design(c.design(s.xs), s.ys) for c in classes]

    def fit(i):
        try:
            return frank_wolfe_simplex(risks[i], tol).theta
        except ConvergenceError as exc:
            raise SelectionError(f"fit failed for j={js[i]}: {exc}", js[i]) from exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            thetas = list(pool.map(fit, range(len(classes))))
    else:
        thetas = [fit(i) for i in range(len(classes))]

    predictors = [Predictor(c, t) for c, t in zip(classes, thetas)]
    emp = [empirical_risk(p, s) for p in predictors]
    pens = [penalty(spec, s.n, j) for j in js]
    sr = [structural_risk(e, p) for e, p in zip(emp, pens)]
    idx, tie = choose_index(sr)
    report = SelectionReport(js[idx], list(predictors[idx].theta), js, emp, pens, sr, tie,
                             spec.describe())
    report.check()
    return report


# --- summability diagnostic ---------------------------------------------------

RATIO_MARGIN = 0.05


@dataclass(frozen=True)
class DeltaDiagnostic:
    terms: list
    partial_sums: list
    converging: bool
    unproven: bool = False


def delta_terms(spec: PenaltySpec, j_max: int) -> list[float]:
    if spec.regime == "vc_subgraph":
        return [math.exp(-spec.W(j) / 2.0) for j in range(1, j_max + 1)]
    # the parametric penalties are built so that the j-th term is exp(-j)
    return [math.exp(-j) for j in range(1, j_max + 1)]


def delta_diagnostic(spec: PenaltySpec, j_max: int) -> DeltaDiagnostic:
    """Partial sums of the series ``Delta`` with a geometric-tail heuristic.

    The flag is set when each of the last (up to) 10 term ratios is at most
    ``1 - 0.05``. Series whose ratios creep towards 1, such as
    ``exp(-log(j+1)/2)``, are flagged as not converging even though their
    individual ratios are below 1.
    """
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    terms = delta_terms(spec, j_max)
    partial = list(np.cumsum(terms))
    ratios = [terms[i + 1] / terms[i] for i in range(len(terms) - 1) if terms[i] > 0]
    tail = ratios[-10:]
    converging = bool(tail) and all(r <= 1.0 - RATIO_MARGIN for r in tail)
    return DeltaDiagnostic(terms, [float(p) for p in partial], converging, spec.unproven)
