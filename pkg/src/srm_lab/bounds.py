"""Covering-number bounds, deviation-probability bounds and confidence radii.

Every probability bound is clamped to ``[0, 1]``. Bounds that can overflow a
double (large VC dimensions, tiny ``eps``) are evaluated in log space.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

from .errors import ConvergenceError, PreconditionError

E = math.e
SIXTEEN_E = 16.0 * math.e

# the universal constant of the VC-subgraph covering bound is not known;
# callers override it, reports always record the value used
DEFAULT_K = 1.0


def _exp_clamped(log_value: float, clamp: bool = True) -> float:
    if not clamp:
        return _safe_exp(log_value)
    if log_value >= 0.0:
        return 1.0
    return math.exp(log_value)


def _check_unit_open(eps):
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")


def _safe_exp(log_value: float) -> float:
    return math.exp(log_value) if log_value < 709.0 else math.inf


# --- covering-number bounds ---------------------------------------------------

def log_vc_subgraph_covering_bound(V: int, eps: float, r: int = 1, K: float = DEFAULT_K) -> float:
    _check_unit_open(eps)
    if V < 1:
        raise ValueError("V must be >= 1")
    if r < 1:
        raise ValueError("r must be >= 1")
    return math.log(K) + math.log(V + 1) + (V + 1) * math.log(SIXTEEN_E) - r * V * math.log(eps)


def vc_subgraph_covering_bound(V: int, eps: float, r: int = 1, K: float = DEFAULT_K) -> float:
    """``K (V+1) (16e)^(V+1) eps^(-r V)`` for a VC-subgraph class with envelope 1."""
    return _safe_exp(log_vc_subgraph_covering_bound(V, eps, r, K))


@dataclass(frozen=True)
class LossCoveringBound:
    value: float
    branch: str
    branches: dict


def loss_class_covering_bound(V: int, eps: float, K: float = DEFAULT_K) -> LossCoveringBound:
    """Covering bound for the squared-loss class of a VC-subgraph class.

    Two routes are available and the smaller one is returned:

    * ``subgraph``: the loss class has subgraph dimension at most ``2V - 1``,
      giving ``K (2V) (16e)^(2V) eps^-(2V-1)``;
    * ``l2``: ``N_1(eps, L_G) <= N_2(eps/2, G)`` giving
      ``K (V-1) (16e)^(V-1) (eps/2)^(-2V)``, only meaningful for ``V >= 2``.

    The two routes do not use matching exponents; both are reproduced as
    stated rather than reconciled.
    """
    _check_unit_open(eps)
    if V < 1:
        raise ValueError("V must be >= 1")
    logs = {"subgraph": math.log(K) + math.log(2 * V) + 2 * V * math.log(SIXTEEN_E)
            - (2 * V - 1) * math.log(eps)}
    if V >= 2:
        logs["l2"] = (math.log(K) + math.log(V - 1) + (V - 1) * math.log(SIXTEEN_E)
                      - 2 * V * math.log(eps / 2.0))
    branch = min(logs, key=lambda b: (logs[b], b))
    values = {b: _safe_exp(v) for b, v in logs.items()}
    return LossCoveringBound(values[branch], branch, values)


def _check_positive(**kwargs):
    for name, v in kwargs.items():
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")


def log_parametric_covering_bound(d: int, diam: float, m_norm: float, eps: float) -> float:
    _check_positive(d=d, diam=diam, m_norm=m_norm, eps=eps)
    return 0.5 * d * math.log(d) + d * math.log(m_norm * diam / eps)


def parametric_covering_bound(d: int, diam: float, m_norm: float, eps: float, p: int = 1) -> float:
    """``sqrt(d)^d (||m||_p diam / eps)^d`` for a Lipschitz-parametrized class.

    ``p`` only selects which norm ``m_norm`` was computed in.
    """
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2")
    return _safe_exp(log_parametric_covering_bound(d, diam, m_norm, eps))


def parametric_loss_covering_bound(d: int, diam: float, m_norm: float, eps: float) -> float:
    """``2^d sqrt(d)^d (||m||_1 diam / eps)^d`` for the squared-loss class."""
    return _safe_exp(d * math.log(2.0) + log_parametric_covering_bound(d, diam, m_norm, eps))


def loss_class_constants(d: int, diam: float, m_norm: float) -> tuple[float, float]:
    """``(A, W)`` with ``parametric_loss_covering_bound(eps) == A * eps ** -W``."""
    _check_positive(d=d, diam=diam, m_norm=m_norm)
    A = (2.0 ** d) * (math.sqrt(d) ** d) * (m_norm * diam) ** d
    return A, float(d)


# --- deviation-probability bounds ---------------------------------------------

def sauer_bound(n: int, V: int) -> int:
    """``sum_{i <= V} C(n, i)``, capped by ``2^n``."""
    return min(sum(math.comb(n, i) for i in range(0, min(V, n) + 1)), 2 ** n)


def classification_deviation_bound(n: int, eps: float, vc: Optional[int] = None,
                                   shatter: Optional[float] = None, constant: int = 32,
                                   density: Optional[tuple[float, float]] = None,
                                   clamp: bool = True) -> float:
    """``min(1, 8 S exp(-n eps^2 / constant))`` for a class of classifiers.

    ``S`` is the shatter coefficient if given, else ``n^V`` when ``n > 2V``
    and ``V >= 2``, else the Sauer sum. ``constant=128`` gives the
    excess-risk variant for the empirical minimizer. ``density=(C, dV)``
    replaces ``S`` with ``C n^dV``. ``clamp=False`` returns the raw value.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not eps > 0:
        raise ValueError("eps must be positive")
    if constant not in (32, 128):
        raise ValueError("constant must be 32 or 128")
    if density is not None:
        C, dv = density
        log_s = math.log(C) + dv * math.log(n)
    elif shatter is not None:
        log_s = math.log(shatter)
    elif vc is not None:
        if n > 2 * vc and vc >= 2:
            log_s = vc * math.log(n)
        else:
            log_s = math.log(sauer_bound(n, vc))
    else:
        raise ValueError("give vc, shatter or density")
    return _exp_clamped(math.log(8.0) + log_s - n * eps * eps / constant, clamp)


def regression_deviation_bound(n: int, eps: float, covering_bound_at: Callable[[float], float] | None = None,
                               log_covering_bound_at: Callable[[float], float] | None = None,
                               clamp: bool = True) -> float:
    """``min(1, 8 N(eps / 8) exp(-n eps^2 / 128))`` for a loss class with envelope 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_unit_open(eps)
    if log_covering_bound_at is not None:
        log_n = log_covering_bound_at(eps / 8.0)
    elif covering_bound_at is not None:
        cov = covering_bound_at(eps / 8.0)
        if not cov > 0:
            raise ValueError("covering bound must be positive")
        log_n = math.log(cov)
    else:
        raise ValueError("give a covering evaluator")
    return _exp_clamped(math.log(8.0) + log_n - n * eps * eps / 128.0, clamp)


def hoeffding_tail(eta_sum: float, ranges) -> float:
    """``min(1, 2 exp(-2 eta^2 / sum (b_i - a_i)^2))``."""
    widths = [float(b) - float(a) for a, b in ranges]
    if any(w < 0 for w in widths):
        raise ValueError("each range needs b_i >= a_i")
    total = sum(w * w for w in widths)
    if total == 0:
        raise ValueError("all ranges are degenerate")
    return _exp_clamped(math.log(2.0) - 2.0 * eta_sum * eta_sum / total)


# --- Lambert W ----------------------------------------------------------------

LAMBERT_TOL = 1e-12
LAMBERT_MAX_ITER = 50


def _lambert_residual_ok(w, x):
    return abs(w * math.exp(w) - x) <= LAMBERT_TOL * max(1.0, x)


def _lambert_bisect(x):
    lo, hi = 0.0, max(1.0, math.log1p(x))
    while hi * math.exp(hi) < x:
        hi *= 2.0
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if mid * math.exp(mid) < x:
            lo = mid
        else:
            hi = mid
    return lo if abs(lo * math.exp(lo) - x) <= abs(hi * math.exp(hi) - x) else hi


def lambert_w(x: float) -> float:
    """Principal branch of the inverse of ``w -> w e^w`` on ``[0, inf)``.

    Halley iteration from ``log(1 + x)``; falls back to bisection if the
    residual test ``|w e^w - x| <= 1e-12 max(1, x)`` is not met in 50 steps.
    """
    x = float(x)
    if x < 0 or math.isnan(x):
        raise ValueError("lambert_w is defined here for x >= 0")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    w = math.log1p(x)
    for _ in range(LAMBERT_MAX_ITER):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) <= LAMBERT_TOL * max(1.0, x) * 0.25:
            break
        wp1 = w + 1.0
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w_new = w - step
        if w_new < 0:
            w_new = 0.5 * w
        if w_new == w:
            break
        w = w_new
    if not _lambert_residual_ok(w, x):
        w = _lambert_bisect(x)
        if not _lambert_residual_ok(w, x):
            raise ConvergenceError(f"lambert_w did not converge for x={x}")
    return w


# --- eta-trick inversions -----------------------------------------------------

@dataclass
class DeviationBoundReport:
    n: int
    epsilon: float
    eta: float
    formula_id: str
    constants: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def eta_trick_precondition(A: float, W: float, n: int, eta: float) -> float:
    """Smallest admissible sample size ``384 Z (eta / B)^(1/Z)``."""
    B = 8.0 ** (W + 1.0) * A
    Z = W / 2.0
    return 384.0 * Z * math.exp((math.log(eta) - math.log(B)) / Z)


def eta_trick_epsilon(A: float, W: float, n: int, eta: float, check: bool = True) -> DeviationBoundReport:
    """Confidence radius for a loss class with ``N_1(eps) <= A eps^-W``.

    Solves ``B gamma^-Z exp(-R_n gamma) = eta`` with ``B = 8^(W+1) A``,
    ``Z = W / 2`` and ``R_n = n / 128`` through the Lambert W function and
    returns ``eps = sqrt(gamma)``. The report also carries the explicit
    logarithmic upper form of the radius.
    """
    if not A > 0:
        raise ValueError("A must be positive")
    if not W >= 1:
        raise ValueError("W must be >= 1")
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    if n < 1:
        raise ValueError("n must be >= 1")
    B = 8.0 ** (W + 1.0) * A
    Z = W / 2.0
    R = n / 128.0
    n_min = eta_trick_precondition(A, W, n, eta)
    if check and n < n_min:
        raise PreconditionError(f"n={n} is below the required {n_min:.6g}")
    log_arg = math.log(R / Z) + (math.log(B) - math.log(eta)) / Z
    arg = math.exp(log_arg)
    epsilon = math.sqrt(Z / R * lambert_w(arg))
    radicand = Z * math.log(R / Z) / R + math.log(B) / R - math.log(eta) / R
    loose = math.sqrt(radicand) if radicand > 0 else math.nan
    log_form_applies = log_arg >= math.log(3.0)
    report = DeviationBoundReport(
        n=n, epsilon=epsilon, eta=eta, formula_id="eta_inversion",
        constants={"A": A, "W": W, "B": B, "Z": Z, "R_n": R,
                   "loose_epsilon": loose, "n_min": n_min, "log_form_applies": log_form_applies},
    )
    if log_form_applies:
        # W(x) <= log(x) for x >= 3
        assert epsilon <= loose * (1 + 1e-12), (epsilon, loose)
    return report


def eta_trick_bisection(A: float, W: float, n: int, eta: float) -> float:
    """Independent solve of ``log B - Z log(gamma) - R_n gamma = log(eta)``; returns ``sqrt(gamma)``."""
    B = 8.0 ** (W + 1.0) * A
    Z = W / 2.0
    R = n / 128.0
    target = math.log(eta)

    def h(g):
        return math.log(B) - Z * math.log(g) - R * g - target

    lo, hi = 1e-300, 1.0
    while h(hi) > 0:
        hi *= 2.0
    for _ in range(3000):
        mid = 0.5 * (lo + hi) if hi / lo < 4 else math.sqrt(lo * hi)
        if mid <= lo or mid >= hi:
            break
        if h(mid) > 0:
            lo = mid
        else:
            hi = mid
    return math.sqrt(0.5 * (lo + hi))


def classification_eta_epsilon(V: int, n: int, eta: float, constant: int = 32) -> float:
    """``sqrt(constant (V log n - log(eta / 8)) / n)``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    if constant not in (32, 128):
        raise ValueError("constant must be 32 or 128")
    radicand = constant * (V * math.log(n) - math.log(eta / 8.0)) / n
    if radicand <= 0:
        raise ValueError("nonpositive radicand")
    return math.sqrt(radicand)


# --- VC-subgraph dimension calculus ------------------------------------------

_BINARY = {"min", "max"}
_UNARY_SAME = {"negate", "shift", "monotone_compose"}
_UNARY_DOUBLE = {"square", "abs"}


def vc_calculus(expr) -> int:
    """Upper bound on the VC-subgraph dimension of a composed class.

    ``expr`` is an integer leaf or a sequence ``(op, child, ...)``:
    ``min``/``max`` take two children and give ``V_F + V_G - 1``;
    ``negate``, ``shift`` and ``monotone_compose`` keep ``V``;
    ``square`` and ``abs`` give ``2V - 1``.
    """
    if isinstance(expr, bool):
        raise ValueError("malformed expression: boolean leaf")
    if isinstance(expr, int):
        if expr < 1:
            raise ValueError("leaf dimensions must be >= 1")
        return expr
    if isinstance(expr, dict) and "leaf" in expr:
        return vc_calculus(expr["leaf"])
    if not isinstance(expr, (list, tuple)) or not expr or not isinstance(expr[0], str):
        raise ValueError(f"malformed expression: {expr!r}")
    op, args = expr[0], list(expr[1:])
    if op in _BINARY:
        if len(args) != 2:
            raise ValueError(f"{op} takes two operands")
        return vc_calculus(args[0]) + vc_calculus(args[1]) - 1
    if op in _UNARY_SAME | _UNARY_DOUBLE:
        if len(args) != 1:
            raise ValueError(f"{op} takes one operand")
        v = vc_calculus(args[0])
        return v if op in _UNARY_SAME else 2 * v - 1
    raise ValueError(f"unknown operator {op!r}")
