"""Monte Carlo experiments: consistency of the SRM estimator and coverage of confidence radii."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from ..bounds import eta_trick_epsilon, eta_trick_precondition, loss_class_constants
from ..core import LinearClass, simplex_grid
from ..errors import NumericalError, PreconditionError
from ..srm import PenaltySpec, QuadraticRisk, select_model
from .config import GeneratorConfig
from .data import EvaluationDraw, generate
from .output import ConsistencyRow, CoverageRow, ExperimentResult
from .seeds import EVAL_STREAM, splitmix

log = logging.getLogger(__name__)


def _map(fn, items, workers):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def run_consistency(cfg: GeneratorConfig, classes: Sequence[LinearClass], spec: PenaltySpec,
                    n_grid: Sequence[int], trials: int, precision: int = 100_000,
                    workers: int = 1) -> ExperimentResult:
    """Excess risk ``L(g*_n) - L*`` of the SRM choice for each ``(n, trial)``.

    Trial ``t`` draws its samples from seed ``splitmix(seed, t)`` and its
    evaluation points from ``splitmix(seed, t, EVAL_STREAM)``. The excess
    risk is estimated as the mean of ``(g(X) - E[Y|X])^2`` over the
    evaluation points, so it is never negative.
    """
    n_grid = list(n_grid)
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n_grid must be increasing")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    classes = list(classes)
    top = classes[-1]

    def one_trial(t):
        trial_seed = splitmix(cfg.seed, t)
        ev = EvaluationDraw(cfg, precision, splitmix(cfg.seed, t, EVAL_STREAM))
        phi_eval = top.basis.columns(ev.xs, top.j)
        rows = []
        for n in n_grid:
            s = generate(cfg, n, seed=trial_seed)
            try:
                rep = select_model(s, classes, spec)
            except NumericalError as exc:
                log.warning("trial %d, n=%d failed: %s", t, n, exc)
                rows.append(ConsistencyRow(n, t, 0, math.nan, math.nan, math.nan, spec.regime))
                continue
            idx = rep.js.index(rep.chosen_j)
            g = phi_eval[:, :rep.chosen_j] @ np.asarray(rep.theta_hat)
            excess = float(np.mean((g - ev.mean) ** 2))
            rows.append(ConsistencyRow(n, t, rep.chosen_j, float(rep.empirical_risks[idx]),
                                       excess + ev.bayes_risk, excess, spec.regime))
        return rows

    rows = [r for chunk in _map(one_trial, range(trials), workers) for r in chunk]
    rows.sort(key=lambda r: (r.n, r.trial))
    return ExperimentResult("consistency", rows, {"precision": precision, "penalty": spec.describe()})


def default_bound_params(cls: LinearClass) -> tuple[float, float]:
    """``(A, W)`` of the loss-class covering bound for a simplex-constrained class."""
    return loss_class_constants(cls.j, cls.diameter, cls.lipschitz_envelope)


def sup_deviation(emp: QuadraticRisk, pop: QuadraticRisk, grid: np.ndarray) -> float:
    """``max over the grid of L(theta) - L_n(theta)``."""
    dq = pop.Q - emp.Q
    db = pop.b - emp.b
    dev = np.einsum("ij,jk,ik->i", grid, dq, grid) - 2.0 * grid @ db + (pop.c - emp.c)
    return float(dev.max())


def run_coverage(cfg: GeneratorConfig, cls: LinearClass, eta_grid: Sequence[float], trials: int,
                 n: int | Sequence[int] = 1000, bound_params: tuple[float, float] | None = None,
                 grid_step: float = 0.02, precision: int = 100_000, workers: int = 1) -> ExperimentResult:
    """Frequency with which ``sup_g L(g) - L_n(g)`` exceeds the confidence radius.

    The supremum is taken over a ``grid_step`` lattice of the simplex, which
    can only underestimate the true supremum.
    """
    n_list = [n] if isinstance(n, int) else list(n)
    A, W = bound_params if bound_params is not None else default_bound_params(cls)
    etas = list(eta_grid)
    for m in n_list:
        for eta in etas:
            need = eta_trick_precondition(A, W, m, eta)
            if m < need:
                raise PreconditionError(f"n={m} is below the required {need:.6g} for eta={eta}")
    eps = {(m, eta): eta_trick_epsilon(A, W, m, eta).epsilon for m in n_list for eta in etas}
    grid = simplex_grid(cls.j, grid_step)

    def one_trial(t):
        ev = EvaluationDraw(cfg, precision, splitmix(cfg.seed, t, EVAL_STREAM))
        pop = QuadraticRisk(*ev.quadratic(cls))
        trial_seed = splitmix(cfg.seed, t)
        out = []
        for m in n_list:
            s = generate(cfg, m, seed=trial_seed)
            emp = QuadraticRisk.from_design(cls.design(s.xs), s.ys)
            out.append(sup_deviation(emp, pop, grid))
        return out

    sups = np.asarray(_map(one_trial, range(trials), workers))  # (trials, len(n_list))
    rows = []
    for a, m in enumerate(n_list):
        for eta in etas:
            e = eps[(m, eta)]
            v = int(np.sum(sups[:, a] > e))
            rows.append(CoverageRow(m, float(eta), trials, v, v / trials, e, float(sups[:, a].mean())))
    return ExperimentResult("coverage", rows, {"A": A, "W": W, "grid_step": grid_step, "j": cls.j})
