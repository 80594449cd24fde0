"""Synthetic data: designs, targets, noise models, sample CSV I/O and true risk."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from ..core import LabeledSample, LinearClass, make_basis
from ..errors import ConfigError
from .config import FunctionTarget, GeneratorConfig, LinearTarget
from .seeds import EVAL_STREAM, splitmix

GAUSSIAN_MEAN = 0.5
GAUSSIAN_SD = 0.25


def draw_design(design: str, rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    if design == "uniform_cube":
        return rng.random((n, k))
    if design == "gaussian_clipped":
        # rejection keeps a density on [0, 1]^k (clipping would put atoms on the faces)
        out = rng.normal(GAUSSIAN_MEAN, GAUSSIAN_SD, size=(n, k))
        bad = (out < 0) | (out > 1)
        while bad.any():
            out[bad] = rng.normal(GAUSSIAN_MEAN, GAUSSIAN_SD, size=int(bad.sum()))
            bad = (out < 0) | (out > 1)
        return out
    raise ConfigError(f"unknown design {design!r}")


def clean_target(cfg: GeneratorConfig, xs: np.ndarray) -> np.ndarray:
    t = cfg.target
    if isinstance(t, LinearTarget):
        basis = make_basis(t.basis, max(64, len(t.theta)))
        return basis.columns(xs, len(t.theta)) @ np.asarray(t.theta)
    if isinstance(t, FunctionTarget):
        x1 = xs[:, 0]
        if t.name == "constant":
            return np.full(xs.shape[0], t.value)
        if t.name == "sine":
            return 0.5 + 0.4 * np.sin(2.0 * math.pi * x1)
        if t.name == "bump":
            return np.exp(-20.0 * (x1 - 0.5) ** 2)
    raise ConfigError(f"unsupported target {t!r}")


def _clipped_uniform_moments(c, h):
    """Mean and variance of ``clip(c + U(-h, h), 0, 1)``."""
    a, b = c - h, c + h
    lo, hi = np.maximum(a, 0.0), np.minimum(b, 1.0)
    above = np.maximum(b - 1.0, 0.0)
    width = 2.0 * h
    m1 = ((hi ** 2 - lo ** 2) / 2.0 + above) / width
    m2 = ((hi ** 3 - lo ** 3) / 3.0 + above) / width
    return m1, np.maximum(m2 - m1 * m1, 0.0)


def conditional_moments(cfg: GeneratorConfig, xs: np.ndarray):
    """``(E[Y | X], Var[Y | X])`` at the given points."""
    c = clean_target(cfg, xs)
    noise = cfg.noise
    if noise.kind == "none":
        return c, np.zeros_like(c)
    if noise.kind == "uniform":
        return _clipped_uniform_moments(c, noise.width / 2.0)
    p = noise.p
    return c + p * (1.0 - 2.0 * c), p * (1.0 - p) * (1.0 - 2.0 * c) ** 2


def generate(cfg: GeneratorConfig, n: int, seed: int | None = None) -> LabeledSample:
    """Draw ``n`` observations; deterministic in ``(seed, n)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    xs = draw_design(cfg.design, rng, n, cfg.k)
    c = clean_target(cfg, xs)
    noise = cfg.noise
    if noise.kind == "none":
        ys = c
    elif noise.kind == "uniform":
        ys = np.clip(c + rng.uniform(-noise.width / 2.0, noise.width / 2.0, size=n), 0.0, 1.0)
    else:
        flip = rng.random(n) < noise.p
        ys = np.where(flip, 1.0 - c, c)
    return LabeledSample(xs, np.clip(ys, 0.0, 1.0))


class EvaluationDraw:
    """Fresh design points for Monte Carlo estimates of population quantities."""

    def __init__(self, cfg: GeneratorConfig, precision: int, seed: int | None = None):
        if precision < 10_000:
            raise ValueError("precision must be >= 10^4")
        if seed is None:
            seed = splitmix(cfg.seed, 0, EVAL_STREAM)
        rng = np.random.default_rng(seed)
        self.xs = draw_design(cfg.design, rng, precision, cfg.k)
        self.mean, self.var = conditional_moments(cfg, self.xs)
        self.N = precision

    @property
    def bayes_risk(self) -> float:
        return float(self.var.mean())

    def risk_terms(self, values: np.ndarray) -> np.ndarray:
        return (values - self.mean) ** 2 + self.var

    def quadratic(self, cls: LinearClass):
        """Population risk of ``cls`` as ``(Q, b, c)`` with ``L(theta) = theta^T Q theta - 2 b^T theta + c``."""
        phi = cls.design(self.xs)
        N = self.N
        return phi.T @ phi / N, phi.T @ self.mean / N, float((self.mean ** 2 + self.var).mean())


def true_risk(p, cfg: GeneratorConfig, precision: int = 100_000, seed: int | None = None):
    """Monte Carlo estimate of ``L(g) = E[(g(X) - Y)^2]`` and its standard error.

    Averages ``E[(g(X) - Y)^2 | X] = (g(X) - E[Y|X])^2 + Var[Y|X]`` over a
    fresh draw of ``precision`` design points, which removes the response
    noise from the estimator's variance.
    """
    ev = EvaluationDraw(cfg, precision, seed)
    terms = ev.risk_terms(p.predict(ev.xs) if hasattr(p, "predict") else np.asarray(p(ev.xs), dtype=float))
    return float(terms.mean()), float(terms.std(ddof=1) / math.sqrt(ev.N))


def read_sample_csv(path: str | Path) -> LabeledSample:
    """Read a header ``x1,...,xk,y`` CSV."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read sample {path}: {exc}") from exc
    if len(rows) < 2:
        raise ConfigError("sample CSV needs a header and at least one row")
    header = [h.strip() for h in rows[0]]
    k = len(header) - 1
    if k < 1 or header[-1] != "y" or header[:-1] != [f"x{i}" for i in range(1, k + 1)]:
        raise ConfigError("sample CSV header must be x1,...,xk,y")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"non-numeric value in sample CSV: {exc}") from exc
    if data.shape[1] != k + 1:
        raise ConfigError("ragged sample CSV")
    try:
        return LabeledSample(data[:, :k], data[:, k])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def write_sample_csv(s: LabeledSample, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{i}" for i in range(1, s.k + 1)] + ["y"])
        for x, y in zip(s.xs, s.ys):
            w.writerow([repr(float(v)) for v in x] + [repr(float(y))])
